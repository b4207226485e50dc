// Timing comparison: the tiled OpenMP pair-quadrature engine against the
// plain serial reference, then the batched Gram assembly.  The parallel
// engine must reproduce the serial value to reordering-level rounding at
// every thread count.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "fracorn/korn.hpp"
#include "fracorn/quadrature.hpp"
#include "fracorn/seminorms.hpp"

using namespace fracorn;

int main() {
  const double h = 1.0 / 24;
  Grid grid = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), h);
  VectorField u = field_library("random_trig", {{"seed", 9.0}, {"degree", 3.0}}, 2);
  FracParams par(0.5, 2.0, 2);

  PairKernelSpec spec;
  spec.beta = par.p * par.s;
  spec.refine_depth = 4;
  spec.g = [&u, &par](const Vec& x, const Vec& y) {
    return std::pow((u(y) - u(x)).norm(), par.p);
  };

  std::printf("pair quadrature, %zu cells, depth %d\n", grid.cells().size(), spec.refine_depth);
  double t0 = omp_get_wtime();
  double ref = double_integral_serial(grid, grid, spec);
  double t_ref = omp_get_wtime() - t0;
  std::printf("  %-14s %10.3f s   value %.17g\n", "serial", t_ref, ref);

  int max_threads = omp_get_max_threads();
  std::vector<int> counts = {1};
  for (int c = 2; c <= max_threads; c *= 2) counts.push_back(c);
  if (counts.back() != max_threads) counts.push_back(max_threads);
  for (int c : counts) {
    omp_set_num_threads(c);
    t0 = omp_get_wtime();
    double val = double_integral(grid, grid, spec);
    double t = omp_get_wtime() - t0;
    std::printf("  %2d thread%s    %10.3f s   value %.17g   speedup %5.2fx   |diff| %.3g\n", c,
                c == 1 ? " " : "s", t, val, t_ref / t, std::abs(val - ref));
  }
  omp_set_num_threads(max_threads);

  std::printf("\nbatched Gram assembly, degree-3 mode basis\n");
  BasisSet basis = make_basis(2, 3, Vec(0.0, 0.0), Vec(1.0, 1.0));
  t0 = omp_get_wtime();
  GramForms forms = assemble_gram(basis, grid, par.s);
  double t_gram = omp_get_wtime() - t0;
  std::printf("  %zu basis fields, 3 forms      %10.3f s\n", basis.fields.size(), t_gram);
  std::printf("  second Korn estimate %.12g\n", estimate_korn2_constant(forms).value);
  return 0;
}
