#pragma once

// Deterministic quadrature for singular pair integrals
//
//     I = sum over cell pairs of  g(x, y) / |x - y|^{n + beta} * w_x * w_y ,
//
// composite midpoint over cell pairs.  Same-cell and face-adjacent pairs
// are expanded by recursive 2^n-fold subdivision to depth L, with the
// coincident sub-pair at the deepest level dropped (its contribution is
// o(1) as L grows for the kernels used here).  Accumulation is pairwise
// over a fixed tile decomposition, so results are bitwise independent of
// the number of OpenMP threads.  A plain serial reference implementation
// (natural-order compensated summation) is kept for testing and as the
// benchmark baseline.

#include <functional>
#include <memory>
#include <vector>

#include "fracorn/grid.hpp"

namespace fracorn {

struct PairKernelSpec {
  double beta = 1.0;                                    // kernel power n + beta
  std::function<double(const Vec&, const Vec&)> g;      // numerator
  int refine_depth = 4;                                 // subdivision depth L
};

// OpenMP-parallel engine (tiled, deterministic across thread counts).
double double_integral(const Grid& gx, const Grid& gy, const PairKernelSpec& spec);
// Straightforward serial reference: same quadrature rule, natural pair
// order, Kahan compensation.  Agrees with the engine to reordering-level
// rounding; kept for testing.
double double_integral_serial(const Grid& gx, const Grid& gy, const PairKernelSpec& spec);

// Midpoint sum of fn over the grid, pairwise accumulation, serial.
double single_integral(const Grid& g, const std::function<double(const Vec&)>& fn);

// Batched pair quadrature for assembling many bilinear forms in one pass.
// The sweep visits exactly the node pairs double_integral would visit for
// the given beta and depth, handing each to the accumulator as (x, y, w)
// with w = |x - y|^{-(n+beta)} * (cell or sub-cell measures).  Each tile of
// the parallel decomposition works on its own clone; clones are merged into
// the caller's accumulator in a fixed tile order, so the result is
// independent of the thread count.
class PairAccumulator {
 public:
  virtual ~PairAccumulator() = default;
  virtual std::unique_ptr<PairAccumulator> clone_empty() const = 0;
  virtual void accumulate(const Vec& x, const Vec& y, double w) = 0;
  virtual void merge(const PairAccumulator& other) = 0;
};

void pair_sweep(const Grid& gx, const Grid& gy, double beta, int refine_depth,
                PairAccumulator& acc);

// Pairwise reduction of v in a fixed binary tree (helper, exposed for the
// deterministic accumulation paths elsewhere).
double pairwise_sum(std::vector<double>& v);

struct ConvergenceRow {
  double h;
  double value;
  double order;         // empirical order vs the two previous rows (NaN first two)
  double extrapolated;  // Richardson extrapolate (NaN until computable)
  bool monotone;        // differences so far have a consistent sign
};

// Evaluate value_at_h over hs (each entry should roughly halve) and report
// empirical order and extrapolated limit.
std::vector<ConvergenceRow> convergence_study(const std::function<double(double)>& value_at_h,
                                              const std::vector<double>& hs);

namespace detail {

// Expand one top-level cell pair into its quadrature evaluations, calling
// emit(x, y, w) in a fixed order.  'rel' is the per-axis integer lattice
// offset between the cells when the grids share a lattice; nullptr means
// unrelated lattices (no refinement).
void expand_pair(const Grid& gx, const Grid& gy, size_t ia, size_t ib, bool same_grid,
                 const int* rel, int depth_limit,
                 const std::function<void(const Vec&, const Vec&, double)>& emit);

// Integer lattice offset of gy relative to gx (valid when same_lattice).
std::array<int, kMaxDim> lattice_offset(const Grid& gx, const Grid& gy);

}  // namespace detail

}  // namespace fracorn
