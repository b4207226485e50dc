#pragma once

// Reflection-type extension operators across a Lipschitz graph: two scaled
// pullbacks with matched coefficients, a wedge variant with a shear
// correction term, and the operator-norm ratio measurements.

#include <array>
#include <cstdint>
#include <vector>

#include "fracorn/fields.hpp"
#include "fracorn/geometry.hpp"
#include "fracorn/grid.hpp"
#include "fracorn/seminorms.hpp"

namespace fracorn {

enum class DeltaVariant {
  two_plus_M,  // delta = 1 / (2 c2 sqrt(n) (2+M)), the default
  one_plus_M,  // delta = 1 / (2 c2 sqrt(n) (1+M))
};

struct ExtensionCoeffs {
  int n = 2;
  double M = 0.0;
  double c2 = 1.0;
  double delta = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double k = 0.0;
  double l = 0.0;
  double m = 0.0;
  double q = 0.0;
  DeltaVariant variant = DeltaVariant::two_plus_M;

  // {k+l-1, m+q-1, lambda*k+m, mu*l+q}; all must vanish to roundoff.
  std::array<double, 4> constraint_residuals() const;
  // alpha*k*(1+lambda) + alpha*l*(1+mu), the wedge-variant matching residual.
  double angular_residual(double alpha) const;
};

ExtensionCoeffs solve_coefficients(double M, int n, double c2 = 1.0,
                                   DeltaVariant variant = DeltaVariant::two_plus_M);
// Test hook: build the coefficient set directly from a chosen delta in (0, 1/2].
ExtensionCoeffs coeffs_from_delta(double delta, int n = 2, double M = 0.0);

// Pointwise evaluation. Points on or above the graph return u(x); points
// below are filled in from the two reflected pullbacks.
Vec extend_epigraph(const VectorField& u, const LipschitzFn& f, const ExtensionCoeffs& c,
                    const Vec& x);
// Wedge {x1 > 0, alpha*x1 < x2} in the plane; the first component carries the
// shear correction term. drop_alpha_term is a test hook that deletes it.
Vec extend_angular(const VectorField& u, double alpha, const ExtensionCoeffs& c, const Vec& x,
                   bool drop_alpha_term = false);

VectorField extension_field_epigraph(const VectorField& u, LipschitzFn f,
                                     const ExtensionCoeffs& c);
VectorField extension_field_angular(const VectorField& u, double alpha, const ExtensionCoeffs& c,
                                    bool drop_alpha_term = false);

// The three-part split of the extended-window seminorm power:
//   [E(u)]^p = (above x above) + (below x below) + 2 (below x above).
struct ExtensionSplit {
  double part_domain = 0.0;  // raw p-power over D x D, where E(u) = u
  double part_below = 0.0;   // over D_- x D_-
  double part_mixed = 0.0;   // the cross integral over D_- x D
  double total = 0.0;
};

struct ExtensionRatioResult {
  ExtensionSplit split;
  double extension_norm = 0.0;  // split.total^{1/p}
  double u_proj = 0.0;          // [u]_X on D
  double u_companion = 0.0;     // |u|_W (epigraph) or ||u||_Lp (wedge)
  double denom = 0.0;
  double denom_alt = 0.0;
  double ratio = 0.0;
  double ratio_alt = 0.0;  // alternate companion-norm weight; equals ratio for the wedge
  bool infinite_flag = false;
};

// denom     = [u]_X + (1+M)^{2 + n/(2p)} M |u|_W
// denom_alt = [u]_X + (1+M)^{n/2 + 2p}  M |u|_W
ExtensionRatioResult extension_norm_ratio_epigraph(const VectorField& u, const LipschitzFn& f,
                                                   const ExtensionCoeffs& c,
                                                   const Grid& grid_domain,
                                                   const Grid& grid_below, const FracParams& par);
// denom = denom_alt = [u]_X + ||u||_Lp
ExtensionRatioResult extension_norm_ratio_angular(const VectorField& u, double alpha,
                                                  const ExtensionCoeffs& c,
                                                  const Grid& grid_domain, const Grid& grid_below,
                                                  const FracParams& par,
                                                  bool drop_alpha_term = false);

// Cross integral of the wedge shear term against the domain seminorm power:
//   II = int_{D_- x D} |(u_2^lam(x) - u_2^mu(x)) (x_1 - y_1)|^p / |x-y|^{2+p+ps},
// returned as II / [u]_X^p.
double ii_new_ratio(const VectorField& u, double alpha, const ExtensionCoeffs& c,
                    const Grid& grid_below, const Grid& grid_domain, const FracParams& par);

// Sampled check of the cross-term algebra for x below the graph, y above:
//   (E(u)(x) - u(y)) . (x - y)  =  k (u^lam - u(y)) . (Phi_lam x - y)
//                               +  l (u^mu  - u(y)) . (Phi_mu x - y)
//                               +  (k - m)(u_n^lam - u_n^mu)(y_n - f(x'))
// and the three residual terms t1, t2, t3 that add up to zero.
struct MixedTermSample {
  Vec x;
  Vec y;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double three_term_sum = 0.0;
  double three_term_rel = 0.0;  // |sum| / max |t_i|
  double decomp_lhs = 0.0;
  double decomp_rhs = 0.0;
  double decomp_rel = 0.0;
};
std::vector<MixedTermSample> mixed_term_cancellation(const VectorField& u, const LipschitzFn& f,
                                                     const ExtensionCoeffs& c, const Vec& lo_below,
                                                     const Vec& hi_below, const Vec& lo_dom,
                                                     const Vec& hi_dom, int pairs, uint64_t seed);

// Diagnostic integrals of the three main decomposition pieces over the same
// cross region, with the mixed integral itself for comparison: by the
// triangle inequality i_mixed^{1/p} <= i1^{1/p} + i2^{1/p} + i3^{1/p}.
struct MixedSplitIntegrals {
  double i_mixed = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
};
MixedSplitIntegrals mixed_split_integrals(const VectorField& u, const LipschitzFn& f,
                                          const ExtensionCoeffs& c, const Grid& grid_below,
                                          const Grid& grid_domain, const FracParams& par);

}  // namespace fracorn
