#pragma once

// Scalar functionals of vector fields: the Gagliardo seminorm, the
// projected seminorm (two equivalent kernel forms), Lp norms, the weighted
// boundary-distance (Hardy) integral, the bond-based peridynamic energy,
// the cutoff-product localization ratio, and the boundary-distance decay
// profile of the mirrored-kernel integral.

#include <optional>
#include <utility>
#include <vector>

#include "fracorn/fields.hpp"
#include "fracorn/geometry.hpp"
#include "fracorn/grid.hpp"
#include "fracorn/quadrature.hpp"

namespace fracorn {

struct FracParams {
  double s;
  double p;
  int n = 2;

  FracParams(double s_, double p_, int n_ = 2);
  // -1 / 0 / +1 for ps < 1, ps = 1, ps > 1 (tolerance 1e-12)
  int regime() const;
};

struct SeminormResult {
  double value;        // raw_p_power^{1/p}
  double raw_p_power;  // the double integral itself
  double h;
  FracParams params;
};

enum class ProjectedForm {
  normalized,    // |(du)·e|^p with e the unit direction, exponent n+ps
  unnormalized,  // |(du)·(y-x)|^p, exponent n+(s+1)p
};

SeminormResult gagliardo(const VectorField& u, const Grid& grid, const FracParams& par,
                         int refine_depth = 4);
SeminormResult projected(const VectorField& u, const Grid& grid, const FracParams& par,
                         ProjectedForm form = ProjectedForm::normalized, int refine_depth = 4);

// Cell-weighted Lp norm (the norm, not its p-th power).
double lp_norm(const VectorField& u, const Grid& grid, double p);

// Bond-based energy with weight rho(xi) = |xi|^{-n-2(s-1)}; computed as an
// independent code path and equal to the raw projected p-power at p=2.
double perienergy(const VectorField& u, const Grid& grid, double s);

// Weighted boundary-distance integral
//   int_D |u_n(x', f+lam(x_n-f)) - u_n(x', f+mu(x_n-f))|^p / |x_n-f|^{ps} dx.
// When a composed point leaves the field's native box the window is grown
// by a factor of 2, at most max_enlarge times, before giving up.
struct HardyOptions {
  int max_enlarge = 3;
};
struct HardyResult {
  double lhs = 0.0;
  double projected_raw = 0.0;
  double ratio = 0.0;
  bool infinite_flag = false;  // projected_raw below the division guard
  int enlargements = 0;        // window growth retries that were needed
};

double hardy_lhs(const VectorField& u, const LipschitzFn& f, double lam, double mu,
                 const Grid& grid, const FracParams& par, const HardyOptions& opt = {},
                 int* enlargements_out = nullptr);
HardyResult hardy_ratio(const VectorField& u, const LipschitzFn& f, double lam, double mu,
                        const Grid& grid, const FracParams& par, const HardyOptions& opt = {});

// Localization quotient [psi*u]_X(window) / (||psi||_W1inf * (||u||_Lp + [u]_X)),
// the cutoff product extended by zero outside its support.
struct ProductRatioResult {
  double ratio = 0.0;
  double product_proj = 0.0;  // [psi*u]_X on the window (value, not power)
  double u_proj = 0.0;
  double u_lp = 0.0;
  double psi_w1inf = 0.0;
  bool infinite_flag = false;
};
ProductRatioResult product_ratio(const CutoffFn& psi, const VectorField& u, const Grid& grid_u,
                                 const Grid& grid_window, const FracParams& par);

// Decay profile of I(z) = int_D |z-y|^p / |Phi_lam^{-1}(z)-y|^{n+p+ps} dy
// against the boundary distance |z_n - f(z')|; the fitted log-log slope is
// compared with -ps downstream.
struct DecaySample {
  Vec z;
  double dist;
  double value;
};
std::vector<DecaySample> mirror_decay_profile(const LipschitzFn& f, double lam, const FracParams& par,
                                       const std::vector<Vec>& zs, const Grid& dgrid);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace fracorn
