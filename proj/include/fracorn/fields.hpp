#pragma once

// Vector fields on R^n (immutable), infinitesimal rigid motions stored by
// their skew parameters, a small whitelist library of named analytic
// fields, smooth cutoff partitions subordinate to ball covers, and the
// cosine mode sets used by the constant estimators.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracorn/core.hpp"
#include "fracorn/geometry.hpp"

namespace fracorn {

class CutoffFn;

class VectorField {
 public:
  static VectorField analytic(int n, std::function<Vec(const Vec&)> fn, std::string name);
  // Values on the nodes of a regular lattice over [lo, hi] (counts[i] nodes
  // per axis), multilinear interpolation in between; evaluation outside the
  // box is a domain error.
  static VectorField grid_sampled(int n, const Vec& lo, const Vec& hi,
                                  const std::vector<int>& counts,
                                  std::vector<Vec> node_values, std::string name = "grid");
  static VectorField linear_combination(std::vector<VectorField> fields,
                                        std::vector<double> coefs);
  // Restriction to a box: evaluating outside throws, and enlarge() returns
  // a wider restriction (the window-growth hook of the Hardy functional).
  static VectorField windowed(VectorField inner, const Vec& lo, const Vec& hi);
  // psi * u, extended by zero outside the support of psi.
  static VectorField cutoff_product(const CutoffFn& psi, VectorField u);

  Vec operator()(const Vec& x) const;
  int n() const { return n_; }
  const std::string& name() const { return name_; }
  // Box outside which evaluation fails (grid_sampled / windowed), if any.
  std::optional<std::pair<Vec, Vec>> native_box() const;
  // Windowed fields can re-window by the given linear factor about the box
  // center; other bounded kinds cannot (ConfigError).
  VectorField enlarged(double factor) const;

 private:
  int n_ = 0;
  std::string name_;
  std::function<Vec(const Vec&)> fn_;
  std::optional<std::pair<Vec, Vec>> box_;
  std::shared_ptr<const VectorField> inner_;  // windowed only
};

// u(x) = A x + b with A skew; n = 2 stores a = (A12), n = 3 stores
// (A12, A13, A23).
struct RigidMotion {
  int n = 2;
  std::array<double, 3> a{};
  Vec b;

  Vec apply(const Vec& x) const;
  VectorField as_field() const;
  static RigidMotion random(int n, Rng& rng);
};

// Named analytic fields; the whitelist keeps configs serializable.
//   identity            u(x) = x
//   zero                u(x) = 0
//   constant            u(x) = (c1, .., cn)
//   shear               u(x) = (x2, 0, ...)
//   monomial            u(x) = e_comp * prod x_i^{k_i}   (params comp, k1, k2, ...)
//   trig                u(x) = e_comp * prod cos(pi d_i (x_i - lo_i) / (hi_i - lo_i))
//   random_trig         seeded combination of trig modes up to 'degree'
//   grad_bump           gradient of exp(-1/(1 - |x-c|^2/r^2))
VectorField field_library(const std::string& name, const std::map<std::string, double>& params,
                          int n);

// ---------------------------------------------------------------- cutoffs --
// Scalar C^infty functions with analytic gradients and reported
// W^{1,infty} data.
class CutoffFn {
 public:
  static CutoffFn radial_bump(const Vec& center, double support_radius);
  // 0 for t <= t0, 1 for t >= t1 along the given axis, smooth in between.
  static CutoffFn axis_ramp(int n, int axis, double t0, double t1);

  double operator()(const Vec& x) const { return val_(x); }
  Vec gradient(const Vec& x) const { return grad_(x); }
  int n() const { return n_; }
  double sup_value() const { return sup_val_; }
  double sup_gradient() const { return sup_grad_; }
  // ||.||_{W^{1,infty}} convention: sup|psi| + sup|grad psi|
  double w1inf() const { return sup_val_ + sup_grad_; }
  double support_margin() const { return margin_; }

  // internal: used by cutoff_partition to build normalized members
  static CutoffFn from_closures(int n, std::function<double(const Vec&)> v,
                                std::function<Vec(const Vec&)> g, double sup_v, double sup_g,
                                double margin);

 private:
  int n_ = 0;
  std::function<double(const Vec&)> val_;
  std::function<Vec(const Vec&)> grad_;
  double sup_val_ = 0, sup_grad_ = 0, margin_ = 0;
};

// Smooth partition of unity on omega subordinate to the balls
// B(centers[j], ball_radii[j]): raw bumps with the smaller support radii
// are normalized by their sum.  Validates that the bumps cover omega
// (dense samples; gap -> ConfigError).  Margins beta_j = ball - support
// radius are recorded per member; W^{1,infty} data is sampled on a dense
// grid of omega.
std::vector<CutoffFn> cutoff_partition(const Domain& omega, const std::vector<Vec>& centers,
                                       const std::vector<double>& ball_radii,
                                       const std::vector<double>& support_radii);

// -------------------------------------------------------------- mode sets --
// Tensor-product cosine modes per component over the box [lo, hi], ordered
// so that the first counts(k) fields span the degree-k set for every
// k <= K: [constants per component, rotation fields, modes of max-degree
// 1, 2, ..., K].  Rigid translations are the constant modes; appending the
// rotations makes the rigid class an exact sub-span.
struct BasisSet {
  int n = 2;
  int K = 0;
  Vec lo, hi;
  std::vector<VectorField> fields;
  std::vector<size_t> rigid_indices;     // constants + rotations
  std::vector<size_t> rotation_indices;  // skew generators only
  // number of leading fields forming the degree-k sub-basis
  size_t prefix_count(int k) const;
};

BasisSet make_basis(int n, int K, const Vec& lo, const Vec& hi);

}  // namespace fracorn
