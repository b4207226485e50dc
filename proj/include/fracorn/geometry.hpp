#pragma once

// Geometry layer: Lipschitz graph functions (with McShane extension),
// computational domains, the below-graph <-> domain maps Phi_eta and the
// graph-side family Phi*_lambda, Whitney-type covers of epigraphs and
// angular domains, rigid vertex charts for convex polygons, and the
// distance-comparison ratio |x-y| / |Phi_lambda^{-1}(x)-y|.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracorn/core.hpp"

namespace fracorn {

// ------------------------------------------------------------ LipschitzFn --
// A Lipschitz function f : R^{dim} -> R (dim = n-1 for graphs in R^n),
// carrying a certified Lipschitz constant M.  Three representations:
//   affine      f(x') = a . x' + b          (M = |a| exactly)
//   pwl         piecewise linear, dim == 1  (M = max slope exactly)
//   analytic    arbitrary callable with a caller-supplied M, validated by
//               dense sampling at construction
class LipschitzFn {
 public:
  enum class Kind { affine, pwl, analytic };

  static LipschitzFn affine(const std::vector<double>& a, double b);
  static LipschitzFn constant(int dim, double c);
  // breakpoints xs strictly increasing; function is linear between them and
  // extended with the boundary slopes clamped to +-M outside.
  static LipschitzFn pwl(const std::vector<double>& xs, const std::vector<double>& ys);
  // callable validated against claimed M by difference quotients on
  // sample_box (pairs of dense samples); throws ConfigError on violation.
  static LipschitzFn analytic(int dim, std::function<double(const Vec&)> fn, double M,
                              const Vec& sample_lo, const Vec& sample_hi,
                              const std::string& name = "analytic");

  double operator()(const Vec& xp) const;
  double eval1(double t) const;  // dim == 1 convenience

  int dim() const { return dim_; }
  double lipschitz() const { return M_; }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  // Certified bounds of f over the box [lo, hi] (dim-dimensional):
  // first <= min f, second >= max f.  Exact for affine/pwl, sampled with a
  // Lipschitz cushion for analytic.
  std::pair<double, double> range_on(const Vec& lo, const Vec& hi) const;

  // McShane extension of the restriction of *this (dim == 1) to [a, b]:
  // ftilde(x) = min over native y of (f(y) + M |x - y|).  Equals f on
  // [a, b], globally M-Lipschitz.
  LipschitzFn mcshane_extend(double a, double b) const;

 private:
  LipschitzFn() = default;
  Kind kind_ = Kind::affine;
  int dim_ = 1;
  double M_ = 0.0;
  std::string name_ = "affine";
  std::vector<double> coef_;           // affine: a (size dim_), then b
  std::vector<double> xs_, ys_;        // pwl nodes
  std::function<double(const Vec&)> fn_;  // analytic
};

// ----------------------------------------------------------------- Domain --
// Region in R^n with membership predicate, analytic volume where the kind
// allows one, and a bounding box for grid construction.
class Domain {
 public:
  enum class Kind { box, epigraph, hypograph, halfspace, angular, polygon };

  static Domain box(const Vec& lo, const Vec& hi);
  // {x in window : x_n > f(x')}
  static Domain epigraph(LipschitzFn f, const Vec& window_lo, const Vec& window_hi);
  // {x in window : x_n < f(x')} -- the below-graph region D_-
  static Domain hypograph(LipschitzFn f, const Vec& window_lo, const Vec& window_hi);
  // {x in window : x_n > 0}
  static Domain halfspace(const Vec& window_lo, const Vec& window_hi);
  // {0 < x_1, alpha x_1 < x_2} intersected with the ball of given radius
  static Domain angular(double alpha, double radius);
  // strictly convex polygon, CCW vertices
  static Domain polygon(const std::vector<Vec>& vertices);

  int n() const { return n_; }
  Kind kind() const { return kind_; }
  bool contains(const Vec& x) const;
  std::pair<Vec, Vec> bounding_box() const;
  // Analytic (or nearly: affine-epigraph column integral) volume where the
  // kind allows one.
  std::optional<double> volume() const;

  const LipschitzFn& graph() const;  // epigraph/halfspace only
  double alpha() const { return alpha_; }
  double radius() const { return radius_; }
  const std::vector<Vec>& vertices() const { return verts_; }

 private:
  Domain() = default;
  Kind kind_ = Kind::box;
  int n_ = 2;
  Vec lo_, hi_;
  std::shared_ptr<LipschitzFn> f_;
  double alpha_ = 0.0, radius_ = 0.0;
  std::vector<Vec> verts_;
};

// ----------------------------------------------------------------- PhiMap --
// Phi_eta maps the sub-graph region D_- = {x_n < f(x')} onto the epigraph
// D = {x_n > f(x')}:   Phi_eta(x) = (x', f(x') + eta (f(x') - x_n)).
// Its inverse maps D back below the graph.  The graph-side family
// Phi*_lambda(x) = (x', f(x') + lambda (x_n - f(x'))) maps D into itself
// for lambda > 0.
struct PhiMap {
  LipschitzFn f;
  double eta;
};

Vec phi_forward(const PhiMap& m, const Vec& x);   // D_-  -> D
Vec phi_inverse(const PhiMap& m, const Vec& y);   // D    -> D_-
Vec phi_star(const LipschitzFn& f, double lambda, const Vec& x);  // D -> D

// Frobenius-norm bounds of the differentials and the Jacobian determinant.
double phi_gradient_norm(const PhiMap& m, int n);
double phi_inverse_gradient_norm(const PhiMap& m, int n);
double phi_jacobian(const PhiMap& m);

// Ratio |x - y| / |Phi_lambda^{-1}(x) - y| for x, y in the epigraph of f.
// Returns 0 for coincident inputs.
double mirror_distance_ratio(const LipschitzFn& f, double lambda, const Vec& x, const Vec& y);
// Closed-form upper bound for the ratio, depending only on (M, lambda).
double mirror_distance_ratio_bound(double M, double lambda);

// ----------------------------------------------------------- WhitneyCover --
// Cover of an epigraph (axis cubes) or an angular domain (sheared
// parallelograms, cube pre-images) by disjoint cells whose doubled
// versions stay inside the untruncated domain with bounded overlap, and
// whose c2-enlargement reaches the graph.
struct WhitneyCell {
  Vec anchor;      // lower corner (cube) / pre-image lower corner mapped, see shape
  double side;     // cube side / pre-image side a_k
  int generation;  // side = 2^{generation} * base scale
  bool truncated;  // crosses the truncation window / radius
};

class WhitneyCover {
 public:
  enum class Shape { cube, parallelogram };

  // Dyadic cube cover of {x in window : x_n > f(x')}.  Cells are accepted
  // when their certified vertical clearance above the graph is at least
  // accept_factor * side; max_gen bounds the dyadic depth.
  static WhitneyCover epigraph(const LipschitzFn& f, const Vec& window_lo,
                               const Vec& window_hi, int max_gen = 7);
  // Row construction for {0 < x_1, alpha x_1 < x_2}: pre-image cubes
  // [i a, (i+1) a] x [a, 2a] with a = 2^k, sheared by (x1, s) -> (x1, s + alpha x1),
  // rows k_hi down to k_hi - gens + 1 within the truncation radius.
  static WhitneyCover angular(double alpha, double radius, int gens = 6);

  const std::vector<WhitneyCell>& cells() const { return cells_; }
  Shape shape() const { return shape_; }
  int n() const { return n_; }
  double alpha() const { return alpha_; }

  // measured constants
  int overlap_constant() const { return c1_; }        // max per-point doubled-cell count
  double graph_reach_constant() const { return c2_; } // max over cells of minimal enlargement meeting the graph

  // Vertical clearance below which coverage is not certified (unresolved
  // sliver next to the graph at the deepest generation).
  double resolved_clearance() const { return resolved_clearance_; }

  bool cell_contains(size_t k, const Vec& p) const;     // closed cell
  bool doubled_contains(size_t k, const Vec& p) const;  // cube: concentric 2x; pgram: positive-direction 2x
  // Doubled-cell corners, for inclusion checks.
  std::vector<Vec> doubled_corners(size_t k) const;
  // Owning cell of p (closed cells; ties on shared faces resolved toward
  // the lexicographically smallest anchor).
  std::optional<size_t> owner(const Vec& p) const;
  // Number of doubled cells containing p.
  int doubled_count(const Vec& p) const;
  // Vertical clearance of p over the graph (epigraph: x_n - f(x'); angular: x_2 - alpha x_1).
  double clearance(const Vec& p) const;

 private:
  WhitneyCover() = default;
  void measure_constants(uint64_t seed);

  Shape shape_ = Shape::cube;
  int n_ = 2;
  std::vector<WhitneyCell> cells_;
  std::shared_ptr<LipschitzFn> f_;
  double alpha_ = 0.0;
  Vec win_lo_, win_hi_;
  double radius_ = 0.0;
  int c1_ = 0;
  double c2_ = 0.0;
  double resolved_clearance_ = 0.0;
};

// ------------------------------------------------------- rigid vertex map --
// Euclidean motion T(x) = R (x - y_j) taking polygon vertex y_j to the
// origin and the interior wedge at y_j onto {x_1 > 0, alpha x_1 < x_2}.
struct RigidChart {
  Vec vertex;
  double rot[2][2];
  double alpha;   // cot of the interior angle
  double theta;   // interior angle
  double r;       // chart ball radius (0.45 * min adjacent edge length)
  Vec apply(const Vec& x) const;
  Vec apply_inverse(const Vec& x) const;
};

RigidChart rigid_chart_map(const Domain& polygon, size_t vertex_index);

}  // namespace fracorn
