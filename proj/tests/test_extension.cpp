#include <cmath>
#include <vector>

#include "doctest.h"
#include "fracorn/core.hpp"
#include "fracorn/extension.hpp"
#include "fracorn/fields.hpp"
#include "fracorn/geometry.hpp"
#include "fracorn/grid.hpp"
#include "fracorn/seminorms.hpp"

using namespace fracorn;

namespace {

VectorField rtrig(int seed, int degree) {
  return field_library("random_trig",
                       {{"seed", double(seed)}, {"degree", double(degree)}}, 2);
}

}  // namespace

TEST_SUITE("extension") {

TEST_CASE("hand-picked delta gives exact rational coefficients") {
  ExtensionCoeffs c = coeffs_from_delta(0.5);
  CHECK(c.lambda == 0.5);
  CHECK(c.mu == 1.5);
  CHECK(c.k == 2.5);
  CHECK(c.l == -1.5);
  CHECK(c.m == -1.25);
  CHECK(c.q == 2.25);
  for (double r : c.constraint_residuals()) CHECK(r == 0.0);  // dyadic data, exact algebra
}

TEST_CASE("solved coefficients satisfy the constraints for random slopes") {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    double M = rng.uniform(0.0, 5.0);
    DeltaVariant v = (i % 2 == 0) ? DeltaVariant::two_plus_M : DeltaVariant::one_plus_M;
    ExtensionCoeffs c = solve_coefficients(M, 2, 1.0, v);
    CAPTURE(M);
    CHECK(c.delta > 0.0);
    CHECK(c.delta <= 0.5);
    CHECK(c.lambda == doctest::Approx(1.0 - c.delta).epsilon(1e-15));
    CHECK(c.mu == doctest::Approx(1.0 + c.delta).epsilon(1e-15));
    for (double r : c.constraint_residuals()) CHECK(std::abs(r) < 1e-14);
    CHECK(c.k > 0.0);
    CHECK(c.l < 0.0);
    CHECK(std::abs(c.angular_residual(1.7)) < 1e-13);
  }
  // the narrower-slope variant allows a larger reflection depth
  CHECK(solve_coefficients(1.0, 2, 1.0, DeltaVariant::one_plus_M).delta >
        solve_coefficients(1.0, 2, 1.0, DeltaVariant::two_plus_M).delta);
}

TEST_CASE("coefficient validation") {
  CHECK_THROWS_AS(coeffs_from_delta(0.0), ConfigError);
  CHECK_THROWS_AS(coeffs_from_delta(0.6), ConfigError);
  CHECK_THROWS_AS(solve_coefficients(-1.0, 2), ConfigError);
}

TEST_CASE("hand extension value below a flat graph") {
  // u = (0, x2), f = 0, delta = 1/2: the normal part reflects to
  // m*lam*t + q*mu*t = 2.75 t at depth t.
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.0}, 0.0);
  VectorField u = field_library("monomial", {{"comp", 2.0}, {"k1", 0.0}, {"k2", 1.0}}, 2);
  ExtensionCoeffs c = coeffs_from_delta(0.5);
  Vec v = extend_epigraph(u, f, c, Vec(0.3, -0.25));
  CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(2.75 * 0.25).epsilon(1e-15));
}

TEST_CASE("extension is the identity on the closed epigraph") {
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.5}, 0.1);
  VectorField u = rtrig(601, 3);
  ExtensionCoeffs c = solve_coefficients(0.5, 2);
  Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    double x1 = rng.uniform(-1.0, 2.0);
    double x2 = f.eval1(x1) + rng.uniform(0.0, 1.5);
    Vec x(x1, x2);
    Vec e = extend_epigraph(u, f, c, x);
    Vec exact = u(x);
    CHECK(std::abs(e[0] - exact[0]) <= 1e-15 * (1.0 + std::abs(exact[0])));
    CHECK(std::abs(e[1] - exact[1]) <= 1e-15 * (1.0 + std::abs(exact[1])));
  }
}

TEST_CASE("constants extend to constants") {
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{-0.3}, 0.2);
  VectorField u = field_library("constant", {{"c1", 0.7}, {"c2", -0.3}}, 2);
  ExtensionCoeffs c = solve_coefficients(0.3, 2);
  Rng rng(53);
  for (int i = 0; i < 50; ++i) {
    Vec x(rng.uniform(-1.0, 1.0), 0.0);
    x[1] = f.eval1(x[0]) - rng.uniform(0.01, 2.0);
    Vec e = extend_epigraph(u, f, c, x);
    CHECK(e[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(e[1] == doctest::Approx(-0.3).epsilon(1e-14));
  }
}

TEST_CASE("wedge and graph variants agree when the second component vanishes") {
  double alpha = 1.0;
  ExtensionCoeffs c = solve_coefficients(alpha, 2);
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{alpha}, 0.0);
  VectorField u = field_library("trig", {{"comp", 1.0}, {"d1", 2.0}, {"d2", 1.0}, {"amp", 0.8}}, 2);
  Rng rng(54);
  for (int i = 0; i < 50; ++i) {
    double x1 = rng.uniform(0.05, 1.0);
    double x2 = alpha * x1 - rng.uniform(0.01, 0.8);
    Vec x(x1, x2);
    Vec a = extend_angular(u, alpha, c, x);
    Vec e = extend_epigraph(u, f, c, x);
    CHECK(a[0] == doctest::Approx(e[0]).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(e[1]).epsilon(1e-14));
  }
}

TEST_CASE("the shear correction term is active for general fields") {
  double alpha = 1.0;
  ExtensionCoeffs c = solve_coefficients(alpha, 2);
  VectorField u = field_library("trig", {{"comp", 2.0}, {"d1", 1.0}, {"d2", 2.0}}, 2);
  // below the diagonal, inside the first quadrant, away from the cosine zero line
  Vec x(0.3, 0.05);
  Vec with = extend_angular(u, alpha, c, x, false);
  Vec without = extend_angular(u, alpha, c, x, true);
  CHECK(std::abs(with[0] - without[0]) > 1e-12);
  CHECK(with[1] == doctest::Approx(without[1]).epsilon(1e-15));  // only the first component corrects
}

TEST_CASE("cross-term algebra cancels sample by sample") {
  VectorField u = rtrig(602, 3);
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.5}, 0.2);
  ExtensionCoeffs c = solve_coefficients(0.5, 2);
  auto samples = mixed_term_cancellation(u, f, c, Vec(0.0, -0.8), Vec(1.0, 0.19), Vec(0.0, 0.71),
                                         Vec(1.0, 1.5), 1000, 603);
  REQUIRE(samples.size() == 1000);
  for (const auto& smp : samples) {
    CHECK(smp.three_term_rel < 1e-12);
    CHECK(smp.decomp_rel < 1e-12);
    CHECK(smp.three_term_sum == doctest::Approx(smp.t1 + smp.t2 + smp.t3).epsilon(1e-15));
  }
}

TEST_CASE("mixed split integrals obey the triangle inequality") {
  VectorField u = rtrig(604, 2);
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.5}, 0.2);
  ExtensionCoeffs c = solve_coefficients(0.5, 2);
  Grid below = Grid::make(Domain::box(Vec(0.0, -0.75), Vec(1.0, 0.15)), 1.0 / 8);
  Grid dom = Grid::make(Domain::box(Vec(0.0, 0.75), Vec(1.0, 1.55)), 1.0 / 8);
  FracParams par(0.4, 2.0);
  MixedSplitIntegrals mi = mixed_split_integrals(u, f, c, below, dom, par);
  CHECK(mi.i_mixed >= 0.0);
  CHECK(mi.i1 >= 0.0);
  CHECK(mi.i2 >= 0.0);
  CHECK(mi.i3 >= 0.0);
  double ip = 1.0 / par.p;
  CHECK(std::pow(mi.i_mixed, ip) <=
        (std::pow(mi.i1, ip) + std::pow(mi.i2, ip) + std::pow(mi.i3, ip)) * (1.0 + 1e-12));
}

TEST_CASE("operator norm ratio is finite for smooth fields") {
  VectorField u = rtrig(605, 2);
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.3}, 0.1);
  ExtensionCoeffs c = solve_coefficients(0.3, 2);
  Grid below = Grid::make(Domain::box(Vec(0.0, -0.9), Vec(1.0, 0.09)), 1.0 / 10);
  Grid dom = Grid::make(Domain::box(Vec(0.0, 0.41), Vec(1.0, 1.4)), 1.0 / 10);
  FracParams par(0.5, 2.0);
  ExtensionRatioResult r = extension_norm_ratio_epigraph(u, f, c, dom, below, par);
  CHECK(!r.infinite_flag);
  CHECK(r.ratio > 0.0);
  CHECK(std::isfinite(r.ratio));
  // the cross region enters twice: (below x above) and its transpose
  CHECK(r.split.total ==
        doctest::Approx(r.split.part_domain + r.split.part_below + 2.0 * r.split.part_mixed)
            .epsilon(1e-12));
  CHECK(r.extension_norm == doctest::Approx(std::pow(r.split.total, 0.5)).epsilon(1e-12));
  double M = c.M;
  double w1 = std::pow(1.0 + M, 2.0 + 2.0 / (2.0 * par.p)) * M;
  double w2 = std::pow(1.0 + M, 1.0 + 2.0 * par.p) * M;
  CHECK(r.denom == doctest::Approx(r.u_proj + w1 * r.u_companion).epsilon(1e-12));
  CHECK(r.denom_alt == doctest::Approx(r.u_proj + w2 * r.u_companion).epsilon(1e-12));
  CHECK(r.ratio == doctest::Approx(r.extension_norm / r.denom).epsilon(1e-12));
}

TEST_CASE("rigid input over a flat graph flags the vanishing denominator") {
  RigidMotion rot;
  rot.a = {1.0, 0.0, 0.0};
  rot.b = Vec(0.0, 0.0);
  LipschitzFn f = LipschitzFn::affine(std::vector<double>{0.0}, 0.0);
  ExtensionCoeffs c = coeffs_from_delta(0.5);
  Grid below = Grid::make(Domain::box(Vec(0.0, -1.0), Vec(1.0, 0.0)), 1.0 / 8);
  Grid dom = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 8);
  ExtensionRatioResult r =
      extension_norm_ratio_epigraph(rot.as_field(), f, c, dom, below, FracParams(0.5, 2.0));
  CHECK(r.infinite_flag);
}

TEST_CASE("wedge ratio uses the lp companion norm") {
  double alpha = 1.0;
  ExtensionCoeffs c = solve_coefficients(alpha, 2);
  VectorField u = field_library("trig", {{"comp", 1.0}, {"d1", 1.0}, {"d2", 1.0}}, 2);
  Grid dom = Grid::make(Domain::angular(alpha, 1.0), 1.0 / 10);
  Grid below = Grid::make(Domain::box(Vec(0.1, -0.8), Vec(0.9, 0.05)), 1.0 / 10);
  FracParams par(0.5, 2.0);
  ExtensionRatioResult r = extension_norm_ratio_angular(u, alpha, c, dom, below, par);
  CHECK(!r.infinite_flag);
  CHECK(r.denom == doctest::Approx(r.u_proj + r.u_companion).epsilon(1e-12));
  CHECK(r.ratio == doctest::Approx(r.ratio_alt).epsilon(1e-15));
  double ii = ii_new_ratio(u, alpha, c, below, dom, par);
  CHECK(ii >= 0.0);
  CHECK(std::isfinite(ii));
}

}  // TEST_SUITE
