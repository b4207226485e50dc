#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fracorn/core.hpp"
#include "fracorn/geometry.hpp"
#include "fracorn/grid.hpp"

using namespace fracorn;

namespace {

// Independent McShane oracle.  For piecewise-linear data the minimum of
// y -> f(y) + M |x - y| over [a, b] is attained at a breakpoint of the
// objective: a knot, an interval end, or x itself, so scanning those
// points is exact.
double mcshane_oracle(const LipschitzFn& f, double a, double b, double x,
                      const std::vector<double>& knots) {
  double M = f.lipschitz();
  std::vector<double> cand = knots;
  cand.push_back(a);
  cand.push_back(b);
  cand.push_back(std::min(std::max(x, a), b));
  double best = 1e300;
  for (double y : cand) {
    if (y < a || y > b) continue;
    best = std::min(best, f.eval1(y) + M * std::abs(x - y));
  }
  return best;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("mcshane extension matches the breakpoint oracle") {
  struct Case {
    LipschitzFn f;
    std::vector<double> knots;
  };
  std::vector<Case> cases;
  cases.push_back({LipschitzFn::constant(1, 0.0), {}});
  cases.push_back({LipschitzFn::affine({1.0}, 0.0), {}});
  cases.push_back({LipschitzFn::pwl({0.0, 0.5, 1.0}, {0.5, 0.0, 0.5}), {0.0, 0.5, 1.0}});
  cases.push_back({LipschitzFn::pwl({0.0, 0.2, 0.55, 0.8, 1.0}, {0.1, -0.3, 0.2, 0.15, -0.1}),
                   {0.0, 0.2, 0.55, 0.8, 1.0}});
  Rng rng(11);
  for (auto& c : cases) {
    LipschitzFn ext = c.f.mcshane_extend(0.0, 1.0);
    CHECK(ext.lipschitz() == doctest::Approx(c.f.lipschitz()).epsilon(1e-15));
    for (int i = 0; i < 200; ++i) {
      double x = rng.uniform(-3.0, 4.0);
      double want = mcshane_oracle(c.f, 0.0, 1.0, x, c.knots);
      CHECK(ext.eval1(x) == doctest::Approx(want).epsilon(1e-12));
    }
    // equals the original inside the restriction interval
    for (int i = 0; i < 50; ++i) {
      double x = rng.uniform(0.0, 1.0);
      CHECK(ext.eval1(x) == doctest::Approx(c.f.eval1(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mcshane hand values") {
  LipschitzFn zero = LipschitzFn::constant(1, 0.0).mcshane_extend(0.0, 1.0);
  CHECK(zero.eval1(-5.0) == doctest::Approx(0.0));
  CHECK(zero.eval1(7.0) == doctest::Approx(0.0));

  LipschitzFn lin = LipschitzFn::affine({1.0}, 0.0).mcshane_extend(0.0, 1.0);
  CHECK(lin.eval1(2.0) == doctest::Approx(2.0).epsilon(1e-14));

  LipschitzFn vee =
      LipschitzFn::pwl({0.0, 0.5, 1.0}, {0.5, 0.0, 0.5}).mcshane_extend(0.0, 1.0);
  CHECK(vee.eval1(-1.0) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("lipschitz function basics") {
  LipschitzFn aff = LipschitzFn::affine({0.6, -0.8}, 0.25);
  CHECK(aff.dim() == 2);
  CHECK(aff.lipschitz() == doctest::Approx(1.0).epsilon(1e-14));  // |(.6,-.8)| = 1
  Vec q = Vec(0.5, 0.25);
  CHECK(aff(q) == doctest::Approx(0.6 * 0.5 - 0.8 * 0.25 + 0.25).epsilon(1e-15));

  LipschitzFn pw = LipschitzFn::pwl({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0});
  CHECK(pw.lipschitz() == doctest::Approx(2.0));
  CHECK(pw.eval1(0.5) == doctest::Approx(1.0));
  CHECK(pw.eval1(1.5) == doctest::Approx(1.5));
  // outside knots: boundary slope continues
  CHECK(pw.eval1(-1.0) == doctest::Approx(-2.0));
  CHECK(pw.eval1(3.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(LipschitzFn::pwl({0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
}

TEST_CASE("analytic lipschitz validation") {
  auto fn = [](const Vec& x) { return std::sin(3.0 * x[0]); };
  Vec lo = Vec::zero(1), hi = Vec::zero(1);
  hi[0] = 1.0;
  LipschitzFn ok = LipschitzFn::analytic(1, fn, 3.0, lo, hi);
  CHECK(ok.lipschitz() == doctest::Approx(3.0));
  CHECK_THROWS_AS(LipschitzFn::analytic(1, fn, 1.0, lo, hi), ConfigError);
}

TEST_CASE("certified range bounds") {
  LipschitzFn aff = LipschitzFn::affine({0.5}, 0.1);
  Vec lo = Vec::zero(1), hi = Vec::zero(1);
  lo[0] = 0.2;
  hi[0] = 0.8;
  auto [mn, mx] = aff.range_on(lo, hi);
  CHECK(mn == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(mx == doctest::Approx(0.5).epsilon(1e-14));

  LipschitzFn vee = LipschitzFn::pwl({0.0, 0.5, 1.0}, {0.5, 0.0, 0.5});
  lo[0] = 0.0;
  hi[0] = 1.0;
  auto [vmn, vmx] = vee.range_on(lo, hi);
  CHECK(vmn == doctest::Approx(0.0));
  CHECK(vmx == doctest::Approx(0.5));
}

TEST_CASE("reflection maps: hand values, graph fixing, round trip") {
  PhiMap flat{LipschitzFn::affine({0.0}, 0.0), 1.0};
  Vec img = phi_forward(flat, Vec(0.3, -0.2));
  CHECK(img[0] == doctest::Approx(0.3));
  CHECK(img[1] == doctest::Approx(0.2).epsilon(1e-15));

  PhiMap tilt{LipschitzFn::affine({0.5}, 0.0), 2.0};
  Vec img2 = phi_forward(tilt, Vec(1.0, 0.0));
  CHECK(img2[0] == doctest::Approx(1.0));
  CHECK(img2[1] == doctest::Approx(1.5).epsilon(1e-14));

  // points on the graph stay put
  for (double t : {0.0, 0.3, 0.9}) {
    Vec on(t, tilt.f.eval1(t));
    Vec m = phi_forward(tilt, on);
    CHECK(m[1] == doctest::Approx(on[1]).epsilon(1e-14));
  }

  Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    Vec x(rng.uniform(-1.0, 1.0), 0.0);
    x[1] = tilt.f.eval1(x[0]) - rng.uniform(0.0, 2.0);
    Vec y = phi_forward(tilt, x);
    CHECK(y[1] >= tilt.f.eval1(y[0]) - 1e-12);
    Vec back = phi_inverse(tilt, y);
    CHECK((back - x).inftyNorm() < 1e-12);
  }
  CHECK(phi_jacobian(tilt) == doctest::Approx(-2.0));
}

TEST_CASE("graph-side family maps the epigraph into itself") {
  LipschitzFn f = LipschitzFn::affine({0.4}, -0.1);
  Rng rng(22);
  for (double lam : {0.25, 1.0, 3.0}) {
    for (int i = 0; i < 300; ++i) {
      Vec x(rng.uniform(-1.0, 1.0), 0.0);
      double above = rng.uniform(0.0, 2.0);
      x[1] = f.eval1(x[0]) + above;
      Vec y = phi_star(f, lam, x);
      CHECK(y[0] == doctest::Approx(x[0]));
      CHECK(y[1] - f.eval1(y[0]) == doctest::Approx(lam * above).epsilon(1e-12));
    }
  }
}

TEST_CASE("map gradient norms dominate sampled difference quotients") {
  PhiMap m{LipschitzFn::affine({0.0}, 0.0), 1.0};
  CHECK(phi_gradient_norm(m, 2) == doctest::Approx(std::sqrt(2.0)));
  PhiMap m2{LipschitzFn::affine({1.0}, 0.0), 2.0};
  CHECK(phi_gradient_norm(m2, 2) == doctest::Approx(std::sqrt(14.0)));
  CHECK(phi_inverse_gradient_norm(m, 2) == doctest::Approx(std::sqrt(2.0)));

  Rng rng(23);
  for (const PhiMap& mm : {m, m2}) {
    double bound = phi_gradient_norm(mm, 2);
    for (int i = 0; i < 2000; ++i) {
      Vec x(rng.uniform(-1.0, 1.0), 0.0), y(rng.uniform(-1.0, 1.0), 0.0);
      x[1] = mm.f.eval1(x[0]) - rng.uniform(0.0, 1.0);
      y[1] = mm.f.eval1(y[0]) - rng.uniform(0.0, 1.0);
      double num = (phi_forward(mm, x) - phi_forward(mm, y)).norm();
      double den = (x - y).norm();
      if (den > 1e-12) CHECK(num <= bound * den * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("distance-comparison ratio: hand value and proof bound") {
  LipschitzFn flat = LipschitzFn::affine({0.0}, 0.0);
  CHECK(mirror_distance_ratio(flat, 1.0, Vec(0.0, 1.0), Vec(0.0, 2.0)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(mirror_distance_ratio(flat, 1.0, Vec(0.5, 0.5), Vec(0.5, 0.5)) == 0.0);

  Rng rng(24);
  for (double M : {0.0, 0.5, 1.0}) {
    LipschitzFn f = M == 0.0 ? flat : LipschitzFn::affine({M}, 0.0);
    for (double lam : {0.5, 1.0, 2.0}) {
      double bound = mirror_distance_ratio_bound(M, lam);
      double sup = 0.0;
      for (int i = 0; i < 5000; ++i) {
        Vec x(rng.uniform(-1.0, 1.0), 0.0), y(rng.uniform(-1.0, 1.0), 0.0);
        x[1] = f.eval1(x[0]) + rng.uniform(1e-4, 2.0);
        y[1] = f.eval1(y[0]) + rng.uniform(1e-4, 2.0);
        sup = std::max(sup, mirror_distance_ratio(f, lam, x, y));
      }
      CHECK(sup <= bound * (1.0 + 1e-12));
      CHECK(sup > 0.0);
    }
  }
}

TEST_CASE("domain membership for every kind") {
  Domain box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 2.0));
  CHECK(box.contains(Vec(0.5, 1.9)));
  CHECK(!box.contains(Vec(0.5, 2.1)));

  LipschitzFn f = LipschitzFn::affine({0.5}, 0.1);
  Domain epi = Domain::epigraph(f, Vec(0.0, -1.0), Vec(1.0, 2.0));
  Domain hyp = Domain::hypograph(f, Vec(0.0, -1.0), Vec(1.0, 2.0));
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    Vec p(rng.uniform(0.0, 1.0), rng.uniform(-1.0, 2.0));
    bool above = p[1] > f.eval1(p[0]);
    CHECK(epi.contains(p) == above);
    CHECK(hyp.contains(p) == !above);
  }

  Domain half = Domain::halfspace(Vec(0.0, 0.0), Vec(1.0, 1.0));
  CHECK(half.contains(Vec(0.5, 0.5)));
  CHECK(!half.contains(Vec(0.5, -0.1)));

  Domain wedge = Domain::angular(1.0, 2.0);
  CHECK(wedge.contains(Vec(0.5, 1.0)));
  CHECK(!wedge.contains(Vec(0.5, 0.4)));   // below the graph line
  CHECK(!wedge.contains(Vec(-0.5, 1.0)));  // x1 < 0
  CHECK(!wedge.contains(Vec(1.5, 1.8)));   // outside the radius

  Domain tri = Domain::polygon({Vec(0.0, 0.0), Vec(1.0, 0.0), Vec(0.0, 1.0)});
  CHECK(tri.contains(Vec(0.25, 0.25)));
  CHECK(!tri.contains(Vec(0.75, 0.75)));
}

TEST_CASE("analytic volumes against grid measurements") {
  Domain box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 2.0));
  CHECK(box.volume().value() == doctest::Approx(2.0));

  Domain tri = Domain::polygon({Vec(0.0, 0.0), Vec(1.0, 0.0), Vec(0.0, 1.0)});
  CHECK(tri.volume().value() == doctest::Approx(0.5).epsilon(1e-14));

  // trapezoid under the tilted window top
  LipschitzFn f = LipschitzFn::affine({0.5}, 0.25);
  Domain epi = Domain::epigraph(f, Vec(0.0, 0.0), Vec(1.0, 2.0));
  double expect = 2.0 - (0.25 + 0.75) / 2.0;  // window minus the area below the graph
  CHECK(epi.volume().value() == doctest::Approx(expect).epsilon(1e-12));

  for (const Domain& d : {tri, epi}) {
    Grid g = Grid::make(d, 1.0 / 32);
    CHECK(g.total_volume() == doctest::Approx(d.volume().value()).epsilon(5e-3));
  }
}

TEST_CASE("grid construction basics") {
  Domain box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0));
  Grid g = Grid::make(box, 0.25);
  CHECK(g.cells().size() == 16);
  for (const auto& c : g.cells()) {
    CHECK(c.volume == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(!c.clipped);
    CHECK(box.contains(c.center));
  }
  CHECK(g.total_volume() == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(Grid::make(box, 0.5), ConfigError);  // fewer than 4 cells per axis

  Grid t = Grid::transformed(g, [](const Vec& x) { return Vec(x[0] + 1.0, x[1]); });
  CHECK(t.cells().size() == g.cells().size());
  for (size_t i = 0; i < t.cells().size(); ++i) {
    CHECK(t.cells()[i].clipped);
    CHECK(t.cells()[i].center[0] ==
          doctest::Approx(g.cells()[i].center[0] + 1.0).epsilon(1e-15));
    CHECK(t.cells()[i].volume == g.cells()[i].volume);
  }
}

TEST_CASE("clipped boundary cells carry interior centroids") {
  LipschitzFn f = LipschitzFn::affine({0.5}, 0.1);
  Domain epi = Domain::epigraph(f, Vec(0.0, 0.0), Vec(1.0, 1.0));
  Grid g = Grid::make(epi, 1.0 / 8);
  int clipped = 0;
  for (const auto& c : g.cells()) {
    CHECK(epi.contains(c.center));
    CHECK(c.volume > 0.0);
    if (c.clipped) ++clipped;
  }
  CHECK(clipped > 0);
  CHECK(g.total_volume() < 1.0);
}

TEST_CASE("epigraph whitney cover invariants") {
  for (double M : {0.0, 0.5}) {
    LipschitzFn f = M == 0.0 ? LipschitzFn::affine({0.0}, 0.0) : LipschitzFn::affine({M}, 0.0);
    Vec hi = M == 0.0 ? Vec(1.0, 1.0) : Vec(1.0, 1.5);
    WhitneyCover cov = WhitneyCover::epigraph(f, Vec(0.0, 0.0), hi);
    REQUIRE(!cov.cells().empty());
    CHECK(cov.shape() == WhitneyCover::Shape::cube);
    CHECK(cov.overlap_constant() >= 1);
    CHECK(cov.graph_reach_constant() >= 1.0);
    CHECK(cov.resolved_clearance() > 0.0);

    Rng rng(41);
    for (size_t k = 0; k < cov.cells().size(); ++k) {
      const WhitneyCell& cell = cov.cells()[k];
      // the whole cell keeps clearance at least half its side
      for (int t = 0; t < 30; ++t) {
        Vec p = cell.anchor;
        p[0] += rng.uniform() * cell.side;
        p[1] += rng.uniform() * cell.side;
        CHECK(cov.clearance(p) >= 0.5 * cell.side * (1.0 - 1e-12));
        CHECK(cov.cell_contains(k, p));
        auto own = cov.owner(p);
        REQUIRE(own.has_value());
        CHECK(*own == k);
      }
      // doubled cell stays inside the epigraph
      for (const Vec& corner : cov.doubled_corners(k)) CHECK(cov.clearance(corner) >= -1e-9);
      // measured overlap constant includes every cell center
      Vec ctr = cell.anchor;
      ctr[0] += 0.5 * cell.side;
      ctr[1] += 0.5 * cell.side;
      CHECK(cov.doubled_count(ctr) <= cov.overlap_constant());
    }
  }
}

TEST_CASE("angular whitney cover invariants") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    WhitneyCover cov = WhitneyCover::angular(alpha, 1.0);
    REQUIRE(!cov.cells().empty());
    CHECK(cov.shape() == WhitneyCover::Shape::parallelogram);
    // every parallelogram cell has pre-image clearance range [side, 2 side]
    Rng rng(42);
    int truncated = 0;
    for (size_t k = 0; k < cov.cells().size(); ++k) {
      const WhitneyCell& cell = cov.cells()[k];
      if (cell.truncated) ++truncated;
      for (int t = 0; t < 30; ++t) {
        double sa = rng.uniform(), sb = rng.uniform();
        Vec p = cell.anchor;
        p[0] += sa * cell.side;
        p[1] += sa * cell.side * alpha + sb * cell.side;
        double cl = cov.clearance(p);
        CHECK(cl >= cell.side * (1.0 - 1e-12));
        CHECK(cl <= 2.0 * cell.side * (1.0 + 1e-12));
        CHECK(cov.cell_contains(k, p));
        auto own = cov.owner(p);
        REQUIRE(own.has_value());
        CHECK(*own == k);
      }
      for (const Vec& corner : cov.doubled_corners(k)) {
        CHECK(corner[0] >= -1e-12);
        CHECK(cov.clearance(corner) >= -1e-12);
      }
    }
    CHECK(truncated > 0);  // the outer rows must cross the radius
  }
}

TEST_CASE("rigid vertex chart of a convex polygon") {
  Domain sq = Domain::polygon({Vec(0.0, 0.0), Vec(1.0, 0.0), Vec(1.0, 1.0), Vec(0.0, 1.0)});
  for (size_t j = 0; j < 4; ++j) {
    RigidChart ch = rigid_chart_map(sq, j);
    CHECK(ch.theta == doctest::Approx(1.5707963267948966).epsilon(1e-12));
    CHECK(ch.alpha == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ch.r == doctest::Approx(0.45).epsilon(1e-12));
    Vec at_origin = ch.apply(ch.vertex);
    CHECK(at_origin.inftyNorm() < 1e-14);

    Rng rng(51);
    for (int i = 0; i < 200; ++i) {
      // points near the vertex, inside the square, must land in the wedge
      Vec d(rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3));
      Vec p = ch.vertex;
      p[0] += (ch.vertex[0] == 0.0 ? d[0] : -d[0]);
      p[1] += (ch.vertex[1] == 0.0 ? d[1] : -d[1]);
      Vec w = ch.apply(p);
      CHECK(w[0] >= -1e-12);
      CHECK(w[1] >= ch.alpha * w[0] - 1e-12);
      Vec back = ch.apply_inverse(w);
      CHECK((back - p).inftyNorm() < 1e-12);
    }
  }
}

TEST_CASE("domain and cover validation errors") {
  CHECK_THROWS_AS(Domain::box(Vec(1.0, 0.0), Vec(0.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(Domain::angular(1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(Domain::polygon({Vec(0.0, 0.0), Vec(1.0, 0.0)}), ConfigError);
  // clockwise vertex order is rejected
  CHECK_THROWS_AS(Domain::polygon({Vec(0.0, 0.0), Vec(0.0, 1.0), Vec(1.0, 0.0)}), ConfigError);
}

}  // TEST_SUITE
