#include "fracorn/acceptance.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "fracorn/extension.hpp"
#include "fracorn/korn.hpp"
#include "fracorn/report.hpp"
#include "fracorn/seminorms.hpp"

namespace fracorn {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CritCtx {
  std::vector<std::pair<std::string, double>>* log = nullptr;
  bool corrupt = false;
  std::shared_ptr<GramForms> deg4_forms;  // shared by the two constant criteria

  void rec(std::string k, double v) {
    if (log) log->emplace_back(std::move(k), v);
  }

  // degree-4 Gram forms on the unit square, h = 1/32, s = 1/2
  GramForms& deg4() {
    if (!deg4_forms) {
      BasisSet b = make_basis(2, 4, Vec(0.0, 0.0), Vec(1.0, 1.0));
      Grid g = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 32);
      deg4_forms = std::make_shared<GramForms>(assemble_gram(b, g, 0.5));
    }
    return *deg4_forms;
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(4) << v;
  return ss.str();
}

VectorField trig_field(int comp, double d1, double d2, double amp = 1.0) {
  return field_library(
      "trig", {{"comp", static_cast<double>(comp)}, {"d1", d1}, {"d2", d2}, {"amp", amp}}, 2);
}

VectorField random_trig_field(uint64_t seed, int degree = 3, double amp = 1.0) {
  return field_library("random_trig",
                       {{"seed", static_cast<double>(seed)},
                        {"degree", static_cast<double>(degree)},
                        {"amp", amp}},
                       2);
}

// ------------------------------------------------------------ criterion 1 --

CriterionResult crit_rigid_kernel(CritCtx& ctx) {
  CriterionResult res{1, "rigid motions lie in the projected kernel", true, "", 0.0};
  Grid grid = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 16);
  FracParams par(0.5, 2.0, 2);
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    RigidMotion r = RigidMotion::random(2, rng);
    VectorField u = r.as_field();
    double gag = gagliardo(u, grid, par).value;
    while (gag < 1e-12) {  // a pure translation has no seminorm mass; redraw
      r = RigidMotion::random(2, rng);
      u = r.as_field();
      gag = gagliardo(u, grid, par).value;
    }
    double proj = projected(u, grid, par).value;
    double ratio = proj / gag;
    ctx.rec("c1.gag." + std::to_string(i), gag);
    ctx.rec("c1.ratio." + std::to_string(i), ratio);
    worst = std::max(worst, ratio);
  }
  res.pass = worst < 1e-8;
  res.detail = "max [r]_X/|r|_W = " + fmt(worst) + " (require < 1e-8)";
  return res;
}

// ------------------------------------------------------------ criterion 2 --

CriterionResult crit_identity_equality(CritCtx& ctx) {
  CriterionResult res{2, "identity field: both seminorms agree", true, "", 0.0};
  VectorField u = field_library("identity", {}, 2);
  FracParams par(0.5, 2.0, 2);
  Domain box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0));
  double worst = 0.0;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    Grid grid = Grid::make(box, h);
    double gag = gagliardo(u, grid, par).value;
    double proj = projected(u, grid, par).value;
    double rel = std::abs(gag - proj) / gag;
    ctx.rec("c2.gag.h" + fmt(h), gag);
    ctx.rec("c2.rel.h" + fmt(h), rel);
    worst = std::max(worst, rel);
  }
  res.pass = worst < 1e-12;
  res.detail = "max relative gap " + fmt(worst) + " over four grids (require < 1e-12)";
  return res;
}

// ------------------------------------------------------------ criterion 3 --

CriterionResult crit_projected_bound(CritCtx& ctx) {
  CriterionResult res{3, "projected never exceeds Gagliardo", true, "", 0.0};
  std::vector<VectorField> fields;
  fields.push_back(field_library("identity", {}, 2));
  fields.push_back(field_library("shear", {}, 2));
  fields.push_back(field_library("grad_bump", {}, 2));
  fields.push_back(field_library("monomial", {{"comp", 1}, {"k1", 2}, {"k2", 0}}, 2));
  fields.push_back(field_library("monomial", {{"comp", 2}, {"k1", 0}, {"k2", 2}}, 2));
  fields.push_back(field_library("monomial", {{"comp", 1}, {"k1", 1}, {"k2", 1}}, 2));
  for (int comp = 1; comp <= 2; ++comp)
    for (int d1 = 0; d1 <= 2; ++d1)
      for (int d2 = 0; d2 <= 2; ++d2) {
        if (d1 == 0 && d2 == 0) continue;
        fields.push_back(trig_field(comp, d1, d2));
      }
  uint64_t seed = 1;
  while (fields.size() < 50) fields.push_back(random_trig_field(seed++));

  Grid grid = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 20);
  double worst_excess = -1e300;
  for (size_t i = 0; i < fields.size(); ++i) {
    FracParams par = i < 40 ? FracParams(0.5, 2.0, 2) : FracParams(0.3, 2.5, 2);
    double gag = gagliardo(fields[i], grid, par).raw_p_power;
    double proj = projected(fields[i], grid, par).raw_p_power;
    double excess = proj - gag * (1.0 + 1e-13);
    ctx.rec("c3.gag." + std::to_string(i), gag);
    ctx.rec("c3.proj." + std::to_string(i), proj);
    worst_excess = std::max(worst_excess, excess);
    if (excess > 0.0) res.pass = false;
  }
  res.detail = res.pass ? "holds for all 50 fields (worst slack " + fmt(worst_excess) + ")"
                        : "projected exceeds Gagliardo by " + fmt(worst_excess);
  return res;
}

// ------------------------------------------------------------ criterion 4 --

CriterionResult crit_coefficients(CritCtx& ctx) {
  CriterionResult res{4, "reflection coefficient constraints", true, "", 0.0};
  Rng rng(404);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double M = rng.uniform(0.0, 5.0);
    DeltaVariant v = (i % 2 == 0) ? DeltaVariant::two_plus_M : DeltaVariant::one_plus_M;
    ExtensionCoeffs c = solve_coefficients(M, 2, 1.0, v);
    if (ctx.corrupt && i == 0) c.k += 1e-6;  // test hook
    auto r = c.constraint_residuals();
    double mx = 0.0;
    for (double val : r) mx = std::max(mx, std::abs(val));
    ctx.rec("c4.residual." + std::to_string(i), mx);
    worst = std::max(worst, mx);
  }
  bool hand_ok;
  {
    ExtensionCoeffs c = coeffs_from_delta(0.5);
    hand_ok = c.k == 2.5 && c.l == -1.5 && c.m == -1.25 && c.q == 2.25;
    ctx.rec("c4.hand.k", c.k);
    ctx.rec("c4.hand.l", c.l);
    ctx.rec("c4.hand.m", c.m);
    ctx.rec("c4.hand.q", c.q);
  }
  res.pass = worst < 1e-14 && hand_ok;
  res.detail = "max residual " + fmt(worst) + " over 100 draws (require < 1e-14); " +
               std::string(hand_ok ? "delta=1/2 case exact" : "delta=1/2 case WRONG");
  return res;
}

// ------------------------------------------------------------ criterion 5 --

CriterionResult crit_extension_consistency(CritCtx& ctx) {
  CriterionResult res{5, "extension agrees across the graph", true, "", 0.0};
  LipschitzFn f = LipschitzFn::affine({0.5}, 0.1);
  ExtensionCoeffs cs = solve_coefficients(0.5, 2);
  Rng rng(505);
  std::ostringstream why;

  // identity on the domain side
  {
    std::vector<VectorField> us = {field_library("shear", {}, 2), trig_field(1, 1, 1, 0.5),
                                   random_trig_field(55)};
    double worst = 0.0;
    for (const auto& u : us)
      for (int i = 0; i < 200; ++i) {
        Vec x(rng.uniform(0.0, 1.0), 0.0);
        x[1] = f.eval1(x[0]) + rng.uniform(1e-6, 1.0);
        Vec e = extend_epigraph(u, f, cs, x);
        Vec uv = u(x);
        double diff = (e - uv).inftyNorm() / (1.0 + uv.inftyNorm());
        worst = std::max(worst, diff);
      }
    ctx.rec("c5.on_domain", worst);
    if (worst > 1e-15) {
      res.pass = false;
      why << "domain-side mismatch " << fmt(worst) << "; ";
    }
  }
  // constants map to constants
  {
    VectorField c = field_library("constant", {{"c1", 0.7}, {"c2", -0.3}}, 2);
    Vec cval = c(Vec(0.0, 0.0));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec x(rng.uniform(0.0, 1.0), 0.0);
      x[1] = f.eval1(x[0]) - rng.uniform(1e-3, 0.5);
      worst = std::max(worst, (extend_epigraph(c, f, cs, x) - cval).inftyNorm());
    }
    ctx.rec("c5.constants", worst);
    if (worst > 1e-14) {
      res.pass = false;
      why << "constant drift " << fmt(worst) << "; ";
    }
  }
  // continuity just below the graph
  {
    ExtensionCoeffs ch = coeffs_from_delta(0.5, 2, 0.5);
    std::vector<VectorField> us = {field_library("shear", {}, 2),
                                   field_library("identity", {}, 2), trig_field(1, 1, 1, 0.2)};
    double worst = 0.0;
    for (const auto& u : us)
      for (int i = 0; i < 100; ++i) {
        double xp = rng.uniform(0.0, 1.0);
        Vec below(xp, f.eval1(xp) - 1e-6);
        Vec on(xp, f.eval1(xp));
        worst = std::max(worst, (extend_epigraph(u, f, ch, below) - u(on)).inftyNorm());
      }
    ctx.rec("c5.boundary_mismatch", worst);
    if (worst > 1e-5) {
      res.pass = false;
      why << "boundary mismatch " << fmt(worst) << "; ";
    }
  }
  // wedge formula reduces to the graph formula when the second component is 0
  {
    double alpha = 1.0;
    LipschitzFn fa = LipschitzFn::affine({alpha}, 0.0);
    ExtensionCoeffs ca = solve_coefficients(alpha, 2);
    VectorField u = trig_field(1, 2, 1, 0.8);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec x(rng.uniform(0.01, 1.0), 0.0);
      x[1] = alpha * x[0] - rng.uniform(1e-3, 1.0);
      worst = std::max(
          worst, (extend_angular(u, alpha, ca, x) - extend_epigraph(u, fa, ca, x)).inftyNorm());
    }
    ctx.rec("c5.wedge_vs_graph", worst);
    if (worst > 1e-14) {
      res.pass = false;
      why << "wedge/graph gap " << fmt(worst) << "; ";
    }
  }
  res.detail = res.pass ? "identity, constants, continuity and wedge reduction all hold"
                        : why.str();
  return res;
}

// ------------------------------------------------------------ criterion 6 --

CriterionResult crit_mixed_cancellation(CritCtx& ctx) {
  CriterionResult res{6, "mixed-term cancellation identity", true, "", 0.0};
  VectorField u = random_trig_field(6, 3);
  LipschitzFn f = LipschitzFn::affine({0.5}, 0.2);
  ExtensionCoeffs cs = solve_coefficients(0.5, 2);
  auto samples = mixed_term_cancellation(u, f, cs, Vec(0.0, -0.8), Vec(1.0, 0.69),
                                         Vec(0.0, 0.21), Vec(1.0, 1.2), 10000, 606);
  double worst3 = 0.0, worstd = 0.0;
  for (const auto& s : samples) {
    worst3 = std::max(worst3, s.three_term_rel);
    worstd = std::max(worstd, s.decomp_rel);
  }
  ctx.rec("c6.three_term", worst3);
  ctx.rec("c6.decomp", worstd);
  res.pass = worst3 < 1e-12 && worstd < 1e-12;
  res.detail = "max relative residuals: three-term " + fmt(worst3) + ", decomposition " +
               fmt(worstd) + " over 10000 pairs (require < 1e-12)";
  return res;
}

// ------------------------------------------------------------ criterion 7 --

CriterionResult crit_hardy(CritCtx& ctx) {
  CriterionResult res{7, "weighted boundary integral: rigid kill and stability", true, "", 0.0};
  LipschitzFn f = LipschitzFn::affine({0.0}, 0.0);
  Domain half = Domain::halfspace(Vec(0.0, 0.0), Vec(1.0, 1.0));
  FracParams par(0.5, 2.0, 2);  // ps = 1
  double lam = 0.5, mu = 1.5;
  Grid g24 = Grid::make(half, 1.0 / 24);
  Grid g48 = Grid::make(half, 1.0 / 48);

  Rng rng(707);
  double worst_rigid = 0.0;
  for (int i = 0; i < 5; ++i) {
    RigidMotion r = RigidMotion::random(2, rng);
    double lhs = hardy_lhs(r.as_field(), f, lam, mu, g24, par);
    double scale = 0.0;  // same integral with the difference replaced by the sum
    for (const auto& cell : g24.cells()) {
      const Vec& x = cell.center;
      Vec xl(x[0], lam * x[1]), xm(x[0], mu * x[1]);
      double num = std::abs(r.apply(xl)[1]) + std::abs(r.apply(xm)[1]);
      scale += cell.volume * std::pow(num, par.p) / std::pow(std::abs(x[1]), par.p * par.s);
    }
    double rel = lhs / std::max(scale, 1e-300);
    ctx.rec("c7.rigid." + std::to_string(i), rel);
    worst_rigid = std::max(worst_rigid, rel);
  }

  std::vector<VectorField> us = {
      field_library("monomial", {{"comp", 2}, {"k1", 0}, {"k2", 2}}, 2),
      field_library("monomial", {{"comp", 2}, {"k1", 2}, {"k2", 0}}, 2),
      field_library("monomial", {{"comp", 2}, {"k1", 1}, {"k2", 1}}, 2),
      trig_field(2, 1, 1),
      trig_field(2, 2, 1),
      trig_field(2, 0, 2),
      field_library("grad_bump", {{"c1", 0.5}, {"c2", 0.5}, {"r", 0.4}}, 2),
      random_trig_field(71),
      random_trig_field(72),
      random_trig_field(73)};
  double worst_drift = 0.0;
  bool flagged = false;
  for (size_t i = 0; i < us.size(); ++i) {
    HardyResult a = hardy_ratio(us[i], f, lam, mu, g24, par);
    HardyResult b = hardy_ratio(us[i], f, lam, mu, g48, par);
    flagged |= a.infinite_flag || b.infinite_flag;
    double drift = std::abs(b.ratio - a.ratio) / std::max(a.ratio, 1e-300);
    ctx.rec("c7.ratio24." + std::to_string(i), a.ratio);
    ctx.rec("c7.ratio48." + std::to_string(i), b.ratio);
    worst_drift = std::max(worst_drift, drift);
  }
  res.pass = worst_rigid < 1e-10 && worst_drift < 0.15 && !flagged;
  res.detail = "rigid relative mass " + fmt(worst_rigid) + " (require < 1e-10); max ratio drift " +
               fmt(worst_drift) + " under h -> h/2 (require < 0.15)" +
               (flagged ? "; UNEXPECTED infinity flag" : "");
  return res;
}

// ------------------------------------------------------------ criterion 8 --

struct CoverCase {
  std::string name;
  WhitneyCover cover;
  double M;
};

CriterionResult crit_whitney(CritCtx& ctx) {
  CriterionResult res{8, "cover geometry invariants", true, "", 0.0};
  std::vector<CoverCase> cases;
  cases.push_back({"flat", WhitneyCover::epigraph(LipschitzFn::affine({0.0}, 0.0),
                                                  Vec(0.0, 0.0), Vec(1.0, 1.0)),
                   0.0});
  cases.push_back({"tilt", WhitneyCover::epigraph(LipschitzFn::affine({0.5}, 0.0),
                                                  Vec(0.0, 0.0), Vec(1.0, 1.5)),
                   0.5});
  for (double alpha : {0.5, 1.0, 2.0})
    cases.push_back({"wedge" + fmt(alpha), WhitneyCover::angular(alpha, 1.0), alpha});

  Rng rng(808);
  std::ostringstream why;
  for (const auto& cc : cases) {
    const WhitneyCover& cov = cc.cover;
    double scale = cov.graph_reach_constant() * std::sqrt(2.0) * (2.0 + cc.M);
    int c1 = cov.overlap_constant();
    ctx.rec("c8." + cc.name + ".c1", static_cast<double>(c1));
    ctx.rec("c8." + cc.name + ".c2", cov.graph_reach_constant());
    if (c1 > 12) {
      res.pass = false;
      why << cc.name << ": overlap " << c1 << " > 12; ";
    }
    bool pgram = cov.shape() == WhitneyCover::Shape::parallelogram;
    double worst_lo = 1e300, worst_hi = 0.0;
    int disjoint_bad = 0, double_bad = 0;
    for (size_t k = 0; k < cov.cells().size(); ++k) {
      const WhitneyCell& cell = cov.cells()[k];
      for (const Vec& corner : cov.doubled_corners(k)) {
        if (cov.clearance(corner) < -1e-9) ++double_bad;
        if (pgram && corner[0] < -1e-9) ++double_bad;
      }
      for (int t = 0; t < 100; ++t) {
        double sa = rng.uniform(), sb = rng.uniform();
        Vec p = cell.anchor;
        if (pgram) {
          p[0] += sa * cell.side;
          p[1] += sa * cell.side * cc.M + sb * cell.side;
        } else {
          p[0] += sa * cell.side;
          p[1] += sb * cell.side;
        }
        double cl = cov.clearance(p) / cell.side;
        worst_lo = std::min(worst_lo, cl);
        worst_hi = std::max(worst_hi, cl);
        if (t < 20) {
          int owners = 0;
          for (size_t j = 0; j < cov.cells().size(); ++j)
            if (cov.cell_contains(j, p)) ++owners;
          if (owners != 1) ++disjoint_bad;
        }
      }
    }
    ctx.rec("c8." + cc.name + ".lo", worst_lo);
    ctx.rec("c8." + cc.name + ".hi", worst_hi);
    if (disjoint_bad > 0 || double_bad > 0) {
      res.pass = false;
      why << cc.name << ": " << disjoint_bad << " overlap / " << double_bad
          << " doubled-cell escapes; ";
    }
    if (worst_lo < 0.5 - 1e-12 || worst_hi > scale * (1.0 + 1e-12)) {
      res.pass = false;
      why << cc.name << ": clearance/side in [" << fmt(worst_lo) << ", " << fmt(worst_hi)
          << "] outside [0.5, " << fmt(scale) << "]; ";
    }
  }
  res.detail = res.pass
                   ? "disjointness, doubled-cell containment, overlap <= 12 and clearance "
                     "bounds hold on all five covers"
                   : why.str();
  return res;
}

// ------------------------------------------------------------ criterion 9 --

CriterionResult crit_scaling(CritCtx& ctx) {
  CriterionResult res{9, "scaling laws", true, "", 0.0};
  VectorField u = random_trig_field(909, 3);
  std::ostringstream why;
  double worst = 0.0;
  for (double s : {0.5, 0.3}) {
    FracParams par(s, 2.0, 2);
    Grid base = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 32);
    double gag1 = gagliardo(u, base, par).raw_p_power;
    double proj1 = projected(u, base, par).raw_p_power;
    for (double tau : {0.5, 2.0}) {
      VectorField ut = VectorField::analytic(
          2, [u, tau](const Vec& x) { return u((1.0 / tau) * x); }, "scaled");
      Grid gt = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(tau, tau)), tau / 32);
      double expect = std::pow(tau, 2.0 - s * par.p);
      double rg = gagliardo(ut, gt, par).raw_p_power / gag1;
      double rp = projected(ut, gt, par).raw_p_power / proj1;
      ctx.rec("c9.gag.s" + fmt(s) + ".tau" + fmt(tau), rg);
      ctx.rec("c9.proj.s" + fmt(s) + ".tau" + fmt(tau), rp);
      worst = std::max({worst, std::abs(rg / expect - 1.0), std::abs(rp / expect - 1.0)});
    }
  }
  if (worst > 0.02) {
    res.pass = false;
    why << "seminorm scaling off by " << fmt(worst) << " (require < 0.02); ";
  }

  // constant of the mean-zero bound scales like tau^s
  std::vector<std::pair<double, double>> fitpts;
  for (double tau : {0.5, 1.0, 2.0}) {
    BasisSet b = make_basis(2, 3, Vec(0.0, 0.0), Vec(tau, tau));
    Grid g = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(tau, tau)), tau / 24);
    GramForms forms = assemble_gram(b, g, 0.5);
    double val = korn_poincare_constant(forms).value;
    ctx.rec("c9.kp.tau" + fmt(tau), val);
    fitpts.push_back({tau, val});
  }
  double slope = loglog_slope(fitpts);
  ctx.rec("c9.kp.slope", slope);
  if (std::abs(slope - 0.5) > 0.1) {
    res.pass = false;
    why << "mean-zero constant exponent " << fmt(slope) << " not within 0.1 of s = 0.5";
  }
  res.detail = res.pass ? "power-law checks hold (worst seminorm deviation " + fmt(worst) +
                              ", fitted exponent " + fmt(slope) + ")"
                        : why.str();
  return res;
}

// ----------------------------------------------------------- criterion 10 --

CriterionResult crit_decay_exponent(CritCtx& ctx) {
  CriterionResult res{10, "boundary-distance decay exponent", true, "", 0.0};
  LipschitzFn f = LipschitzFn::affine({0.0}, 0.0);
  // On the infinite half-space the profile is an exact power of the boundary
  // distance, so the two error sources are the finite window (a truncated tail
  // of relative size (d/R)^(ps)) and the midpoint rule across the kernel peak
  // (width d/lambda).  The tail has a known order in the window size, so one
  // Richardson step over windows R and 2R removes it; the mirror depth and
  // spacing below keep the peak a few cells wide at the closest probe.
  const double lam = 0.7, h = 1.0 / 64;
  const double R1 = 5.0, R2 = 10.0;
  Grid g1 = Grid::make(Domain::halfspace(Vec(0.5 - R1, 0.0), Vec(0.5 + R1, R1)), h);
  Grid g2 = Grid::make(Domain::halfspace(Vec(0.5 - R2, 0.0), Vec(0.5 + R2, R2)), h);
  std::vector<Vec> zs;
  for (int i = 0; i < 6; ++i) {
    double t = static_cast<double>(i) / 5.0;
    zs.push_back(Vec(0.5, 0.04 * std::pow(0.20 / 0.04, t)));
  }
  std::ostringstream why;
  for (auto [s, p] : {std::pair(0.3, 2.0), std::pair(0.5, 2.0), std::pair(0.7, 3.0)}) {
    FracParams par(s, p, 2);
    auto prof1 = mirror_decay_profile(f, lam, par, zs, g1);
    auto prof2 = mirror_decay_profile(f, lam, par, zs, g2);
    std::vector<std::pair<double, double>> xy;
    double w = 1.0 / (std::pow(2.0, p * s) - 1.0);
    for (size_t i = 0; i < prof1.size(); ++i)
      xy.push_back({prof1[i].dist, prof2[i].value + w * (prof2[i].value - prof1[i].value)});
    double slope = loglog_slope(xy);
    ctx.rec("c10.slope.s" + fmt(s) + ".p" + fmt(p), slope);
    if (std::abs(slope + p * s) > 0.15) {
      res.pass = false;
      why << "(s,p)=(" << s << "," << p << "): slope " << fmt(slope) << " vs -ps = "
          << fmt(-p * s) << "; ";
    }
  }
  res.detail = res.pass ? "window-extrapolated decay exponents within 0.15 of -ps for all "
                          "three cases"
                        : why.str();
  return res;
}

// ----------------------------------------------------------- criterion 11 --

CriterionResult crit_korn2(CritCtx& ctx) {
  CriterionResult res{11, "second Korn constant estimates", true, "", 0.0};
  std::ostringstream why;
  GramForms& f4 = ctx.deg4();
  double e4 = estimate_korn2_constant(f4).value;
  ctx.rec("c11.eig.K4", e4);

  // the eigenvalue dominates every sampled quotient from its own span
  {
    Eigen::MatrixXd B = f4.X + f4.M;
    Rng rng(1111);
    int m = static_cast<int>(f4.W.rows());
    double worst = 0.0;
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd c(m);
      for (int i = 0; i < m; ++i) c[i] = rng.normal();
      double ratio = c.dot(f4.W * c) / c.dot(B * c);
      worst = std::max(worst, ratio);
    }
    ctx.rec("c11.sampled_max", worst);
    if (worst > e4 * (1.0 + 1e-8)) {
      res.pass = false;
      why << "sampled quotient " << fmt(worst) << " exceeds eigenvalue " << fmt(e4) << "; ";
    }
  }
  // nondecreasing in the basis degree
  {
    double prev = 0.0;
    for (int deg = 2; deg <= 4; ++deg) {
      int m = static_cast<int>(f4.basis.prefix_count(deg));
      GramForms sub;
      sub.basis = make_basis(2, deg, Vec(0.0, 0.0), Vec(1.0, 1.0));
      sub.W = f4.W.topLeftCorner(m, m);
      sub.X = f4.X.topLeftCorner(m, m);
      sub.M = f4.M.topLeftCorner(m, m);
      sub.h = f4.h;
      sub.s = f4.s;
      sub.refine_depth = f4.refine_depth;
      double e = estimate_korn2_constant(sub).value;
      ctx.rec("c11.eig.K" + std::to_string(deg), e);
      if (e < prev - 1e-12 * std::max(1.0, prev)) {
        res.pass = false;
        why << "estimate drops from " << fmt(prev) << " to " << fmt(e) << " at degree " << deg
            << "; ";
      }
      prev = e;
    }
  }
  // stability under grid refinement, at ps = 1 and ps < 1
  {
    Domain box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0));
    BasisSet b2 = make_basis(2, 2, Vec(0.0, 0.0), Vec(1.0, 1.0));
    Grid g32 = Grid::make(box, 1.0 / 32);
    Grid g64 = Grid::make(box, 1.0 / 64);
    for (double s : {0.5, 0.3}) {
      double e32, e64;
      if (s == 0.5) {
        int m = static_cast<int>(f4.basis.prefix_count(2));
        GramForms sub;
        sub.basis = b2;
        sub.W = f4.W.topLeftCorner(m, m);
        sub.X = f4.X.topLeftCorner(m, m);
        sub.M = f4.M.topLeftCorner(m, m);
        sub.h = f4.h;
        sub.s = s;
        e32 = estimate_korn2_constant(sub).value;
      } else {
        e32 = estimate_korn2_constant(assemble_gram(b2, g32, s)).value;
      }
      e64 = estimate_korn2_constant(assemble_gram(b2, g64, s)).value;
      double drift = std::abs(e64 - e32) / e32;
      ctx.rec("c11.h32.s" + fmt(s), e32);
      ctx.rec("c11.h64.s" + fmt(s), e64);
      if (drift > 0.10) {
        res.pass = false;
        why << "s=" << s << ": estimate moves " << fmt(100 * drift) << "% from h=1/32 to 1/64; ";
      }
    }
  }
  res.detail = res.pass ? "eigenvalue dominates samples, grows with degree, stable under "
                          "refinement at ps=1 and ps<1"
                        : why.str();
  return res;
}

// ----------------------------------------------------------- criterion 12 --

CriterionResult crit_korn1(CritCtx& ctx) {
  CriterionResult res{12, "first Korn constant estimate", true, "", 0.0};
  GramForms& f4 = ctx.deg4();
  Korn1Result k1 = estimate_korn1_constant(f4);
  ctx.rec("c12.value", k1.estimate.value);
  if (!std::isfinite(k1.estimate.value) || k1.estimate.value <= 0.0) {
    res.pass = false;
    res.detail = "estimate not finite/positive: " + fmt(k1.estimate.value);
    return res;
  }
  // direct quotient of the returned maximizer: project out the rigid part
  // with an independent rank-revealing solve, then evaluate both forms
  const auto& R = f4.basis.rigid_indices;
  int nr = static_cast<int>(R.size());
  Eigen::VectorXd v = k1.top_coefs;
  Eigen::VectorXd Wv = f4.W * v;
  Eigen::MatrixXd Wrr(nr, nr);
  Eigen::VectorXd wr(nr);
  for (int a = 0; a < nr; ++a) {
    wr[a] = Wv[static_cast<int>(R[static_cast<size_t>(a)])];
    for (int b = 0; b < nr; ++b)
      Wrr(a, b) = f4.W(static_cast<int>(R[static_cast<size_t>(a)]),
                       static_cast<int>(R[static_cast<size_t>(b)]));
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Wrr);
  Eigen::VectorXd rho = cod.solve(wr);
  Eigen::VectorXd w = v;
  for (int a = 0; a < nr; ++a) w[static_cast<int>(R[static_cast<size_t>(a)])] -= rho[a];
  double num = w.dot(f4.W * w);
  double den = v.dot(f4.X * v);
  double direct = num / den;
  double rel = std::abs(direct - k1.estimate.value) / k1.estimate.value;
  ctx.rec("c12.direct", direct);
  ctx.rec("c12.rel", rel);
  res.pass = rel < 1e-8;
  res.detail = "estimate " + fmt(k1.estimate.value) + ", direct quotient of maximizer " +
               fmt(direct) + ", relative gap " + fmt(rel) + " (require < 1e-8)";
  return res;
}

// ----------------------------------------------------------- criterion 13 --

CriterionResult crit_isometry(CritCtx& ctx) {
  CriterionResult res{13, "isometry invariance of the projected seminorm", true, "", 0.0};
  VectorField u = random_trig_field(1313, 3);
  FracParams par(0.5, 2.0, 2);
  Grid base = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 24);
  Grid plain = Grid::transformed(base, [](const Vec& x) { return x; });
  double v0 = projected(u, plain, par).value;
  ctx.rec("c13.base", v0);
  Rng rng(1314);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    double th = rng.uniform(0.0, 2.0 * kPi);
    double c = std::cos(th), sn = std::sin(th);
    Vec t(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    auto fwd = [c, sn, t](const Vec& x) {
      return Vec(c * x[0] - sn * x[1] + t[0], sn * x[0] + c * x[1] + t[1]);
    };
    VectorField ut = VectorField::analytic(
        2,
        [u, c, sn, t](const Vec& y) {
          Vec x(c * (y[0] - t[0]) + sn * (y[1] - t[1]),
                -sn * (y[0] - t[0]) + c * (y[1] - t[1]));
          Vec val = u(x);
          return Vec(c * val[0] - sn * val[1], sn * val[0] + c * val[1]);
        },
        "rotated");
    Grid moved = Grid::transformed(base, fwd);
    double vi = projected(ut, moved, par).value;
    double rel = std::abs(vi - v0) / v0;
    ctx.rec("c13.rel." + std::to_string(i), rel);
    worst = std::max(worst, rel);
  }
  res.pass = worst < 1e-10;
  res.detail = "max relative change " + fmt(worst) + " over 5 isometries (require < 1e-10)";
  return res;
}

// ----------------------------------------------------------- criterion 14 --

CriterionResult crit_peridynamic(CritCtx& ctx) {
  CriterionResult res{14, "bond energy identity and Galerkin solve", true, "", 0.0};
  std::ostringstream why;
  Grid grid = Grid::make(Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0)), 1.0 / 16);
  std::vector<VectorField> us = {field_library("identity", {}, 2),
                                 field_library("shear", {}, 2), trig_field(1, 1, 1),
                                 random_trig_field(14), field_library("grad_bump", {}, 2)};
  double worst_id = 0.0;
  for (size_t i = 0; i < us.size(); ++i) {
    double w = perienergy(us[i], grid, 0.5);
    double xr = projected(us[i], grid, FracParams(0.5, 2.0, 2)).raw_p_power;
    double rel = std::abs(w - xr) / std::max(xr, 1e-300);
    ctx.rec("c14.energy." + std::to_string(i), w);
    worst_id = std::max(worst_id, rel);
  }
  if (worst_id > 1e-12) {
    res.pass = false;
    why << "energy identity off by " << fmt(worst_id) << "; ";
  }

  BasisSet b = make_basis(2, 2, Vec(0.0, 0.0), Vec(1.0, 1.0));
  Domain omega = Domain::box(Vec(0.0, 0.0), Vec(1.0, 0.12));
  CutoffFn chi = CutoffFn::radial_bump(Vec(0.5, 0.58), 0.4);
  VectorField fext = field_library("constant", {{"c1", 0.0}, {"c2", -1.0}}, 2);
  PeridynamicSolution sol = solve_peridynamic(fext, omega, chi, b, grid, 0.5);
  ctx.rec("c14.residual", sol.residual);
  ctx.rec("c14.energy_min", sol.energy);
  if (sol.residual > 1e-10) {
    res.pass = false;
    why << "optimality residual " << fmt(sol.residual) << " (require < 1e-10); ";
  }
  Rng rng(1414);
  int m = static_cast<int>(sol.coefs.size());
  double margin = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd d(m);
    for (int i = 0; i < m; ++i) d[i] = rng.normal();
    d *= rng.uniform(1e-3, 0.3) / d.norm();
    Eigen::VectorXd cp = sol.coefs + d;
    double ep = cp.dot(sol.G * cp) - sol.load.dot(cp);
    margin = std::min(margin, ep - sol.energy);
  }
  ctx.rec("c14.perturb_margin", margin);
  if (margin < -1e-10 * (1.0 + std::abs(sol.energy))) {
    res.pass = false;
    why << "a perturbation lowered the energy by " << fmt(-margin);
  }
  res.detail = res.pass ? "energy identity " + fmt(worst_id) + ", solve residual " +
                              fmt(sol.residual) + ", all 100 perturbations raise the energy"
                        : why.str();
  return res;
}

// -------------------------------------------------------------- the suite --

using CritFn = CriterionResult (*)(CritCtx&);

const std::vector<CritFn>& criteria_1_14() {
  static const std::vector<CritFn> fns = {
      crit_rigid_kernel,    crit_identity_equality, crit_projected_bound, crit_coefficients,
      crit_extension_consistency, crit_mixed_cancellation, crit_hardy,   crit_whitney,
      crit_scaling,         crit_decay_exponent,    crit_korn2,           crit_korn1,
      crit_isometry,        crit_peridynamic};
  return fns;
}

CriterionResult run_one(CritFn fn, CritCtx& ctx) {
  double t0 = omp_get_wtime();
  CriterionResult res;
  try {
    res = fn(ctx);
  } catch (const std::exception& e) {
    res.pass = false;
    res.detail = std::string("exception: ") + e.what();
  }
  res.runtime_ms = (omp_get_wtime() - t0) * 1e3;
  return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  auto wanted = [&](int id) {
    return opt.only.empty() ||
           std::find(opt.only.begin(), opt.only.end(), id) != opt.only.end();
  };
  bool need_det = wanted(15);
  std::vector<CriterionResult> out;

  if (!need_det) {
    CritCtx ctx;
    ctx.corrupt = opt.corrupt_coefficient;
    for (size_t i = 0; i < criteria_1_14().size(); ++i) {
      if (!wanted(static_cast<int>(i) + 1)) continue;
      out.push_back(run_one(criteria_1_14()[i], ctx));
    }
    return out;
  }

  // determinism pass: everything once at 1 thread, once at 8, then compare
  int before = omp_get_max_threads();
  std::vector<std::pair<std::string, double>> log1, log8;
  std::vector<CriterionResult> res1, res8;
  omp_set_num_threads(1);
  {
    CritCtx ctx;
    ctx.log = &log1;
    ctx.corrupt = opt.corrupt_coefficient;
    for (CritFn fn : criteria_1_14()) res1.push_back(run_one(fn, ctx));
  }
  omp_set_num_threads(8);
  {
    CritCtx ctx;
    ctx.log = &log8;
    ctx.corrupt = opt.corrupt_coefficient;
    for (CritFn fn : criteria_1_14()) res8.push_back(run_one(fn, ctx));
  }
  omp_set_num_threads(before);

  for (size_t i = 0; i < res1.size(); ++i)
    if (wanted(static_cast<int>(i) + 1)) out.push_back(res1[i]);

  CriterionResult det{15, "thread-count determinism", true, "", 0.0};
  double t0 = omp_get_wtime();
  if (log1.size() != log8.size()) {
    det.pass = false;
    det.detail = "value counts differ: " + std::to_string(log1.size()) + " vs " +
                 std::to_string(log8.size());
  } else {
    size_t bad = 0;
    std::string first;
    for (size_t i = 0; i < log1.size(); ++i) {
      bool same = log1[i].first == log8[i].first &&
                  format_g17(log1[i].second) == format_g17(log8[i].second);
      if (!same && bad++ == 0)
        first = log1[i].first + ": " + format_g17(log1[i].second) + " vs " +
                format_g17(log8[i].second);
    }
    for (size_t i = 0; i < res1.size(); ++i)
      if (res1[i].pass != res8[i].pass && bad++ == 0)
        first = "criterion " + std::to_string(res1[i].id) + " pass flag differs";
    det.pass = bad == 0;
    det.detail = det.pass ? std::to_string(log1.size()) +
                                " values byte-identical across thread counts 1 and 8"
                          : std::to_string(bad) + " mismatches, first: " + first;
  }
  det.runtime_ms = (omp_get_wtime() - t0) * 1e3;
  out.push_back(det);
  return out;
}

int acceptance_main(const AcceptanceOptions& opt, std::ostream& os) {
  auto results = run_acceptance(opt);
  bool all = true;
  os << "  #  result  criterion                                              runtime\n";
  os << "---- ------- ------------------------------------------------------ ----------\n";
  for (const auto& r : results) {
    all &= r.pass;
    std::ostringstream line;
    line << std::setw(3) << r.id << "  " << (r.pass ? "PASS   " : "FAIL   ") << std::left
         << std::setw(54) << r.title << std::right << std::fixed << std::setprecision(0)
         << std::setw(8) << r.runtime_ms << " ms";
    os << line.str() << "\n       " << r.detail << "\n";
  }
  os << (all ? "acceptance: all criteria passed\n" : "acceptance: FAILURES present\n");
  return all ? 0 : 4;
}

}  // namespace fracorn
