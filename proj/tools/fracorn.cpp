// Command-line front end: each subcommand reads a JSON experiment config,
// runs the corresponding computation and writes a CSV report (with a JSON
// mirror) or prints it to stdout.
//
// Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
// 4 acceptance criteria failed.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracorn/acceptance.hpp"
#include "fracorn/config.hpp"
#include "fracorn/core.hpp"
#include "fracorn/extension.hpp"
#include "fracorn/korn.hpp"
#include "fracorn/report.hpp"
#include "fracorn/seminorms.hpp"

namespace {

using namespace fracorn;

int resolve_threads(int flag_threads, int cfg_threads) {
  if (flag_threads > 0) return flag_threads;
  if (const char* env = std::getenv("FRACORN_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return cfg_threads;
}

std::string hkey(double h) { return format_g17(h); }

// ----------------------------------------------------------------- seminorm --

Report run_seminorm(const ExperimentConfig& cfg) {
  if (cfg.fields.empty())
    throw ConfigError("config field 'fields': the seminorm subcommand needs at least one field");
  Domain dom = cfg.domain.build();
  int dim = dom.n();
  FracParams par(cfg.s, cfg.p, dim);
  Report rep;
  for (double h : cfg.grid.h) {
    Grid grid = cfg.grid.build(dom, h);
    for (size_t i = 0; i < cfg.fields.size(); ++i) {
      VectorField u = cfg.fields[i].build(dim);
      double t0 = omp_get_wtime();
      SeminormResult g = gagliardo(u, grid, par, cfg.grid.refine_depth);
      SeminormResult pn = projected(u, grid, par, ProjectedForm::normalized,
                                    cfg.grid.refine_depth);
      SeminormResult pu = projected(u, grid, par, ProjectedForm::unnormalized,
                                    cfg.grid.refine_depth);
      double lp = lp_norm(u, grid, cfg.p);
      double ms = (omp_get_wtime() - t0) * 1e3;
      ReportRow& row = rep.add(cfg.fields[i].name + "#" + std::to_string(i) + "@h=" + hkey(h));
      row.values["h"] = h;
      row.values["gagliardo"] = g.value;
      row.values["gagliardo_p"] = g.raw_p_power;
      row.values["projected"] = pn.value;
      row.values["projected_p"] = pn.raw_p_power;
      row.values["projected_unnorm"] = pu.value;
      row.values["lp"] = lp;
      row.values["runtime_ms"] = ms;
      row.tags["field"] = cfg.fields[i].name;
    }
  }
  return rep;
}

// ------------------------------------------------------------------- extend --

Report run_extend(const ExperimentConfig& cfg) {
  if (cfg.fields.empty())
    throw ConfigError("config field 'fields': the extend subcommand needs at least one field");
  Domain dom = cfg.domain.build();
  int dim = dom.n();
  FracParams par(cfg.s, cfg.p, dim);
  bool wedge = dom.kind() == Domain::Kind::angular;
  if (!wedge && dom.kind() != Domain::Kind::epigraph)
    throw ConfigError("config field 'domain.kind': extend needs an epigraph or angular domain");

  ExtensionCoeffs coeffs;
  double forced_delta = cfg.option_or("delta", 0.0);
  DeltaVariant variant = cfg.label_or("variant", "two_plus_M") == "one_plus_M"
                             ? DeltaVariant::one_plus_M
                             : DeltaVariant::two_plus_M;
  double M = wedge ? dom.alpha() : dom.graph().lipschitz();
  if (forced_delta > 0.0)
    coeffs = coeffs_from_delta(forced_delta, dim, M);
  else
    coeffs = solve_coefficients(M, dim, cfg.option_or("c2", 1.0), variant);

  Domain below = [&]() {
    if (cfg.aux_domain) return cfg.aux_domain->build();
    if (!wedge) {
      auto [lo, hi] = dom.bounding_box();
      return Domain::hypograph(dom.graph(), lo, hi);
    }
    // complement sector of the wedge inside the truncation disk
    double R = dom.radius(), th1 = std::atan(dom.alpha());
    std::vector<Vec> vs = {Vec(0.0, 0.0)};
    for (int i = 0; i <= 64; ++i) {
      double th = -1.5707963267948966 + (th1 + 1.5707963267948966) * i / 64.0;
      vs.push_back(Vec(R * std::cos(th), R * std::sin(th)));
    }
    return Domain::polygon(vs);
  }();

  Report rep;
  {
    ReportRow& row = rep.add("coefficients");
    row.values["M"] = coeffs.M;
    row.values["delta"] = coeffs.delta;
    row.values["lambda"] = coeffs.lambda;
    row.values["mu"] = coeffs.mu;
    row.values["k"] = coeffs.k;
    row.values["l"] = coeffs.l;
    row.values["m"] = coeffs.m;
    row.values["q"] = coeffs.q;
    double worst = 0.0;
    for (double r : coeffs.constraint_residuals()) worst = std::max(worst, std::abs(r));
    row.values["constraint_residual"] = worst;
    if (wedge) row.values["angular_residual"] = coeffs.angular_residual(dom.alpha());
  }
  for (double h : cfg.grid.h) {
    Grid grid_dom = cfg.grid.build(dom, h);
    Grid grid_below = cfg.grid.build(below, h);
    for (size_t i = 0; i < cfg.fields.size(); ++i) {
      VectorField u = cfg.fields[i].build(dim);
      double t0 = omp_get_wtime();
      ExtensionRatioResult r =
          wedge ? extension_norm_ratio_angular(u, dom.alpha(), coeffs, grid_dom, grid_below, par)
                : extension_norm_ratio_epigraph(u, dom.graph(), coeffs, grid_dom, grid_below, par);
      ReportRow& row = rep.add(cfg.fields[i].name + "#" + std::to_string(i) + "@h=" + hkey(h));
      row.values["h"] = h;
      row.values["extension_norm"] = r.extension_norm;
      row.values["part_domain"] = r.split.part_domain;
      row.values["part_below"] = r.split.part_below;
      row.values["part_mixed"] = r.split.part_mixed;
      row.values["u_proj"] = r.u_proj;
      row.values["u_companion"] = r.u_companion;
      row.values["denom"] = r.denom;
      row.values["ratio"] = r.ratio;
      row.values["ratio_alt"] = r.ratio_alt;
      row.values["infinite"] = r.infinite_flag ? 1.0 : 0.0;
      if (wedge)
        row.values["ii_ratio"] =
            ii_new_ratio(u, dom.alpha(), coeffs, grid_below, grid_dom, par);
      row.values["runtime_ms"] = (omp_get_wtime() - t0) * 1e3;
      row.tags["field"] = cfg.fields[i].name;
    }
  }
  return rep;
}

// ------------------------------------------------------------ korn-constant --

Report run_korn(const ExperimentConfig& cfg) {
  Domain dom = cfg.domain.build();
  int dim = dom.n();
  std::string which = cfg.label_or("constant", "C2");
  std::string method = cfg.label_or("method", "eig");
  int degree = static_cast<int>(cfg.option_or("degree", 3.0));
  int samples = static_cast<int>(cfg.option_or("samples", 1000.0));
  bool general_p = cfg.p != 2.0;
  if (general_p && !(which == "C2" && method == "random-search"))
    throw ConfigError("config field 'params.p': only the C2 random-search bound supports p != 2");

  auto [lo, hi] = dom.bounding_box();
  BasisSet basis = make_basis(dim, degree, lo, hi);
  Report rep;
  double prev = 0.0;
  bool have_prev = false;
  for (double h : cfg.grid.h) {
    Grid grid = cfg.grid.build(dom, h);
    double t0 = omp_get_wtime();
    ConstantEstimate est;
    if (general_p) {
      est = korn2_lower_bound_lp(basis, grid, FracParams(cfg.s, cfg.p, dim), samples, cfg.seed);
    } else {
      GramForms forms = assemble_gram(basis, grid, cfg.s, cfg.grid.refine_depth);
      if (which == "C2")
        est = estimate_korn2_constant(forms, method, samples, cfg.seed);
      else if (which == "C1")
        est = estimate_korn1_constant(forms).estimate;
      else if (which == "KornPoincare")
        est = korn_poincare_constant(forms);
      else
        throw ConfigError("config field 'labels.constant': '" + which +
                          "' is not one of C1, C2, KornPoincare");
    }
    ReportRow& row = rep.add(which + "@h=" + hkey(h));
    row.values["h"] = h;
    row.values["value"] = est.value;
    row.values["degree"] = degree;
    row.values["error_indicator"] = have_prev ? std::abs(est.value - prev) : 0.0;
    row.values["runtime_ms"] = (omp_get_wtime() - t0) * 1e3;
    row.tags["constant"] = which;
    row.tags["method"] = general_p ? "random-search" : method;
    prev = est.value;
    have_prev = true;
  }
  return rep;
}

// -------------------------------------------------------------------- hardy --

Report run_hardy(const ExperimentConfig& cfg) {
  if (cfg.fields.empty())
    throw ConfigError("config field 'fields': the hardy subcommand needs at least one field");
  Domain dom = cfg.domain.build();
  if (dom.kind() != Domain::Kind::epigraph && dom.kind() != Domain::Kind::halfspace)
    throw ConfigError("config field 'domain.kind': hardy needs an epigraph or halfspace domain");
  int dim = dom.n();
  FracParams par(cfg.s, cfg.p, dim);
  double lam = cfg.option_or("lam", 0.5);
  double mu = cfg.option_or("mu", 1.5);
  HardyOptions opt;
  opt.max_enlarge = static_cast<int>(cfg.option_or("max_enlarge", 3.0));
  Report rep;
  for (double h : cfg.grid.h) {
    Grid grid = cfg.grid.build(dom, h);
    for (size_t i = 0; i < cfg.fields.size(); ++i) {
      VectorField u = cfg.fields[i].build(dim);
      double t0 = omp_get_wtime();
      HardyResult r = hardy_ratio(u, dom.graph(), lam, mu, grid, par, opt);
      ReportRow& row = rep.add(cfg.fields[i].name + "#" + std::to_string(i) + "@h=" + hkey(h));
      row.values["h"] = h;
      row.values["lhs"] = r.lhs;
      row.values["projected_p"] = r.projected_raw;
      row.values["ratio"] = r.ratio;
      row.values["infinite"] = r.infinite_flag ? 1.0 : 0.0;
      row.values["enlargements"] = r.enlargements;
      row.values["runtime_ms"] = (omp_get_wtime() - t0) * 1e3;
      row.tags["field"] = cfg.fields[i].name;
    }
  }
  return rep;
}

// -------------------------------------------------------------------- cover --

Report run_cover(const ExperimentConfig& cfg) {
  Domain dom = cfg.domain.build();
  WhitneyCover cover = [&]() {
    if (dom.kind() == Domain::Kind::angular)
      return WhitneyCover::angular(dom.alpha(), dom.radius(),
                                   static_cast<int>(cfg.option_or("gens", 6.0)));
    if (dom.kind() == Domain::Kind::epigraph || dom.kind() == Domain::Kind::halfspace) {
      auto [lo, hi] = dom.bounding_box();
      return WhitneyCover::epigraph(dom.graph(), lo, hi,
                                    static_cast<int>(cfg.option_or("max_gen", 7.0)));
    }
    throw ConfigError(
        "config field 'domain.kind': cover needs an epigraph, halfspace or angular domain");
  }();
  Report rep;
  ReportRow& top = rep.add("cover");
  top.values["cells"] = static_cast<double>(cover.cells().size());
  top.values["overlap_c1"] = cover.overlap_constant();
  top.values["reach_c2"] = cover.graph_reach_constant();
  top.values["resolved_clearance"] = cover.resolved_clearance();
  std::map<int, int> count;
  std::map<int, double> side;
  for (const auto& c : cover.cells()) {
    ++count[c.generation];
    side[c.generation] = c.side;
  }
  for (const auto& [gen, cnt] : count) {
    ReportRow& row = rep.add("generation " + std::to_string(gen));
    row.values["generation"] = gen;
    row.values["cells"] = cnt;
    row.values["side"] = side[gen];
  }
  return rep;
}

// -------------------------------------------------------------- convergence --

Report run_convergence(const ExperimentConfig& cfg) {
  if (cfg.fields.empty())
    throw ConfigError("config field 'fields': convergence needs a field to integrate");
  if (cfg.grid.h.size() < 3)
    throw ConfigError("config field 'grid.h': convergence needs at least three spacings");
  Domain dom = cfg.domain.build();
  int dim = dom.n();
  FracParams par(cfg.s, cfg.p, dim);
  VectorField u = cfg.fields[0].build(dim);
  Report rep;
  std::vector<std::pair<double, double>> vals;
  for (double h : cfg.grid.h) {
    double t0 = omp_get_wtime();
    SeminormResult g = gagliardo(u, cfg.grid.build(dom, h), par, cfg.grid.refine_depth);
    ReportRow& row = rep.add("h=" + hkey(h));
    row.values["h"] = h;
    row.values["gagliardo"] = g.value;
    row.values["runtime_ms"] = (omp_get_wtime() - t0) * 1e3;
    vals.push_back({h, g.value});
  }
  size_t k = vals.size();
  auto [h1, v1] = vals[k - 3];
  auto [h2, v2] = vals[k - 2];
  auto [h3, v3] = vals[k - 1];
  double d12 = v2 - v1, d23 = v3 - v2;
  ReportRow& row = rep.add("extrapolate");
  if (std::abs(d23) > 0.0 && std::abs(d12) > std::abs(d23) && h2 > h3 && h1 > h2) {
    double order = std::log(std::abs(d12) / std::abs(d23)) / std::log(h2 / h3);
    double factor = std::pow(h2 / h3, order);
    row.values["order"] = order;
    row.values["value"] = v3 + d23 / (factor - 1.0);
  } else {
    row.values["order"] = 0.0;  // not in the asymptotic regime; report the finest value
    row.values["value"] = v3;
  }
  return rep;
}

// ---------------------------------------------------------------- perisolve --

Report run_perisolve(const ExperimentConfig& cfg) {
  if (cfg.fields.empty())
    throw ConfigError("config field 'fields': perisolve needs the load field first");
  if (!cfg.aux_domain)
    throw ConfigError("config field 'aux_domain': perisolve needs the constrained region");
  Domain dom = cfg.domain.build();
  Domain omega = cfg.aux_domain->build();
  int dim = dom.n();
  VectorField fext = cfg.fields[0].build(dim);
  int degree = static_cast<int>(cfg.option_or("degree", 2.0));

  CutoffFn chi = [&]() {
    std::string kind = cfg.label_or("cutoff", "radial_bump");
    if (kind == "radial_bump") {
      auto [lo, hi] = dom.bounding_box();
      Vec c = Vec::zero(dim);
      for (int i = 0; i < dim; ++i)
        c[i] = cfg.option_or("cutoff_c" + std::to_string(i + 1), 0.5 * (lo[i] + hi[i]));
      return CutoffFn::radial_bump(c, cfg.option_or("cutoff_r", 0.4));
    }
    if (kind == "axis_ramp")
      return CutoffFn::axis_ramp(dim, static_cast<int>(cfg.option_or("cutoff_axis", 1.0)) - 1,
                                 cfg.option_or("cutoff_t0", 0.3),
                                 cfg.option_or("cutoff_t1", 0.5));
    throw ConfigError("config field 'labels.cutoff': '" + kind +
                      "' is not radial_bump or axis_ramp");
  }();

  auto [lo, hi] = dom.bounding_box();
  BasisSet basis = make_basis(dim, degree, lo, hi);
  Report rep;
  for (double h : cfg.grid.h) {
    Grid grid = cfg.grid.build(dom, h);
    double t0 = omp_get_wtime();
    PeridynamicSolution sol =
        solve_peridynamic(fext, omega, chi, basis, grid, cfg.s, cfg.grid.refine_depth);
    ReportRow& row = rep.add("solve@h=" + hkey(h));
    row.values["h"] = h;
    row.values["energy"] = sol.energy;
    row.values["residual"] = sol.residual;
    row.values["coef_norm"] = sol.coefs.norm();
    row.values["coef_max"] = sol.coefs.cwiseAbs().maxCoeff();
    row.values["span"] = static_cast<double>(sol.coefs.size());
    row.values["runtime_ms"] = (omp_get_wtime() - t0) * 1e3;
    row.tags["cutoff"] = cfg.label_or("cutoff", "radial_bump");
  }
  return rep;
}

// ------------------------------------------------------------ probe-ps-lt-1 --

Report run_probe(const ExperimentConfig& cfg) {
  Domain dom = cfg.domain.build();
  if (dom.kind() != Domain::Kind::epigraph && dom.kind() != Domain::Kind::halfspace)
    throw ConfigError(
        "config field 'domain.kind': probe-ps-lt-1 needs an epigraph or halfspace domain");
  int dim = dom.n();
  FracParams par(cfg.s, cfg.p, dim);
  double lam = cfg.option_or("lam", 1.0);
  double dmin = cfg.option_or("dist_min", 0.05);
  double dmax = cfg.option_or("dist_max", 0.4);
  int dcount = static_cast<int>(cfg.option_or("dist_count", 8.0));
  if (!(dmin > 0.0) || !(dmax > dmin) || dcount < 2)
    throw ConfigError("config field 'options': need 0 < dist_min < dist_max and dist_count >= 2");

  auto [lo, hi] = dom.bounding_box();
  double xc = 0.5 * (lo[0] + hi[0]);
  std::vector<Vec> zs;
  for (int i = 0; i < dcount; ++i) {
    double t = static_cast<double>(i) / (dcount - 1);
    double d = dmin * std::pow(dmax / dmin, t);
    Vec z = Vec::zero(dim);
    z[0] = xc;
    Vec zp = Vec::zero(dim - 1);
    zp[0] = xc;
    z[dim - 1] = dom.graph()(zp) + d;
    zs.push_back(z);
  }
  Grid dgrid = cfg.grid.build(dom, cfg.grid.h.front());
  double t0 = omp_get_wtime();
  auto profile = mirror_decay_profile(dom.graph(), lam, par, zs, dgrid);
  double ms = (omp_get_wtime() - t0) * 1e3;

  Report rep;
  std::vector<std::pair<double, double>> xy;
  for (size_t i = 0; i < profile.size(); ++i) {
    ReportRow& row = rep.add("z" + std::to_string(i));
    row.values["dist"] = profile[i].dist;
    row.values["value"] = profile[i].value;
    xy.push_back({profile[i].dist, profile[i].value});
  }
  double slope = loglog_slope(xy);
  ReportRow& row = rep.add("slope");
  row.values["slope"] = slope;
  row.values["expected"] = -par.p * par.s;
  row.values["gap"] = std::abs(slope + par.p * par.s);
  row.values["runtime_ms"] = ms;
  return rep;
}

Report dispatch(const ExperimentConfig& cfg) {
  if (cfg.subcommand == "seminorm") return run_seminorm(cfg);
  if (cfg.subcommand == "extend") return run_extend(cfg);
  if (cfg.subcommand == "korn-constant") return run_korn(cfg);
  if (cfg.subcommand == "hardy") return run_hardy(cfg);
  if (cfg.subcommand == "cover") return run_cover(cfg);
  if (cfg.subcommand == "convergence") return run_convergence(cfg);
  if (cfg.subcommand == "perisolve") return run_perisolve(cfg);
  if (cfg.subcommand == "probe-ps-lt-1") return run_probe(cfg);
  throw ConfigError("config field 'subcommand': '" + cfg.subcommand + "' is not a subcommand");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional seminorms, extension operators and Korn constants"};
  app.require_subcommand(1);

  std::string cfg_path, out_flag;
  int threads_flag = 0;
  const std::vector<std::string> names = {"seminorm",    "extend",    "korn-constant",
                                          "hardy",       "cover",     "convergence",
                                          "perisolve",   "probe-ps-lt-1"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", cfg_path, "JSON experiment config")->required();
    sub->add_option("--out", out_flag, "report path (.csv writes a .json mirror too)");
    sub->add_option("--threads", threads_flag, "OpenMP thread count");
  }
  CLI::App* acc = app.add_subcommand("acceptance", "run the integration gate");
  std::string only_list;
  bool corrupt = false;
  acc->add_option("--only", only_list, "comma-separated criterion ids");
  acc->add_flag("--corrupt-coefficient", corrupt, "sabotage hook; criterion 4 must then fail");
  acc->add_option("--threads", threads_flag, "OpenMP thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (acc->parsed()) {
      if (threads_flag > 0) omp_set_num_threads(threads_flag);
      fracorn::AcceptanceOptions opt;
      opt.corrupt_coefficient = corrupt;
      std::stringstream ss(only_list);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) opt.only.push_back(std::stoi(tok));
      return fracorn::acceptance_main(opt, std::cout);
    }

    fracorn::ExperimentConfig cfg = fracorn::load_config(cfg_path);
    std::string invoked = app.get_subcommands().front()->get_name();
    if (cfg.subcommand != invoked)
      throw fracorn::ConfigError("config field 'subcommand': '" + cfg.subcommand +
                                 "' does not match the invoked subcommand '" + invoked + "'");
    int threads = resolve_threads(threads_flag, cfg.threads);
    if (threads > 0) omp_set_num_threads(threads);

    fracorn::Report rep = dispatch(cfg);
    std::cout << rep.to_csv();
    std::string out = !out_flag.empty() ? out_flag : cfg.out;
    if (!out.empty()) rep.write(out);
    return 0;
  } catch (const fracorn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fracorn::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
