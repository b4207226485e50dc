#include "fracorn/seminorms.hpp"

#include <algorithm>
#include <cmath>

namespace fracorn {

FracParams::FracParams(double s_, double p_, int n_) : s(s_), p(p_), n(n_) {
  if (!(s > 0.0) || !(s < 1.0)) throw ConfigError("fractional order s must lie in (0,1)");
  if (!(p > 1.0)) throw ConfigError("integrability exponent p must exceed 1");
  if (n < 2 || n > kMaxDim) throw ConfigError("dimension n out of supported range");
}

int FracParams::regime() const {
  double ps = p * s;
  if (std::abs(ps - 1.0) < 1e-12) return 0;
  return ps < 1.0 ? -1 : 1;
}

SeminormResult gagliardo(const VectorField& u, const Grid& grid, const FracParams& par,
                         int refine_depth) {
  if (u.n() != grid.n() || grid.n() != par.n)
    throw ConfigError("gagliardo: dimension mismatch between field, grid, and params");
  PairKernelSpec spec;
  spec.beta = par.s * par.p;
  spec.refine_depth = refine_depth;
  double p = par.p;
  spec.g = [&u, p](const Vec& x, const Vec& y) {
    double d2 = (u(x) - u(y)).squaredNorm();
    return std::pow(d2, 0.5 * p);
  };
  double raw = double_integral(grid, grid, spec);
  return {std::pow(raw, 1.0 / p), raw, grid.h(), par};
}

SeminormResult projected(const VectorField& u, const Grid& grid, const FracParams& par,
                         ProjectedForm form, int refine_depth) {
  if (u.n() != grid.n() || grid.n() != par.n)
    throw ConfigError("projected: dimension mismatch between field, grid, and params");
  PairKernelSpec spec;
  spec.refine_depth = refine_depth;
  double p = par.p;
  if (form == ProjectedForm::normalized) {
    spec.beta = par.s * par.p;
    spec.g = [&u, p](const Vec& x, const Vec& y) {
      Vec e = y - x;
      double r = e.norm();
      double t = (u(y) - u(x)).dot(e) / r;
      return std::pow(t * t, 0.5 * p);
    };
  } else {
    spec.beta = (par.s + 1.0) * par.p;
    spec.g = [&u, p](const Vec& x, const Vec& y) {
      double t = (u(y) - u(x)).dot(y - x);
      return std::pow(t * t, 0.5 * p);
    };
  }
  double raw = double_integral(grid, grid, spec);
  return {std::pow(raw, 1.0 / p), raw, grid.h(), par};
}

double lp_norm(const VectorField& u, const Grid& grid, double p) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
  double raw = single_integral(grid, [&](const Vec& x) {
    return std::pow(u(x).squaredNorm(), 0.5 * p);
  });
  return std::pow(raw, 1.0 / p);
}

double perienergy(const VectorField& u, const Grid& grid, double s) {
  if (!(s > 0.0) || !(s < 1.0)) throw ConfigError("perienergy: s must lie in (0,1)");
  int n = grid.n();
  PairKernelSpec spec;
  spec.beta = -static_cast<double>(n);  // kernel factor 1: rho lives in g
  double rho_pow = -0.5 * (n + 2.0 * (s - 1.0));
  spec.g = [&u, rho_pow](const Vec& x, const Vec& y) {
    Vec xi = y - x;
    double r2 = xi.squaredNorm();
    double strain = (u(y) - u(x)).dot(xi) / r2;  // bond strain, unit-less
    return std::pow(r2, rho_pow) * strain * strain;
  };
  return double_integral(grid, grid, spec);
}

namespace {

double hardy_lhs_once(const VectorField& u, const LipschitzFn& f, double lam, double mu,
                      const Grid& grid, const FracParams& par) {
  int n = grid.n();
  return single_integral(grid, [&](const Vec& x) {
    Vec xp = Vec::zero(n - 1);
    for (int i = 0; i < n - 1; ++i) xp[i] = x[i];
    double fx = f(xp);
    double d = x[n - 1] - fx;
    Vec a = x, b = x;
    a[n - 1] = fx + lam * d;
    b[n - 1] = fx + mu * d;
    double diff = u(a)[n - 1] - u(b)[n - 1];
    return std::pow(diff * diff, 0.5 * par.p) / std::pow(std::abs(d), par.p * par.s);
  });
}

}  // namespace

double hardy_lhs(const VectorField& u, const LipschitzFn& f, double lam, double mu,
                 const Grid& grid, const FracParams& par, const HardyOptions& opt,
                 int* enlargements_out) {
  if (!(lam > 0.0) || !(mu > 0.0))
    throw ConfigError("hardy_lhs: scale factors must be positive");
  VectorField cur = u;
  for (int attempt = 0;; ++attempt) {
    try {
      double v = hardy_lhs_once(cur, f, lam, mu, grid, par);
      if (enlargements_out) *enlargements_out = attempt;
      return v;
    } catch (const ConfigError&) {
      if (attempt >= opt.max_enlarge || !u.native_box()) throw;
      cur = cur.enlarged(2.0);
    }
  }
}

HardyResult hardy_ratio(const VectorField& u, const LipschitzFn& f, double lam, double mu,
                        const Grid& grid, const FracParams& par, const HardyOptions& opt) {
  HardyResult r;
  r.lhs = hardy_lhs(u, f, lam, mu, grid, par, opt, &r.enlargements);
  r.projected_raw = projected(u, grid, par).raw_p_power;
  if (r.projected_raw < 1e-14) {
    r.infinite_flag = true;
    r.ratio = 0.0;
    return r;
  }
  r.ratio = r.lhs / r.projected_raw;
  return r;
}

ProductRatioResult product_ratio(const CutoffFn& psi, const VectorField& u, const Grid& grid_u,
                                 const Grid& grid_window, const FracParams& par) {
  ProductRatioResult out;
  VectorField prod = VectorField::cutoff_product(psi, u);
  out.product_proj = projected(prod, grid_window, par).value;
  out.u_proj = projected(u, grid_u, par).value;
  out.u_lp = lp_norm(u, grid_u, par.p);
  out.psi_w1inf = psi.w1inf();
  double denom = out.psi_w1inf * (out.u_lp + out.u_proj);
  if (denom < 1e-14) {
    out.infinite_flag = true;
    return out;
  }
  out.ratio = out.product_proj / denom;
  return out;
}

std::vector<DecaySample> mirror_decay_profile(const LipschitzFn& f, double lam, const FracParams& par,
                                       const std::vector<Vec>& zs, const Grid& dgrid) {
  if (!(lam > 0.0)) throw ConfigError("profile: scale factor must be positive");
  int n = dgrid.n();
  double expo = -0.5 * (n + par.p + par.p * par.s);
  std::vector<DecaySample> out;
  for (const Vec& z : zs) {
    Vec zp = Vec::zero(n - 1);
    for (int i = 0; i < n - 1; ++i) zp[i] = z[i];
    double fz = f(zp);
    double dist = z[n - 1] - fz;
    if (!(dist > 0.0))
      throw ConfigError("profile: sample point on or below the graph at z=" + to_string(z));
    Vec zm = z;  // mirror point below the graph
    zm[n - 1] = fz - (z[n - 1] - fz) / lam;
    double val = single_integral(dgrid, [&](const Vec& y) {
      double num = std::pow((z - y).squaredNorm(), 0.5 * par.p);
      return num * std::pow((zm - y).squaredNorm(), expo);
    });
    out.push_back({z, dist, val});
  }
  return out;
}

double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) throw ConfigError("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : xy) {
    if (!(x > 0.0) || !(y > 0.0)) throw NumericError("slope fit needs positive data");
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double m = static_cast<double>(xy.size());
  double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw NumericError("slope fit: degenerate abscissae");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace fracorn
