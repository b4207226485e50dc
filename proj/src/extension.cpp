#include "fracorn/extension.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace fracorn {

std::array<double, 4> ExtensionCoeffs::constraint_residuals() const {
  return {k + l - 1.0, m + q - 1.0, lambda * k + m, mu * l + q};
}

double ExtensionCoeffs::angular_residual(double alpha) const {
  return alpha * k * (1.0 + lambda) + alpha * l * (1.0 + mu);
}

namespace {

ExtensionCoeffs fill_from_delta(double delta, int n, double M) {
  if (!(delta > 0.0) || !(delta <= 0.5))
    throw ConfigError("extension coefficients: delta must lie in (0, 1/2]");
  ExtensionCoeffs c;
  c.n = n;
  c.M = M;
  c.delta = delta;
  c.lambda = 1.0 - delta;
  c.mu = 1.0 + delta;
  double den = c.mu - c.lambda;  // = 2 delta
  c.k = (1.0 + c.mu) / den;
  c.l = -(1.0 + c.lambda) / den;
  c.m = -c.lambda * (1.0 + c.mu) / den;
  c.q = c.mu * (1.0 + c.lambda) / den;
  return c;
}

}  // namespace

ExtensionCoeffs solve_coefficients(double M, int n, double c2, DeltaVariant variant) {
  if (!(M >= 0.0)) throw ConfigError("solve_coefficients: Lipschitz bound M must be >= 0");
  if (!(c2 >= 1.0)) throw ConfigError("solve_coefficients: cover constant c2 must be >= 1");
  if (n < 2 || n > kMaxDim) throw ConfigError("solve_coefficients: dimension out of range");
  double shift = variant == DeltaVariant::two_plus_M ? 2.0 + M : 1.0 + M;
  double delta = 1.0 / (2.0 * c2 * std::sqrt(static_cast<double>(n)) * shift);
  ExtensionCoeffs c = fill_from_delta(delta, n, M);
  c.c2 = c2;
  c.variant = variant;
  return c;
}

ExtensionCoeffs coeffs_from_delta(double delta, int n, double M) {
  return fill_from_delta(delta, n, M);
}

namespace {

// The two reflected pullbacks of a sub-graph point; fx is f(x').
inline void reflected_points(const Vec& x, double fx, const ExtensionCoeffs& c, Vec& xl, Vec& xm) {
  int n = x.n;
  double depth = fx - x[n - 1];  // > 0 below the graph
  xl = x;
  xm = x;
  xl[n - 1] = fx + c.lambda * depth;
  xm[n - 1] = fx + c.mu * depth;
}

}  // namespace

Vec extend_epigraph(const VectorField& u, const LipschitzFn& f, const ExtensionCoeffs& c,
                    const Vec& x) {
  int n = x.n;
  if (u.n() != n || c.n != n)
    throw ConfigError("extend_epigraph: dimension mismatch between field, coefficients, point");
  Vec xp = Vec::zero(n - 1);
  for (int i = 0; i < n - 1; ++i) xp[i] = x[i];
  double fx = f(xp);
  if (x[n - 1] >= fx) return u(x);
  Vec xl, xm;
  reflected_points(x, fx, c, xl, xm);
  Vec ul = u(xl), um = u(xm);
  Vec out = Vec::zero(n);
  for (int i = 0; i < n - 1; ++i) out[i] = c.k * ul[i] + c.l * um[i];
  out[n - 1] = c.m * ul[n - 1] + c.q * um[n - 1];
  return out;
}

Vec extend_angular(const VectorField& u, double alpha, const ExtensionCoeffs& c, const Vec& x,
                   bool drop_alpha_term) {
  if (x.n != 2 || u.n() != 2 || c.n != 2)
    throw ConfigError("extend_angular: wedge extension is planar only");
  if (!(x[0] > 0.0))
    throw ConfigError("extend_angular: point must lie in the open right half-plane");
  double fx = alpha * x[0];
  if (x[1] >= fx) return u(x);
  Vec xl, xm;
  reflected_points(x, fx, c, xl, xm);
  Vec ul = u(xl), um = u(xm);
  double a_term = drop_alpha_term ? 0.0 : alpha * c.k * (1.0 + c.lambda);
  Vec out = Vec::zero(2);
  out[0] = c.k * ul[0] + c.l * um[0] + a_term * (ul[1] - um[1]);
  out[1] = c.m * ul[1] + c.q * um[1];
  return out;
}

VectorField extension_field_epigraph(const VectorField& u, LipschitzFn f,
                                     const ExtensionCoeffs& c) {
  std::string name = "extend(" + u.name() + ")";
  return VectorField::analytic(
      u.n(), [u, f = std::move(f), c](const Vec& x) { return extend_epigraph(u, f, c, x); },
      std::move(name));
}

VectorField extension_field_angular(const VectorField& u, double alpha, const ExtensionCoeffs& c,
                                    bool drop_alpha_term) {
  std::string name = "wedge-extend(" + u.name() + ")";
  return VectorField::analytic(
      u.n(),
      [u, alpha, c, drop_alpha_term](const Vec& x) {
        return extend_angular(u, alpha, c, x, drop_alpha_term);
      },
      std::move(name));
}

namespace {

// Unnormalized projected-kernel spec for an arbitrary field.
PairKernelSpec cross_spec(const VectorField& E, const FracParams& par) {
  PairKernelSpec spec;
  spec.beta = (par.s + 1.0) * par.p;
  double p = par.p;
  spec.g = [&E, p](const Vec& x, const Vec& y) {
    double t = (E(y) - E(x)).dot(y - x);
    return std::pow(t * t, 0.5 * p);
  };
  return spec;
}

void finish_ratio(ExtensionRatioResult& r, double p) {
  r.split.total = r.split.part_domain + r.split.part_below + 2.0 * r.split.part_mixed;
  if (!(r.split.total >= 0.0)) throw NumericError("extension ratio: negative seminorm power");
  r.extension_norm = std::pow(r.split.total, 1.0 / p);
  r.u_proj = std::pow(r.split.part_domain, 1.0 / p);
}

}  // namespace

ExtensionRatioResult extension_norm_ratio_epigraph(const VectorField& u, const LipschitzFn& f,
                                                   const ExtensionCoeffs& c,
                                                   const Grid& grid_domain,
                                                   const Grid& grid_below, const FracParams& par) {
  if (u.n() != par.n || grid_domain.n() != par.n || grid_below.n() != par.n)
    throw ConfigError("extension ratio: dimension mismatch");
  ExtensionRatioResult r;
  VectorField E = extension_field_epigraph(u, f, c);
  PairKernelSpec spec = cross_spec(E, par);
  r.split.part_domain = projected(u, grid_domain, par, ProjectedForm::unnormalized).raw_p_power;
  r.split.part_below = double_integral(grid_below, grid_below, spec);
  r.split.part_mixed = double_integral(grid_below, grid_domain, spec);
  finish_ratio(r, par.p);
  r.u_companion = gagliardo(u, grid_domain, par).value;
  double np = static_cast<double>(par.n);
  double w = std::pow(1.0 + c.M, 2.0 + np / (2.0 * par.p));
  double w_alt = std::pow(1.0 + c.M, np / 2.0 + 2.0 * par.p);
  r.denom = r.u_proj + w * c.M * r.u_companion;
  r.denom_alt = r.u_proj + w_alt * c.M * r.u_companion;
  if (r.denom < 1e-14 || r.denom_alt < 1e-14) {
    r.infinite_flag = true;
    return r;
  }
  r.ratio = r.extension_norm / r.denom;
  r.ratio_alt = r.extension_norm / r.denom_alt;
  return r;
}

ExtensionRatioResult extension_norm_ratio_angular(const VectorField& u, double alpha,
                                                  const ExtensionCoeffs& c,
                                                  const Grid& grid_domain, const Grid& grid_below,
                                                  const FracParams& par, bool drop_alpha_term) {
  if (par.n != 2) throw ConfigError("extension ratio: wedge variant is planar only");
  if (u.n() != 2 || grid_domain.n() != 2 || grid_below.n() != 2)
    throw ConfigError("extension ratio: dimension mismatch");
  ExtensionRatioResult r;
  VectorField E = extension_field_angular(u, alpha, c, drop_alpha_term);
  PairKernelSpec spec = cross_spec(E, par);
  r.split.part_domain = projected(u, grid_domain, par, ProjectedForm::unnormalized).raw_p_power;
  r.split.part_below = double_integral(grid_below, grid_below, spec);
  r.split.part_mixed = double_integral(grid_below, grid_domain, spec);
  finish_ratio(r, par.p);
  r.u_companion = lp_norm(u, grid_domain, par.p);
  r.denom = r.u_proj + r.u_companion;
  r.denom_alt = r.denom;
  if (r.denom < 1e-14) {
    r.infinite_flag = true;
    return r;
  }
  r.ratio = r.extension_norm / r.denom;
  r.ratio_alt = r.ratio;
  return r;
}

double ii_new_ratio(const VectorField& u, double alpha, const ExtensionCoeffs& c,
                    const Grid& grid_below, const Grid& grid_domain, const FracParams& par) {
  if (par.n != 2 || u.n() != 2) throw ConfigError("ii_new_ratio: planar only");
  PairKernelSpec spec;
  spec.beta = (par.s + 1.0) * par.p;  // exponent 2 + p + ps in the plane
  double p = par.p;
  spec.g = [&u, &c, alpha, p](const Vec& x, const Vec& y) {
    double fx = alpha * x[0];
    Vec xl, xm;
    reflected_points(x, fx, c, xl, xm);
    double t = (u(xl)[1] - u(xm)[1]) * (x[0] - y[0]);
    return std::pow(t * t, 0.5 * p);
  };
  double num = double_integral(grid_below, grid_domain, spec);
  double den = projected(u, grid_domain, par, ProjectedForm::unnormalized).raw_p_power;
  if (den < 1e-14) {
    if (num < 1e-14) return 0.0;
    throw NumericError("ii_new_ratio: vanishing seminorm denominator");
  }
  return num / den;
}

std::vector<MixedTermSample> mixed_term_cancellation(const VectorField& u, const LipschitzFn& f,
                                                     const ExtensionCoeffs& c, const Vec& lo_below,
                                                     const Vec& hi_below, const Vec& lo_dom,
                                                     const Vec& hi_dom, int pairs, uint64_t seed) {
  int n = u.n();
  if (lo_below.n != n || hi_below.n != n || lo_dom.n != n || hi_dom.n != n)
    throw ConfigError("mixed_term_cancellation: box dimension mismatch");
  Rng rng(seed);
  auto draw = [&](const Vec& lo, const Vec& hi, bool below) {
    for (int tries = 0; tries < 10000; ++tries) {
      Vec x = Vec::zero(n);
      for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
      Vec xp = Vec::zero(n - 1);
      for (int i = 0; i < n - 1; ++i) xp[i] = x[i];
      double fx = f(xp);
      if (below ? x[n - 1] < fx : x[n - 1] > fx) return x;
    }
    throw ConfigError("mixed_term_cancellation: sampling box misses the target side");
  };
  std::vector<MixedTermSample> out;
  out.reserve(static_cast<size_t>(pairs));
  for (int it = 0; it < pairs; ++it) {
    MixedTermSample smp;
    smp.x = draw(lo_below, hi_below, true);
    smp.y = draw(lo_dom, hi_dom, false);
    Vec xp = Vec::zero(n - 1);
    for (int i = 0; i < n - 1; ++i) xp[i] = smp.x[i];
    double fx = f(xp);
    Vec xl, xm;
    reflected_points(smp.x, fx, c, xl, xm);
    Vec ul = u(xl), um = u(xm), uy = u(smp.y);

    Vec ex = Vec::zero(n);
    for (int i = 0; i < n - 1; ++i) ex[i] = c.k * ul[i] + c.l * um[i];
    ex[n - 1] = c.m * ul[n - 1] + c.q * um[n - 1];
    smp.decomp_lhs = (ex - uy).dot(smp.x - smp.y);

    double a = c.k * (ul - uy).dot(xl - smp.y);
    double b = c.l * (um - uy).dot(xm - smp.y);
    double cc = (c.k - c.m) * (ul[n - 1] - um[n - 1]) * (smp.y[n - 1] - fx);
    smp.decomp_rhs = a + b + cc;
    double scale = std::max({std::abs(a), std::abs(b), std::abs(cc), std::abs(smp.decomp_lhs),
                             1e-300});
    smp.decomp_rel = std::abs(smp.decomp_lhs - smp.decomp_rhs) / scale;

    double depth = fx - smp.x[n - 1];  // > 0
    smp.t1 = c.k * (ul[n - 1] - uy[n - 1]) * (smp.x[n - 1] - fx - c.lambda * depth);
    smp.t2 = c.l * (um[n - 1] - uy[n - 1]) * (smp.x[n - 1] - fx - c.mu * depth);
    smp.t3 = (c.k - c.m) * (ul[n - 1] - um[n - 1]) * depth;
    smp.three_term_sum = smp.t1 + smp.t2 + smp.t3;
    double tscale = std::max({std::abs(smp.t1), std::abs(smp.t2), std::abs(smp.t3), 1e-300});
    smp.three_term_rel = std::abs(smp.three_term_sum) / tscale;
    out.push_back(smp);
  }
  return out;
}

MixedSplitIntegrals mixed_split_integrals(const VectorField& u, const LipschitzFn& f,
                                          const ExtensionCoeffs& c, const Grid& grid_below,
                                          const Grid& grid_domain, const FracParams& par) {
  int n = par.n;
  if (u.n() != n || grid_below.n() != n || grid_domain.n() != n)
    throw ConfigError("mixed_split_integrals: dimension mismatch");
  double p = par.p;
  MixedSplitIntegrals out;

  VectorField E = extension_field_epigraph(u, f, c);
  PairKernelSpec mixed = cross_spec(E, par);
  out.i_mixed = double_integral(grid_below, grid_domain, mixed);

  auto pullback_spec = [&](double eta, double coeff) {
    PairKernelSpec spec;
    spec.beta = (par.s + 1.0) * par.p;
    spec.g = [&u, &f, eta, coeff, p, n](const Vec& x, const Vec& y) {
      Vec xp = Vec::zero(n - 1);
      for (int i = 0; i < n - 1; ++i) xp[i] = x[i];
      double fx = f(xp);
      Vec xr = x;
      xr[n - 1] = fx + eta * (fx - x[n - 1]);
      double t = coeff * (u(xr) - u(y)).dot(xr - y);
      return std::pow(t * t, 0.5 * p);
    };
    return spec;
  };
  PairKernelSpec s1 = pullback_spec(c.lambda, c.k);
  out.i1 = double_integral(grid_below, grid_domain, s1);
  PairKernelSpec s2 = pullback_spec(c.mu, c.l);
  out.i2 = double_integral(grid_below, grid_domain, s2);

  PairKernelSpec s3;
  s3.beta = (par.s + 1.0) * par.p;
  s3.g = [&u, &f, &c, p, n](const Vec& x, const Vec& y) {
    Vec xp = Vec::zero(n - 1);
    for (int i = 0; i < n - 1; ++i) xp[i] = x[i];
    double fx = f(xp);
    Vec xl, xm;
    reflected_points(x, fx, c, xl, xm);
    double t = (c.k - c.m) * (u(xl)[n - 1] - u(xm)[n - 1]) * (y[n - 1] - fx);
    return std::pow(t * t, 0.5 * p);
  };
  out.i3 = double_integral(grid_below, grid_domain, s3);
  return out;
}

}  // namespace fracorn
