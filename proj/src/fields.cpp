#include "fracorn/fields.hpp"

#include <algorithm>
#include <cmath>

namespace fracorn {

namespace {
constexpr double kPi = 3.14159265358979323846;

double bump1(double t) {  // exp(-1/t) for t > 0, else 0
  return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}
}  // namespace

// ---------------------------------------------------------------- VectorField

VectorField VectorField::analytic(int n, std::function<Vec(const Vec&)> fn, std::string name) {
  VectorField f;
  f.n_ = n;
  f.fn_ = std::move(fn);
  f.name_ = std::move(name);
  return f;
}

VectorField VectorField::grid_sampled(int n, const Vec& lo, const Vec& hi,
                                      const std::vector<int>& counts,
                                      std::vector<Vec> node_values, std::string name) {
  size_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (counts[static_cast<size_t>(i)] < 2) throw ConfigError("grid_sampled: need >= 2 nodes per axis");
    total *= static_cast<size_t>(counts[static_cast<size_t>(i)]);
  }
  if (node_values.size() != total) throw ConfigError("grid_sampled: node count mismatch");
  auto values = std::make_shared<std::vector<Vec>>(std::move(node_values));
  auto cnt = counts;
  VectorField f;
  f.n_ = n;
  f.name_ = std::move(name);
  f.box_ = {lo, hi};
  f.fn_ = [n, lo, hi, cnt, values](const Vec& x) {
    double w[kMaxDim];
    int i0[kMaxDim];
    for (int i = 0; i < n; ++i) {
      if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12)
        throw ConfigError("grid_sampled field: evaluation outside the native box at x=" + to_string(x));
      int m = cnt[static_cast<size_t>(i)];
      double t = (x[i] - lo[i]) / (hi[i] - lo[i]) * (m - 1);
      int k = std::min(m - 2, std::max(0, static_cast<int>(std::floor(t))));
      i0[i] = k;
      w[i] = t - k;
    }
    Vec out = Vec::zero(n);
    int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
      double wc = 1.0;
      size_t off = 0, stride = 1;
      for (int i = 0; i < n; ++i) {
        int bit = (c >> i) & 1;
        wc *= bit ? w[i] : 1.0 - w[i];
        off += stride * static_cast<size_t>(i0[i] + bit);
        stride *= static_cast<size_t>(cnt[static_cast<size_t>(i)]);
      }
      Vec nv = (*values)[off];
      for (int i = 0; i < n; ++i) out[i] += wc * nv[i];
    }
    return out;
  };
  return f;
}

VectorField VectorField::linear_combination(std::vector<VectorField> fields,
                                            std::vector<double> coefs) {
  if (fields.empty() || fields.size() != coefs.size())
    throw ConfigError("linear_combination: size mismatch");
  int n = fields.front().n();
  auto fs = std::make_shared<std::vector<VectorField>>(std::move(fields));
  auto cs = std::make_shared<std::vector<double>>(std::move(coefs));
  VectorField f;
  f.n_ = n;
  f.name_ = "combination";
  f.fn_ = [n, fs, cs](const Vec& x) {
    Vec out = Vec::zero(n);
    for (size_t i = 0; i < fs->size(); ++i) {
      Vec v = (*fs)[i](x);
      for (int k = 0; k < n; ++k) out[k] += (*cs)[i] * v[k];
    }
    return out;
  };
  return f;
}

VectorField VectorField::windowed(VectorField inner, const Vec& lo, const Vec& hi) {
  VectorField f;
  f.n_ = inner.n();
  f.name_ = "windowed(" + inner.name() + ")";
  f.box_ = {lo, hi};
  auto in = std::make_shared<VectorField>(std::move(inner));
  f.inner_ = in;
  int n = f.n_;
  f.fn_ = [n, lo, hi, in](const Vec& x) {
    for (int i = 0; i < n; ++i)
      if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12)
        throw ConfigError("windowed field: evaluation outside the window at x=" + to_string(x));
    return (*in)(x);
  };
  return f;
}

VectorField VectorField::cutoff_product(const CutoffFn& psi, VectorField u) {
  auto p = std::make_shared<CutoffFn>(psi);
  auto in = std::make_shared<VectorField>(std::move(u));
  VectorField f;
  f.n_ = in->n();
  f.name_ = "cutoff*" + in->name();
  int n = f.n_;
  f.fn_ = [n, p, in](const Vec& x) {
    double s = (*p)(x);
    if (s == 0.0) return Vec::zero(n);  // extension by zero outside the support
    Vec v = (*in)(x);
    return s * v;
  };
  return f;
}

Vec VectorField::operator()(const Vec& x) const { return fn_(x); }

std::optional<std::pair<Vec, Vec>> VectorField::native_box() const { return box_; }

VectorField VectorField::enlarged(double factor) const {
  if (!box_) return *this;  // unbounded fields need no enlargement
  if (!inner_) throw ConfigError("field '" + name_ + "' cannot enlarge its native box");
  Vec lo = box_->first, hi = box_->second;
  for (int i = 0; i < n_; ++i) {
    double c = 0.5 * (lo[i] + hi[i]);
    double half = 0.5 * (hi[i] - lo[i]) * factor;
    lo[i] = c - half;
    hi[i] = c + half;
  }
  return windowed(*inner_, lo, hi);
}

// ---------------------------------------------------------------- RigidMotion

Vec RigidMotion::apply(const Vec& x) const {
  Vec out = b;
  out.n = n;
  if (n == 2) {
    out[0] += a[0] * x[1];
    out[1] += -a[0] * x[0];
  } else {
    out[0] += a[0] * x[1] + a[1] * x[2];
    out[1] += -a[0] * x[0] + a[2] * x[2];
    out[2] += -a[1] * x[0] - a[2] * x[1];
  }
  return out;
}

VectorField RigidMotion::as_field() const {
  RigidMotion r = *this;
  return VectorField::analytic(n, [r](const Vec& x) { return r.apply(x); }, "rigid");
}

RigidMotion RigidMotion::random(int n, Rng& rng) {
  RigidMotion r;
  r.n = n;
  r.b = Vec::zero(n);
  int na = (n == 2) ? 1 : 3;
  for (int i = 0; i < na; ++i) r.a[static_cast<size_t>(i)] = rng.uniform(-2.0, 2.0);
  for (int i = 0; i < n; ++i) r.b[i] = rng.uniform(-2.0, 2.0);
  return r;
}

// -------------------------------------------------------------- field library

namespace {
double get(const std::map<std::string, double>& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}
}  // namespace

VectorField field_library(const std::string& name, const std::map<std::string, double>& params,
                          int n) {
  if (name == "identity")
    return VectorField::analytic(n, [](const Vec& x) { return x; }, "identity");
  if (name == "zero")
    return VectorField::analytic(n, [n](const Vec&) { return Vec::zero(n); }, "zero");
  if (name == "constant") {
    Vec c = Vec::zero(n);
    for (int i = 0; i < n; ++i) c[i] = get(params, "c" + std::to_string(i + 1), 0.0);
    return VectorField::analytic(n, [c](const Vec&) { return c; }, "constant");
  }
  if (name == "shear")
    return VectorField::analytic(n, [n](const Vec& x) {
      Vec v = Vec::zero(n);
      v[0] = x[1];
      return v;
    }, "shear");
  if (name == "monomial") {
    int comp = static_cast<int>(get(params, "comp", 1.0)) - 1;
    if (comp < 0 || comp >= n) throw ConfigError("monomial field: comp out of range");
    std::array<int, kMaxDim> k{};
    for (int i = 0; i < n; ++i)
      k[static_cast<size_t>(i)] = static_cast<int>(get(params, "k" + std::to_string(i + 1), 0.0));
    return VectorField::analytic(n, [n, comp, k](const Vec& x) {
      double v = 1.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k[static_cast<size_t>(i)]; ++j) v *= x[i];
      Vec out = Vec::zero(n);
      out[comp] = v;
      return out;
    }, "monomial");
  }
  if (name == "trig") {
    int comp = static_cast<int>(get(params, "comp", 1.0)) - 1;
    if (comp < 0 || comp >= n) throw ConfigError("trig field: comp out of range");
    std::array<double, kMaxDim> d{}, lo{}, hi{};
    for (int i = 0; i < n; ++i) {
      d[static_cast<size_t>(i)] = get(params, "d" + std::to_string(i + 1), 0.0);
      lo[static_cast<size_t>(i)] = get(params, "lo" + std::to_string(i + 1), 0.0);
      hi[static_cast<size_t>(i)] = get(params, "hi" + std::to_string(i + 1), 1.0);
    }
    double amp = get(params, "amp", 1.0);
    return VectorField::analytic(n, [n, comp, d, lo, hi, amp](const Vec& x) {
      double v = amp;
      for (int i = 0; i < n; ++i) {
        size_t si = static_cast<size_t>(i);
        double xi = (x[i] - lo[si]) / (hi[si] - lo[si]);
        v *= std::cos(kPi * d[si] * xi);
      }
      Vec out = Vec::zero(n);
      out[comp] = v;
      return out;
    }, "trig");
  }
  if (name == "random_trig") {
    uint64_t seed = static_cast<uint64_t>(get(params, "seed", 1.0));
    int degree = static_cast<int>(get(params, "degree", 3.0));
    double amp = get(params, "amp", 1.0);
    std::array<double, kMaxDim> lo{}, hi{};
    for (int i = 0; i < n; ++i) {
      lo[static_cast<size_t>(i)] = get(params, "lo" + std::to_string(i + 1), 0.0);
      hi[static_cast<size_t>(i)] = get(params, "hi" + std::to_string(i + 1), 1.0);
    }
    // fixed draw order: component-major, then lexicographic degrees
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    struct Term {
      int comp;
      std::array<int, kMaxDim> d;
      double coef;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (int comp = 0; comp < n; ++comp) {
      std::array<int, kMaxDim> d{};
      while (true) {
        double decay = 1.0;
        for (int i = 0; i < n; ++i) decay += d[static_cast<size_t>(i)] * d[static_cast<size_t>(i)];
        terms->push_back({comp, d, amp * rng.uniform(-1.0, 1.0) / decay});
        int ax = 0;
        while (ax < n && ++d[static_cast<size_t>(ax)] > degree) {
          d[static_cast<size_t>(ax)] = 0;
          ++ax;
        }
        if (ax == n) break;
      }
    }
    return VectorField::analytic(n, [n, lo, hi, terms](const Vec& x) {
      Vec out = Vec::zero(n);
      for (const auto& t : *terms) {
        double v = t.coef;
        for (int i = 0; i < n; ++i) {
          size_t si = static_cast<size_t>(i);
          double xi = (x[i] - lo[si]) / (hi[si] - lo[si]);
          v *= std::cos(kPi * t.d[si] * xi);
        }
        out[t.comp] += v;
      }
      return out;
    }, "random_trig");
  }
  if (name == "grad_bump") {
    Vec c = Vec::zero(n);
    for (int i = 0; i < n; ++i) c[i] = get(params, "c" + std::to_string(i + 1), 0.5);
    double r = get(params, "r", 0.4);
    double strength = get(params, "strength", 1.0);
    return VectorField::analytic(n, [n, c, r, strength](const Vec& x) {
      double t2 = (x - c).squaredNorm() / (r * r);
      if (t2 >= 1.0) return Vec::zero(n);
      double v = std::exp(-1.0 / (1.0 - t2));
      double dv = -v / ((1.0 - t2) * (1.0 - t2));
      Vec g = x - c;
      g *= strength * dv * 2.0 / (r * r);
      return g;
    }, "grad_bump");
  }
  throw ConfigError("unknown field '" + name + "'");
}

// -------------------------------------------------------------------- CutoffFn

CutoffFn CutoffFn::from_closures(int n, std::function<double(const Vec&)> v,
                                 std::function<Vec(const Vec&)> g, double sup_v, double sup_g,
                                 double margin) {
  CutoffFn c;
  c.n_ = n;
  c.val_ = std::move(v);
  c.grad_ = std::move(g);
  c.sup_val_ = sup_v;
  c.sup_grad_ = sup_g;
  c.margin_ = margin;
  return c;
}

CutoffFn CutoffFn::radial_bump(const Vec& center, double rho) {
  if (!(rho > 0)) throw ConfigError("radial_bump: radius must be positive");
  int n = center.n;
  auto val = [center, rho](const Vec& x) {
    double t2 = (x - center).squaredNorm() / (rho * rho);
    return t2 < 1.0 ? std::exp(-1.0 / (1.0 - t2)) : 0.0;
  };
  auto grad = [n, center, rho](const Vec& x) {
    double t2 = (x - center).squaredNorm() / (rho * rho);
    if (t2 >= 1.0) return Vec::zero(n);
    double v = std::exp(-1.0 / (1.0 - t2));
    double dv = -v / ((1.0 - t2) * (1.0 - t2));
    Vec g = x - center;
    g *= dv * 2.0 / (rho * rho);
    return g;
  };
  // radial profile scan for the gradient sup
  double sg = 0.0;
  for (int i = 1; i < 100000; ++i) {
    double t = i / 100000.0;
    double v = std::exp(-1.0 / (1.0 - t * t));
    sg = std::max(sg, v / ((1.0 - t * t) * (1.0 - t * t)) * 2.0 * t / rho);
  }
  return from_closures(n, val, grad, std::exp(-1.0), sg, 0.0);
}

CutoffFn CutoffFn::axis_ramp(int n, int axis, double t0, double t1) {
  if (!(t1 > t0)) throw ConfigError("axis_ramp: need t1 > t0");
  double w = t1 - t0;
  auto S = [](double t) {
    double b0 = bump1(t), b1 = bump1(1.0 - t);
    return (b0 + b1) > 0 ? b0 / (b0 + b1) : (t >= 1.0 ? 1.0 : 0.0);
  };
  auto val = [axis, t0, w, S](const Vec& x) {
    double t = (x[axis] - t0) / w;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return S(t);
  };
  auto grad = [n, axis, t0, w](const Vec& x) {
    double t = (x[axis] - t0) / w;
    Vec g = Vec::zero(n);
    if (t <= 0.0 || t >= 1.0) return g;
    double b0 = bump1(t), b1 = bump1(1.0 - t);
    double db0 = b0 / (t * t);
    double db1 = b1 / ((1.0 - t) * (1.0 - t));  // d/dt bump1(1-t) = -db1
    double D = b0 + b1;
    g[axis] = (db0 * D - b0 * (db0 - db1)) / (D * D) / w;
    return g;
  };
  double sg = 0.0;
  for (int i = 1; i < 100000; ++i) {
    double t = i / 100000.0;
    double b0 = bump1(t), b1 = bump1(1.0 - t);
    double db0 = b0 / (t * t), db1 = b1 / ((1.0 - t) * (1.0 - t));
    double D = b0 + b1;
    sg = std::max(sg, std::abs((db0 * D - b0 * (db0 - db1)) / (D * D)) / w);
  }
  return from_closures(n, val, grad, 1.0, sg, 0.0);
}

std::vector<CutoffFn> cutoff_partition(const Domain& omega, const std::vector<Vec>& centers,
                                       const std::vector<double>& ball_radii,
                                       const std::vector<double>& support_radii) {
  size_t m = centers.size();
  if (m == 0 || ball_radii.size() != m || support_radii.size() != m)
    throw ConfigError("cutoff_partition: size mismatch");
  for (size_t j = 0; j < m; ++j) {
    if (!(support_radii[j] > 0)) throw ConfigError("cutoff_partition: support radius must be positive");
    if (ball_radii[j] < support_radii[j])
      throw ConfigError("cutoff_partition: support radius exceeds its ball");
  }
  auto raw = std::make_shared<std::vector<CutoffFn>>();
  for (size_t j = 0; j < m; ++j) raw->push_back(CutoffFn::radial_bump(centers[j], support_radii[j]));

  // dense coverage check over the domain
  auto [lo, hi] = omega.bounding_box();
  int n = omega.n();
  const int N = (n == 2) ? 96 : 24;
  auto sum_at = [&](const Vec& x) {
    double s = 0.0;
    for (const auto& r : *raw) s += r(x);
    return s;
  };
  std::array<int, kMaxDim> idx{};
  while (true) {
    Vec p = Vec::zero(n);
    for (int i = 0; i < n; ++i)
      p[i] = lo[i] + (hi[i] - lo[i]) * (idx[static_cast<size_t>(i)] + 0.5) / N;
    if (omega.contains(p) && sum_at(p) < 1e-12)
      throw ConfigError("cutoff_partition: covering gap detected near x=" + to_string(p));
    int d = 0;
    while (d < n && ++idx[static_cast<size_t>(d)] == N) {
      idx[static_cast<size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }

  // normalized members with analytic quotient-rule gradients
  std::vector<CutoffFn> out;
  for (size_t j = 0; j < m; ++j) {
    auto val = [raw, j](const Vec& x) {
      double vj = (*raw)[j](x);
      if (vj == 0.0) return 0.0;
      double s = 0.0;
      for (const auto& r : *raw) s += r(x);
      return vj / s;
    };
    auto grd = [raw, j, n](const Vec& x) {
      double vj = (*raw)[j](x);
      if (vj == 0.0) return Vec::zero(n);
      double s = 0.0;
      Vec gs = Vec::zero(n);
      for (const auto& r : *raw) {
        s += r(x);
        gs += r.gradient(x);
      }
      Vec gj = (*raw)[j].gradient(x);
      Vec g = Vec::zero(n);
      for (int i = 0; i < n; ++i) g[i] = (gj[i] * s - vj * gs[i]) / (s * s);
      return g;
    };
    // sampled W^{1,inf} data on the same dense lattice
    double sv = 0.0, sg = 0.0;
    std::array<int, kMaxDim> ix{};
    while (true) {
      Vec p = Vec::zero(n);
      for (int i = 0; i < n; ++i)
        p[i] = lo[i] + (hi[i] - lo[i]) * (ix[static_cast<size_t>(i)] + 0.5) / N;
      if (omega.contains(p)) {
        sv = std::max(sv, std::abs(val(p)));
        sg = std::max(sg, grd(p).norm());
      }
      int d = 0;
      while (d < n && ++ix[static_cast<size_t>(d)] == N) {
        ix[static_cast<size_t>(d)] = 0;
        ++d;
      }
      if (d == n) break;
    }
    out.push_back(CutoffFn::from_closures(n, val, grd, sv, sg, ball_radii[j] - support_radii[j]));
  }
  return out;
}

// -------------------------------------------------------------------- BasisSet

size_t BasisSet::prefix_count(int k) const {
  if (k < 0 || k > K) throw ConfigError("basis prefix: degree out of range");
  size_t nrot = rotation_indices.size();
  size_t modes = 1;
  for (int i = 0; i < n; ++i) modes *= static_cast<size_t>(k + 1);
  return static_cast<size_t>(n) + nrot + static_cast<size_t>(n) * (modes - 1);
}

BasisSet make_basis(int n, int K, const Vec& lo, const Vec& hi) {
  if (K < 0) throw ConfigError("make_basis: negative degree");
  BasisSet b;
  b.n = n;
  b.K = K;
  b.lo = lo;
  b.hi = hi;
  // constants
  for (int c = 0; c < n; ++c) {
    Vec e = Vec::zero(n);
    e[c] = 1.0;
    b.rigid_indices.push_back(b.fields.size());
    b.fields.push_back(VectorField::analytic(n, [e](const Vec&) { return e; },
                                             "const_e" + std::to_string(c + 1)));
  }
  // rotations about the box center
  Vec ctr = Vec::zero(n);
  for (int i = 0; i < n; ++i) ctr[i] = 0.5 * (lo[i] + hi[i]);
  int na = (n == 2) ? 1 : 3;
  for (int k = 0; k < na; ++k) {
    RigidMotion r;
    r.n = n;
    r.a[static_cast<size_t>(k)] = 1.0;
    r.b = Vec::zero(n);
    Vec shift = r.apply(ctr);
    r.b -= shift;  // A (x - ctr)
    b.rigid_indices.push_back(b.fields.size());
    b.rotation_indices.push_back(b.fields.size());
    b.fields.push_back(r.as_field());
  }
  // cosine modes grouped by max degree
  for (int m = 1; m <= K; ++m) {
    for (int c = 0; c < n; ++c) {
      std::array<int, kMaxDim> d{};
      while (true) {
        int mx = 0;
        for (int i = 0; i < n; ++i) mx = std::max(mx, d[static_cast<size_t>(i)]);
        if (mx == m) {
          std::map<std::string, double> par;
          par["comp"] = c + 1;
          for (int i = 0; i < n; ++i) {
            par["d" + std::to_string(i + 1)] = d[static_cast<size_t>(i)];
            par["lo" + std::to_string(i + 1)] = lo[i];
            par["hi" + std::to_string(i + 1)] = hi[i];
          }
          b.fields.push_back(field_library("trig", par, n));
        }
        int ax = 0;
        while (ax < n && ++d[static_cast<size_t>(ax)] > m) {
          d[static_cast<size_t>(ax)] = 0;
          ++ax;
        }
        if (ax == n) break;
      }
    }
  }
  return b;
}

}  // namespace fracorn
