#include "fracorn/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fracorn {

namespace {
constexpr double kTol = 1e-9;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
}  // namespace

// ---------------------------------------------------------------- LipschitzFn

LipschitzFn LipschitzFn::affine(const std::vector<double>& a, double b) {
  LipschitzFn f;
  f.kind_ = Kind::affine;
  f.dim_ = static_cast<int>(a.size());
  if (f.dim_ < 1 || f.dim_ > kMaxDim - 1) throw ConfigError("affine graph: dimension out of range");
  f.coef_ = a;
  f.coef_.push_back(b);
  double m2 = 0.0;
  for (double ai : a) m2 += ai * ai;
  f.M_ = std::sqrt(m2);
  f.name_ = "affine";
  return f;
}

LipschitzFn LipschitzFn::constant(int dim, double c) {
  return affine(std::vector<double>(static_cast<size_t>(dim), 0.0), c);
}

LipschitzFn LipschitzFn::pwl(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ConfigError("pwl graph: need >= 2 nodes");
  for (size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw ConfigError("pwl graph: nodes not strictly increasing");
  LipschitzFn f;
  f.kind_ = Kind::pwl;
  f.dim_ = 1;
  f.xs_ = xs;
  f.ys_ = ys;
  double M = 0.0;
  for (size_t i = 1; i < xs.size(); ++i)
    M = std::max(M, std::abs(ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
  f.M_ = M;
  f.name_ = "pwl";
  return f;
}

LipschitzFn LipschitzFn::analytic(int dim, std::function<double(const Vec&)> fn, double M,
                                  const Vec& sample_lo, const Vec& sample_hi,
                                  const std::string& name) {
  if (dim < 1 || dim > kMaxDim - 1) throw ConfigError("analytic graph: dimension out of range");
  LipschitzFn f;
  f.kind_ = Kind::analytic;
  f.dim_ = dim;
  f.fn_ = std::move(fn);
  f.M_ = M;
  f.name_ = name;
  // Validate the claimed constant by difference quotients between adjacent
  // dense samples.
  const int N = (dim == 1) ? 512 : 48;
  auto at = [&](int i, int j) {
    Vec p = Vec::zero(dim);
    p[0] = sample_lo[0] + (sample_hi[0] - sample_lo[0]) * i / N;
    if (dim > 1) p[1] = sample_lo[1] + (sample_hi[1] - sample_lo[1]) * j / N;
    return p;
  };
  const int Nj = (dim == 1) ? 0 : N;
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= Nj; ++j) {
      Vec p = at(i, j);
      double fp = f.fn_(p);
      for (int di = 0; di <= 1; ++di) {
        for (int dj = 0; dj <= ((dim == 1) ? 0 : 1); ++dj) {
          if (di == 0 && dj == 0) continue;
          if (i + di > N || j + dj > Nj) continue;
          Vec q = at(i + di, j + dj);
          double d = (q - p).norm();
          if (d <= 0) continue;
          if (std::abs(f.fn_(q) - fp) > M * d * (1.0 + 1e-9) + 1e-12)
            throw ConfigError("analytic graph '" + name +
                              "': sampled difference quotient exceeds the claimed Lipschitz constant");
        }
      }
    }
  }
  return f;
}

double LipschitzFn::operator()(const Vec& xp) const {
  switch (kind_) {
    case Kind::affine: {
      double v = coef_[static_cast<size_t>(dim_)];
      for (int i = 0; i < dim_; ++i) v += coef_[static_cast<size_t>(i)] * xp[i];
      return v;
    }
    case Kind::pwl: {
      double t = xp[0];
      const auto& xs = xs_;
      const auto& ys = ys_;
      if (t <= xs.front()) {
        double s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return ys.front() + s * (t - xs.front());
      }
      if (t >= xs.back()) {
        size_t m = xs.size();
        double s = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
        return ys.back() + s * (t - xs.back());
      }
      auto it = std::upper_bound(xs.begin(), xs.end(), t);
      size_t i = static_cast<size_t>(it - xs.begin());
      double w = (t - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
    case Kind::analytic:
      return fn_(xp);
  }
  return 0.0;
}

double LipschitzFn::eval1(double t) const {
  Vec p = Vec::zero(1);
  p[0] = t;
  return (*this)(p);
}

std::pair<double, double> LipschitzFn::range_on(const Vec& lo, const Vec& hi) const {
  switch (kind_) {
    case Kind::affine: {
      double vmin = coef_[static_cast<size_t>(dim_)], vmax = vmin;
      for (int i = 0; i < dim_; ++i) {
        double a = coef_[static_cast<size_t>(i)];
        vmin += a * (a >= 0 ? lo[i] : hi[i]);
        vmax += a * (a >= 0 ? hi[i] : lo[i]);
      }
      return {vmin, vmax};
    }
    case Kind::pwl: {
      double vmin = std::min(eval1(lo[0]), eval1(hi[0]));
      double vmax = std::max(eval1(lo[0]), eval1(hi[0]));
      for (size_t i = 0; i < xs_.size(); ++i) {
        if (xs_[i] > lo[0] && xs_[i] < hi[0]) {
          vmin = std::min(vmin, ys_[i]);
          vmax = std::max(vmax, ys_[i]);
        }
      }
      return {vmin, vmax};
    }
    case Kind::analytic: {
      const int N = 64;
      double vmin = 0, vmax = 0;
      double cell2 = 0.0;
      for (int d = 0; d < dim_; ++d) {
        double step = (hi[d] - lo[d]) / N;
        cell2 += step * step;
      }
      double cushion = M_ * 0.5 * std::sqrt(cell2);
      bool first = true;
      const int Nj = (dim_ == 1) ? 0 : N;
      for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= Nj; ++j) {
          Vec p = Vec::zero(dim_);
          p[0] = lo[0] + (hi[0] - lo[0]) * i / N;
          if (dim_ > 1) p[1] = lo[1] + (hi[1] - lo[1]) * j / N;
          double v = fn_(p);
          if (first || v < vmin) vmin = v;
          if (first || v > vmax) vmax = v;
          first = false;
        }
      }
      return {vmin - cushion, vmax + cushion};
    }
  }
  return {0, 0};
}

LipschitzFn LipschitzFn::mcshane_extend(double a, double b) const {
  if (dim_ != 1) throw ConfigError("mcshane_extend: only 1-d graph functions supported");
  if (!(b > a)) throw ConfigError("mcshane_extend: empty native interval");
  const int N = 4096;
  auto samples = std::make_shared<std::vector<std::pair<double, double>>>();
  samples->reserve(N + 1);
  for (int i = 0; i <= N; ++i) {
    double t = a + (b - a) * i / N;
    samples->push_back({t, eval1(t)});
  }
  for (int i = 1; i <= N; ++i) {
    auto [t0, f0] = (*samples)[static_cast<size_t>(i - 1)];
    auto [t1, f1] = (*samples)[static_cast<size_t>(i)];
    if (std::abs(f1 - f0) > M_ * (t1 - t0) * (1.0 + 1e-9) + 1e-12)
      throw ConfigError("mcshane_extend: native samples violate the Lipschitz constant");
  }
  LipschitzFn base = *this;
  double M = M_;
  LipschitzFn out;
  out.kind_ = Kind::analytic;
  out.dim_ = 1;
  out.M_ = M;
  out.name_ = "mcshane(" + name_ + ")";
  out.fn_ = [base, samples, a, b, M](const Vec& xp) {
    double t = xp[0];
    if (t >= a && t <= b) return base.eval1(t);
    double best = (*samples)[0].second + M * std::abs(t - (*samples)[0].first);
    for (size_t i = 1; i < samples->size(); ++i) {
      double v = (*samples)[i].second + M * std::abs(t - (*samples)[i].first);
      if (v < best) best = v;
    }
    return best;
  };
  return out;
}

// --------------------------------------------------------------------- Domain

Domain Domain::box(const Vec& lo, const Vec& hi) {
  Domain d;
  d.kind_ = Kind::box;
  d.n_ = lo.n;
  for (int i = 0; i < lo.n; ++i)
    if (!(hi[i] > lo[i])) throw ConfigError("box domain: empty extent");
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::epigraph(LipschitzFn f, const Vec& window_lo, const Vec& window_hi) {
  Domain d = box(window_lo, window_hi);
  d.kind_ = Kind::epigraph;
  if (f.dim() != d.n_ - 1) throw ConfigError("epigraph domain: graph dimension mismatch");
  d.f_ = std::make_shared<LipschitzFn>(std::move(f));
  return d;
}

Domain Domain::hypograph(LipschitzFn f, const Vec& window_lo, const Vec& window_hi) {
  Domain d = box(window_lo, window_hi);
  d.kind_ = Kind::hypograph;
  if (f.dim() != d.n_ - 1) throw ConfigError("hypograph domain: graph dimension mismatch");
  d.f_ = std::make_shared<LipschitzFn>(std::move(f));
  return d;
}

Domain Domain::halfspace(const Vec& window_lo, const Vec& window_hi) {
  Domain d = box(window_lo, window_hi);
  d.kind_ = Kind::halfspace;
  d.f_ = std::make_shared<LipschitzFn>(LipschitzFn::constant(d.n_ - 1, 0.0));
  return d;
}

Domain Domain::angular(double alpha, double radius) {
  if (!(radius > 0)) throw ConfigError("angular domain: radius must be positive");
  Domain d;
  d.kind_ = Kind::angular;
  d.n_ = 2;
  d.alpha_ = alpha;
  d.radius_ = radius;
  d.lo_ = Vec(0.0, std::min(0.0, alpha * radius));
  d.hi_ = Vec(radius, radius);
  return d;
}

Domain Domain::polygon(const std::vector<Vec>& vertices) {
  if (vertices.size() < 3) throw ConfigError("polygon domain: need >= 3 vertices");
  Domain d;
  d.kind_ = Kind::polygon;
  d.n_ = 2;
  d.verts_ = vertices;
  size_t m = vertices.size();
  double scale = 0.0;
  for (size_t i = 0; i < m; ++i) scale = std::max(scale, vertices[i].inftyNorm());
  for (size_t i = 0; i < m; ++i) {
    const Vec& p0 = vertices[i];
    const Vec& p1 = vertices[(i + 1) % m];
    const Vec& p2 = vertices[(i + 2) % m];
    double cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0]);
    if (cross <= 1e-12 * scale * scale)
      throw ConfigError("polygon domain: vertices not strictly convex CCW");
  }
  Vec lo = vertices[0], hi = vertices[0];
  for (const Vec& v : vertices)
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

bool Domain::contains(const Vec& x) const {
  switch (kind_) {
    case Kind::box:
      for (int i = 0; i < n_; ++i)
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
      return true;
    case Kind::epigraph:
    case Kind::halfspace: {
      for (int i = 0; i < n_; ++i)
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
      Vec xp = Vec::zero(n_ - 1);
      for (int i = 0; i < n_ - 1; ++i) xp[i] = x[i];
      return x[n_ - 1] > (*f_)(xp);
    }
    case Kind::hypograph: {
      for (int i = 0; i < n_; ++i)
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
      Vec xp = Vec::zero(n_ - 1);
      for (int i = 0; i < n_ - 1; ++i) xp[i] = x[i];
      return x[n_ - 1] < (*f_)(xp);
    }
    case Kind::angular:
      return x[0] > 0.0 && alpha_ * x[0] < x[1] && x.squaredNorm() <= radius_ * radius_;
    case Kind::polygon: {
      size_t m = verts_.size();
      for (size_t i = 0; i < m; ++i) {
        const Vec& p0 = verts_[i];
        const Vec& p1 = verts_[(i + 1) % m];
        double cross = (p1[0] - p0[0]) * (x[1] - p0[1]) - (p1[1] - p0[1]) * (x[0] - p0[0]);
        if (cross < 0.0) return false;
      }
      return true;
    }
  }
  return false;
}

std::pair<Vec, Vec> Domain::bounding_box() const { return {lo_, hi_}; }

std::optional<double> Domain::volume() const {
  switch (kind_) {
    case Kind::box: {
      double v = 1.0;
      for (int i = 0; i < n_; ++i) v *= hi_[i] - lo_[i];
      return v;
    }
    case Kind::halfspace: {
      double v = 1.0;
      for (int i = 0; i < n_ - 1; ++i) v *= hi_[i] - lo_[i];
      double bottom = std::max(lo_[n_ - 1], 0.0);
      if (hi_[n_ - 1] <= bottom) return 0.0;
      return v * (hi_[n_ - 1] - bottom);
    }
    case Kind::epigraph: {
      // Column integral of the clamped height above the graph; composite
      // midpoint fine enough for a reference value.
      double height = hi_[n_ - 1] - lo_[n_ - 1];
      if (n_ == 2) {
        const int N = 1 << 15;
        double w = (hi_[0] - lo_[0]) / N;
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
          double t = lo_[0] + (i + 0.5) * w;
          s += clamp(hi_[1] - (*f_).eval1(t), 0.0, height);
        }
        return s * w;
      }
      const int N = 512;
      double wx = (hi_[0] - lo_[0]) / N, wy = (hi_[1] - lo_[1]) / N;
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          Vec p = Vec::zero(2);
          p[0] = lo_[0] + (i + 0.5) * wx;
          p[1] = lo_[1] + (j + 0.5) * wy;
          s += clamp(hi_[2] - (*f_)(p), 0.0, height);
        }
      return s * wx * wy;
    }
    case Kind::hypograph: {
      double height = hi_[n_ - 1] - lo_[n_ - 1];
      if (n_ == 2) {
        const int N = 1 << 15;
        double w = (hi_[0] - lo_[0]) / N;
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
          double t = lo_[0] + (i + 0.5) * w;
          s += clamp((*f_).eval1(t) - lo_[1], 0.0, height);
        }
        return s * w;
      }
      const int N = 512;
      double wx = (hi_[0] - lo_[0]) / N, wy = (hi_[1] - lo_[1]) / N;
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          Vec p = Vec::zero(2);
          p[0] = lo_[0] + (i + 0.5) * wx;
          p[1] = lo_[1] + (j + 0.5) * wy;
          s += clamp((*f_)(p) - lo_[2], 0.0, height);
        }
      return s * wx * wy;
    }
    case Kind::angular: {
      double theta = std::atan2(1.0, alpha_);
      return 0.5 * theta * radius_ * radius_;
    }
    case Kind::polygon: {
      double s = 0.0;
      size_t m = verts_.size();
      for (size_t i = 0; i < m; ++i) {
        const Vec& p = verts_[i];
        const Vec& q = verts_[(i + 1) % m];
        s += p[0] * q[1] - q[0] * p[1];
      }
      return 0.5 * s;
    }
  }
  return std::nullopt;
}

const LipschitzFn& Domain::graph() const {
  if (!f_) throw ConfigError("domain has no graph function");
  return *f_;
}

// --------------------------------------------------------------------- PhiMap

namespace {
Vec strip_last(const Vec& x) {
  Vec xp = Vec::zero(x.n - 1);
  for (int i = 0; i < x.n - 1; ++i) xp[i] = x[i];
  return xp;
}
}  // namespace

Vec phi_forward(const PhiMap& m, const Vec& x) {
  if (!(m.eta > 0)) throw ConfigError("phi_forward: eta must be positive");
  Vec xp = strip_last(x);
  double fx = m.f(xp);
  double scale = 1.0 + std::abs(fx) + std::abs(x[x.n - 1]);
  if (x[x.n - 1] > fx + kTol * scale)
    throw ConfigError("phi_forward: input point lies above the graph");
  Vec y = x;
  y[x.n - 1] = fx + m.eta * (fx - x[x.n - 1]);
  return y;
}

Vec phi_inverse(const PhiMap& m, const Vec& y) {
  if (!(m.eta > 0)) throw ConfigError("phi_inverse: eta must be positive");
  Vec yp = strip_last(y);
  double fy = m.f(yp);
  double scale = 1.0 + std::abs(fy) + std::abs(y[y.n - 1]);
  if (y[y.n - 1] < fy - kTol * scale)
    throw ConfigError("phi_inverse: input point lies below the graph");
  Vec x = y;
  x[y.n - 1] = fy - (y[y.n - 1] - fy) / m.eta;
  return x;
}

Vec phi_star(const LipschitzFn& f, double lambda, const Vec& x) {
  if (!(lambda > 0)) throw ConfigError("phi_star: lambda must be positive");
  Vec xp = strip_last(x);
  double fx = f(xp);
  double scale = 1.0 + std::abs(fx) + std::abs(x[x.n - 1]);
  if (x[x.n - 1] < fx - kTol * scale)
    throw ConfigError("phi_star: input point lies below the graph");
  Vec y = x;
  y[x.n - 1] = fx + lambda * (x[x.n - 1] - fx);
  return y;
}

double phi_gradient_norm(const PhiMap& m, int n) {
  double M = m.f.lipschitz();
  return std::sqrt((n - 1) + m.eta * m.eta + (1.0 + m.eta) * (1.0 + m.eta) * M * M);
}

double phi_inverse_gradient_norm(const PhiMap& m, int n) {
  double M = m.f.lipschitz();
  double ie = 1.0 / m.eta;
  return std::sqrt((n - 1) + ie * ie + (1.0 + ie) * (1.0 + ie) * M * M);
}

double phi_jacobian(const PhiMap& m) { return -m.eta; }

double mirror_distance_ratio(const LipschitzFn& f, double lambda, const Vec& x, const Vec& y) {
  double r = (x - y).norm();
  if (r == 0.0) return 0.0;
  PhiMap m{f, lambda};
  Vec xb = phi_inverse(m, x);
  double denom = (xb - y).norm();
  if (denom == 0.0) throw NumericError("mirror_distance_ratio: degenerate denominator");
  return r / denom;
}

double mirror_distance_ratio_bound(double M, double lambda) {
  double eps = (M > 0) ? std::min(0.5, 1.0 / (2.0 * M * (1.0 + lambda))) : 0.5;
  return std::max({1.0, 1.0 / eps, 2.0 * lambda / std::sqrt(1.0 - eps * eps)});
}

// --------------------------------------------------------------- WhitneyCover

namespace {

struct EpiBuild {
  const LipschitzFn* f;
  double accept_factor;
  int max_gen;
  Vec win_lo, win_hi;
  int n;
  std::vector<WhitneyCell>* out;

  void subdivide(const Vec& anchor, double side, int gen) {
    Vec flo = Vec::zero(n - 1), fhi = Vec::zero(n - 1);
    for (int i = 0; i < n - 1; ++i) {
      flo[i] = anchor[i];
      fhi[i] = anchor[i] + side;
    }
    // skip cells fully outside the window horizontally
    for (int i = 0; i < n - 1; ++i)
      if (flo[i] >= win_hi[i] - 1e-12 || fhi[i] <= win_lo[i] + 1e-12) return;
    auto [fmin, fmax] = f->range_on(flo, fhi);
    double bottom = anchor[n - 1];
    double top = bottom + side;
    if (top <= fmin + 1e-15) return;  // fully below the graph
    if (bottom - fmax >= accept_factor * side) {
      bool trunc = false;
      for (int i = 0; i < n; ++i)
        if (anchor[i] < win_lo[i] - 1e-12 || anchor[i] + side > win_hi[i] + 1e-12) trunc = true;
      out->push_back({anchor, side, gen, trunc});
      return;
    }
    if (gen >= max_gen) return;  // unresolved sliver, dropped
    double h = side / 2.0;
    int kids = 1 << n;
    for (int c = 0; c < kids; ++c) {
      Vec ca = anchor;
      for (int i = 0; i < n; ++i)
        if (c & (1 << i)) ca[i] += h;
      subdivide(ca, h, gen + 1);
    }
  }
};

}  // namespace

WhitneyCover WhitneyCover::epigraph(const LipschitzFn& f, const Vec& window_lo,
                                    const Vec& window_hi, int max_gen) {
  WhitneyCover cov;
  cov.shape_ = Shape::cube;
  cov.n_ = f.dim() + 1;
  cov.f_ = std::make_shared<LipschitzFn>(f);
  cov.win_lo_ = window_lo;
  cov.win_hi_ = window_hi;
  int n = cov.n_;
  double M = f.lipschitz();
  double sq = std::sqrt(static_cast<double>(n - 1));
  double accept = std::max(1.0, 0.75 * (1.0 + M * sq));
  double a0 = window_hi[n - 1] - window_lo[n - 1];
  if (!(a0 > 0)) throw ConfigError("whitney epigraph: empty vertical extent");

  EpiBuild b{&f, accept, max_gen, window_lo, window_hi, n, &cov.cells_};
  // root cubes of side a0 tiling the window horizontally
  std::vector<int> counts(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i)
    counts[static_cast<size_t>(i)] =
        std::max(1, static_cast<int>(std::ceil((window_hi[i] - window_lo[i]) / a0 - 1e-12)));
  std::vector<int> idx(static_cast<size_t>(n - 1), 0);
  while (true) {
    Vec anchor = Vec::zero(n);
    for (int i = 0; i < n - 1; ++i) anchor[i] = window_lo[i] + a0 * idx[static_cast<size_t>(i)];
    anchor[n - 1] = window_lo[n - 1];
    b.subdivide(anchor, a0, 0);
    int d = 0;
    while (d < n - 1 && ++idx[static_cast<size_t>(d)] == counts[static_cast<size_t>(d)]) {
      idx[static_cast<size_t>(d)] = 0;
      ++d;
    }
    if (d == n - 1) break;
  }
  if (cov.cells_.empty()) throw ConfigError("whitney epigraph: window produced no cells");

  double a_min = a0;
  for (const auto& c : cov.cells_) a_min = std::min(a_min, c.side);
  cov.resolved_clearance_ = (accept + 1.0 + M * sq) * a_min;
  cov.measure_constants(0x57A71E5EEDull);
  return cov;
}

WhitneyCover WhitneyCover::angular(double alpha, double radius, int gens) {
  if (!(radius > 0)) throw ConfigError("whitney angular: radius must be positive");
  WhitneyCover cov;
  cov.shape_ = Shape::parallelogram;
  cov.n_ = 2;
  cov.alpha_ = alpha;
  cov.radius_ = radius;
  int k_hi = static_cast<int>(std::floor(std::log2(radius * 0.5)));
  int k_lo = k_hi - gens + 1;
  for (int k = k_hi; k >= k_lo; --k) {
    double a = std::ldexp(1.0, k);
    for (int i = 0;; ++i) {
      double x0 = i * a;
      // image-space corners of the sheared cell
      bool any_in = false, all_in = true;
      for (int cx = 0; cx <= 1; ++cx)
        for (int cs = 0; cs <= 1; ++cs) {
          double px = x0 + cx * a;
          double ps = a + cs * a;
          Vec img(px, ps + alpha * px);
          bool in = img.squaredNorm() <= radius * radius;
          any_in |= in;
          all_in &= in;
        }
      if (!any_in) break;
      Vec anchor(x0, a + alpha * x0);
      cov.cells_.push_back({anchor, a, k, !all_in});
    }
  }
  if (cov.cells_.empty()) throw ConfigError("whitney angular: radius too small for requested rows");
  cov.resolved_clearance_ = std::ldexp(1.0, k_lo);
  cov.measure_constants(0x57A71E5EEDull);
  return cov;
}

double WhitneyCover::clearance(const Vec& p) const {
  if (shape_ == Shape::cube) {
    Vec xp = Vec::zero(n_ - 1);
    for (int i = 0; i < n_ - 1; ++i) xp[i] = p[i];
    return p[n_ - 1] - (*f_)(xp);
  }
  return p[1] - alpha_ * p[0];
}

bool WhitneyCover::cell_contains(size_t k, const Vec& p) const {
  const WhitneyCell& c = cells_[k];
  if (shape_ == Shape::cube) {
    for (int i = 0; i < n_; ++i)
      if (p[i] < c.anchor[i] || p[i] > c.anchor[i] + c.side) return false;
    return true;
  }
  double px = p[0];
  double ps = p[1] - alpha_ * p[0];
  double ax = c.anchor[0];
  double as = c.anchor[1] - alpha_ * c.anchor[0];
  return px >= ax && px <= ax + c.side && ps >= as && ps <= as + c.side;
}

bool WhitneyCover::doubled_contains(size_t k, const Vec& p) const {
  const WhitneyCell& c = cells_[k];
  if (shape_ == Shape::cube) {
    for (int i = 0; i < n_; ++i) {
      double ctr = c.anchor[i] + c.side / 2.0;
      if (std::abs(p[i] - ctr) > c.side) return false;
    }
    return true;
  }
  double px = p[0];
  double ps = p[1] - alpha_ * p[0];
  double ax = c.anchor[0];
  double as = c.anchor[1] - alpha_ * c.anchor[0];
  return px >= ax && px <= ax + 2.0 * c.side && ps >= as && ps <= as + 2.0 * c.side;
}

std::vector<Vec> WhitneyCover::doubled_corners(size_t k) const {
  const WhitneyCell& c = cells_[k];
  std::vector<Vec> out;
  if (shape_ == Shape::cube) {
    int kids = 1 << n_;
    for (int b = 0; b < kids; ++b) {
      Vec p = Vec::zero(n_);
      for (int i = 0; i < n_; ++i) {
        double ctr = c.anchor[i] + c.side / 2.0;
        p[i] = ctr + ((b & (1 << i)) ? c.side : -c.side);
      }
      out.push_back(p);
    }
    return out;
  }
  double ax = c.anchor[0];
  double as = c.anchor[1] - alpha_ * c.anchor[0];
  for (int bx = 0; bx <= 1; ++bx)
    for (int bs = 0; bs <= 1; ++bs) {
      double px = ax + 2.0 * c.side * bx;
      double ps = as + 2.0 * c.side * bs;
      out.push_back(Vec(px, ps + alpha_ * px));
    }
  return out;
}

std::optional<size_t> WhitneyCover::owner(const Vec& p) const {
  std::optional<size_t> best;
  for (size_t k = 0; k < cells_.size(); ++k) {
    if (!cell_contains(k, p)) continue;
    if (!best) {
      best = k;
      continue;
    }
    const Vec& a = cells_[*best].anchor;
    const Vec& b = cells_[k].anchor;
    for (int i = 0; i < n_; ++i) {
      if (b[i] < a[i]) {
        best = k;
        break;
      }
      if (b[i] > a[i]) break;
    }
  }
  return best;
}

int WhitneyCover::doubled_count(const Vec& p) const {
  int c = 0;
  for (size_t k = 0; k < cells_.size(); ++k)
    if (doubled_contains(k, p)) ++c;
  return c;
}

void WhitneyCover::measure_constants(uint64_t seed) {
  // c2: smallest concentric enlargement (pre-image space for
  // parallelograms) whose box reaches the graph; maximum over cells.
  double c2 = 0.0;
  for (const auto& c : cells_) {
    if (shape_ == Shape::parallelogram) {
      double as = c.anchor[1] - alpha_ * c.anchor[0];
      c2 = std::max(c2, (2.0 * as + c.side) / c.side);
      continue;
    }
    auto reaches = [&](double fac) {
      Vec flo = Vec::zero(n_ - 1), fhi = Vec::zero(n_ - 1);
      for (int i = 0; i < n_ - 1; ++i) {
        double ctr = c.anchor[i] + c.side / 2.0;
        flo[i] = ctr - fac * c.side / 2.0;
        fhi[i] = ctr + fac * c.side / 2.0;
      }
      double zc = c.anchor[n_ - 1] + c.side / 2.0;
      auto [fmin, fmax] = f_->range_on(flo, fhi);
      return fmax >= zc - fac * c.side / 2.0 && fmin <= zc + fac * c.side / 2.0;
    };
    double hi = 4.0;
    while (!reaches(hi)) {
      hi *= 2.0;
      if (hi > 256.0) throw NumericError("whitney cover: cell cannot reach the graph");
    }
    double lo = 1.0;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (reaches(mid) ? hi : lo) = mid;
    }
    c2 = std::max(c2, hi);
  }
  c2_ = c2;

  // c1: max per-point count of doubled cells, over random points in the
  // resolved part of the covered region plus all cell centers.
  Rng rng(seed);
  int c1 = 0;
  for (const auto& c : cells_) {
    Vec ctr = c.anchor;
    if (shape_ == Shape::cube) {
      for (int i = 0; i < n_; ++i) ctr[i] += c.side / 2.0;
    } else {
      double as = c.anchor[1] - alpha_ * c.anchor[0];
      double px = c.anchor[0] + c.side / 2.0;
      ctr = Vec(px, as + c.side / 2.0 + alpha_ * px);
    }
    c1 = std::max(c1, doubled_count(ctr));
  }
  const int wanted = 100000;
  int got = 0, tries = 0;
  while (got < wanted && tries < wanted * 40) {
    ++tries;
    Vec p = Vec::zero(n_);
    if (shape_ == Shape::cube) {
      for (int i = 0; i < n_; ++i) p[i] = rng.uniform(win_lo_[i], win_hi_[i]);
      Vec xp = Vec::zero(n_ - 1);
      for (int i = 0; i < n_ - 1; ++i) xp[i] = p[i];
      if (p[n_ - 1] - (*f_)(xp) < resolved_clearance_) continue;
    } else {
      double px = rng.uniform(0.0, radius_);
      double ps = rng.uniform(resolved_clearance_, radius_);
      p = Vec(px, ps + alpha_ * px);
      if (p.squaredNorm() > radius_ * radius_) continue;
    }
    ++got;
    c1 = std::max(c1, doubled_count(p));
  }
  c1_ = c1;
}

// ----------------------------------------------------------------- RigidChart

Vec RigidChart::apply(const Vec& x) const {
  Vec d = x - vertex;
  return Vec(rot[0][0] * d[0] + rot[0][1] * d[1], rot[1][0] * d[0] + rot[1][1] * d[1]);
}

Vec RigidChart::apply_inverse(const Vec& x) const {
  // transpose = inverse for a rotation
  Vec r(rot[0][0] * x[0] + rot[1][0] * x[1], rot[0][1] * x[0] + rot[1][1] * x[1]);
  return r + vertex;
}

RigidChart rigid_chart_map(const Domain& poly, size_t vertex_index) {
  if (poly.kind() != Domain::Kind::polygon) throw ConfigError("rigid_chart_map: polygon domain required");
  const auto& v = poly.vertices();
  size_t m = v.size();
  if (vertex_index >= m) throw ConfigError("rigid_chart_map: vertex index out of range");
  const Vec& y = v[vertex_index];
  const Vec& ynext = v[(vertex_index + 1) % m];
  const Vec& yprev = v[(vertex_index + m - 1) % m];
  Vec dout = ynext - y;
  Vec din = yprev - y;
  double lo = dout.norm(), li = din.norm();
  dout *= 1.0 / lo;
  din *= 1.0 / li;
  double cross = dout[0] * din[1] - dout[1] * din[0];
  double dot = dout.dot(din);
  double theta = std::atan2(cross, dot);
  if (!(theta > 1e-9 && theta < 3.14159265358979 - 1e-9))
    throw ConfigError("rigid_chart_map: degenerate interior angle");
  double alpha = dot / cross;  // cot(theta), cross = sin(theta) > 0
  // rotate dout onto (sin(theta), cos(theta)); then din lands on (0, 1)
  double target = std::atan2(std::cos(theta), std::sin(theta));
  double phi = target - std::atan2(dout[1], dout[0]);
  RigidChart ch;
  ch.vertex = y;
  ch.rot[0][0] = std::cos(phi);
  ch.rot[0][1] = -std::sin(phi);
  ch.rot[1][0] = std::sin(phi);
  ch.rot[1][1] = std::cos(phi);
  ch.alpha = alpha;
  ch.theta = theta;
  ch.r = 0.45 * std::min(lo, li);
  return ch;
}

}  // namespace fracorn
