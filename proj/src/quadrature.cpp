#include "fracorn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracorn {

namespace {

constexpr size_t kTile = 64;

// pair relation under a shared lattice
enum class Rel { regular, refine, coincident };

Rel classify(const int* d, int n, bool same_grid) {
  bool all_zero = true, all_within1 = true;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    int a = std::abs(d[i]);
    if (a != 0) all_zero = false;
    if (a > 1) all_within1 = false;
    if (a == 1) ++ones;
  }
  if (all_zero) return Rel::coincident;
  if (same_grid) {
    // refine only face-adjacent pairs; corner-adjacent stays midpoint
    bool face = all_within1 && ones == 1;
    return face ? Rel::refine : Rel::regular;
  }
  return all_within1 ? Rel::refine : Rel::regular;
}

struct PairEnv {
  const Grid* gx;
  const Grid* gy;
  bool same;
  std::array<int, kMaxDim> off;  // gy-frame offset of gx lattice indices
  int L;
  int n;
};

// Recursive subdivision of one singular pair.  A and B are absolute
// integer sub-lattice coordinates (shared frame) at level t; returns the
// pair's refined contribution through emit in fixed order.
template <class Emit>
void subdivide(const PairEnv& e, const GridCell& ca, const GridCell& cb, int t,
               const int* A, const int* B, Emit&& emit) {
  int n = e.n;
  int d[kMaxDim];
  for (int i = 0; i < n; ++i) d[i] = A[i] - B[i];
  Rel rel = classify(d, n, e.same);
  bool at_bottom = (t == e.L);
  if (rel == Rel::regular || at_bottom) {
    if (rel == Rel::coincident) return;  // dropped diagonal at deepest level
    double inv = std::ldexp(1.0, -t);
    double hx = e.gx->h(), hy = e.gy->h();
    Vec x = e.gx->origin(), y = e.gy->origin();
    // A, B live in the gy frame; shift gx back by its offset
    for (int i = 0; i < n; ++i) {
      x[i] += hx * ((A[i] - (e.off[static_cast<size_t>(i)] * (1 << t))) + 0.5) * inv;
      y[i] += hy * ((B[i]) + 0.5) * inv;
    }
    x.n = n;
    y.n = n;
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= hx * inv * hy * inv;
    (void)ca;
    (void)cb;
    emit(x, y, w);
    return;
  }
  int kids = 1 << n;
  int A2[kMaxDim], B2[kMaxDim];
  for (int a = 0; a < kids; ++a) {
    for (int i = 0; i < n; ++i) A2[i] = 2 * A[i] + ((a >> i) & 1);
    for (int b = 0; b < kids; ++b) {
      for (int i = 0; i < n; ++i) B2[i] = 2 * B[i] + ((b >> i) & 1);
      subdivide(e, ca, cb, t + 1, A2, B2, emit);
    }
  }
}

template <class Emit>
void expand_pair_impl(const PairEnv& e, size_t ia, size_t ib, Emit&& emit) {
  const GridCell& ca = e.gx->cells()[ia];
  const GridCell& cb = e.gy->cells()[ib];
  int n = e.n;
  int d[kMaxDim];
  bool related = e.off[kMaxDim - 1] != INT32_MIN;
  Rel rel = Rel::regular;
  if (related) {
    for (int i = 0; i < n; ++i)
      d[i] = ca.idx[static_cast<size_t>(i)] + e.off[static_cast<size_t>(i)] -
             cb.idx[static_cast<size_t>(i)];
    rel = classify(d, n, e.same);
  }
  if (ca.clipped || cb.clipped) {
    // clipped cells are never subdivided; the coincident clipped pair is
    // dropped like the deepest-level diagonal
    if (rel == Rel::coincident) return;
    emit(ca.center, cb.center, ca.volume * cb.volume);
    return;
  }
  if (rel == Rel::regular) {
    emit(ca.center, cb.center, ca.volume * cb.volume);
    return;
  }
  int A[kMaxDim], B[kMaxDim];
  for (int i = 0; i < n; ++i) {
    A[i] = ca.idx[static_cast<size_t>(i)] + e.off[static_cast<size_t>(i)];
    B[i] = cb.idx[static_cast<size_t>(i)];
  }
  subdivide(e, ca, cb, 0, A, B, emit);
}

PairEnv make_env(const Grid& gx, const Grid& gy, int L) {
  PairEnv e;
  e.gx = &gx;
  e.gy = &gy;
  e.n = gx.n();
  bool lattice_ok = gx.same_lattice(gy);
  e.same = lattice_ok && gx.cells().size() == gy.cells().size() &&
           gx.fingerprint() == gy.fingerprint();
  e.L = L;
  if (lattice_ok) {
    e.off = detail::lattice_offset(gx, gy);
  } else {
    e.off.fill(INT32_MIN);
    e.off[kMaxDim - 1] = INT32_MIN;
  }
  return e;
}

bool fingerprint_less(const Grid& a, const Grid& b) {
  auto fa = a.fingerprint(), fb = b.fingerprint();
  for (size_t i = 0; i < fa.size(); ++i) {
    if (fa[i] < fb[i]) return true;
    if (fa[i] > fb[i]) return false;
  }
  return false;
}

}  // namespace

namespace detail {

std::array<int, kMaxDim> lattice_offset(const Grid& gx, const Grid& gy) {
  std::array<int, kMaxDim> off{};
  for (int i = 0; i < gx.n(); ++i)
    off[static_cast<size_t>(i)] =
        static_cast<int>(std::round((gx.origin()[i] - gy.origin()[i]) / gx.h()));
  return off;
}

void expand_pair(const Grid& gx, const Grid& gy, size_t ia, size_t ib, bool same_grid,
                 const int* /*rel*/, int depth_limit,
                 const std::function<void(const Vec&, const Vec&, double)>& emit) {
  PairEnv e = make_env(gx, gy, depth_limit);
  e.same = same_grid;
  expand_pair_impl(e, ia, ib, emit);
}

}  // namespace detail

double pairwise_sum(std::vector<double>& v) {
  size_t m = v.size();
  while (m > 1) {
    size_t k = 0;
    for (size_t i = 0; i + 1 < m; i += 2) v[k++] = v[i] + v[i + 1];
    if (m & 1) v[k++] = v[m - 1];
    m = k;
  }
  return m ? v[0] : 0.0;
}

double double_integral(const Grid& gx_in, const Grid& gy_in, const PairKernelSpec& spec) {
  if (!spec.g) throw ConfigError("double_integral: missing numerator");
  const Grid* gx = &gx_in;
  const Grid* gy = &gy_in;
  bool swapped = false;
  if (&gx_in != &gy_in && fingerprint_less(gy_in, gx_in)) {
    std::swap(gx, gy);
    swapped = true;
  }
  auto g = [&](const Vec& x, const Vec& y) { return swapped ? spec.g(y, x) : spec.g(x, y); };

  PairEnv env = make_env(*gx, *gy, spec.refine_depth);
  const double e_pow = -0.5 * (env.n + spec.beta);
  size_t Nx = gx->cells().size(), Ny = gy->cells().size();
  size_t tx = (Nx + kTile - 1) / kTile, ty = (Ny + kTile - 1) / kTile;
  size_t T = tx * ty;
  std::vector<double> partial(T, 0.0);
  std::vector<std::string> errors(T);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long t = 0; t < static_cast<long long>(T); ++t) {
    size_t bi = static_cast<size_t>(t) / ty, bj = static_cast<size_t>(t) % ty;
    size_t i0 = bi * kTile, i1 = std::min(Nx, i0 + kTile);
    size_t j0 = bj * kTile, j1 = std::min(Ny, j0 + kTile);
    std::vector<double> buf;
    buf.reserve((i1 - i0) * (j1 - j0));
    try {
      for (size_t ia = i0; ia < i1; ++ia) {
        for (size_t ib = j0; ib < j1; ++ib) {
          double pair_total = 0.0;
          expand_pair_impl(env, ia, ib, [&](const Vec& x, const Vec& y, double w) {
            double r2 = (x - y).squaredNorm();
            double val = g(x, y) * std::pow(r2, e_pow) * w;
            if (!std::isfinite(val))
              throw NumericError("double_integral: non-finite kernel value at x=" + to_string(x) +
                                 ", y=" + to_string(y));
            pair_total += val;
          });
          buf.push_back(pair_total);
        }
      }
    } catch (const std::exception& ex) {
      errors[static_cast<size_t>(t)] = ex.what();
      continue;
    }
    partial[static_cast<size_t>(t)] = pairwise_sum(buf);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericError(e);
  return pairwise_sum(partial);
}

double double_integral_serial(const Grid& gx_in, const Grid& gy_in, const PairKernelSpec& spec) {
  if (!spec.g) throw ConfigError("double_integral: missing numerator");
  const Grid* gx = &gx_in;
  const Grid* gy = &gy_in;
  bool swapped = false;
  if (&gx_in != &gy_in && fingerprint_less(gy_in, gx_in)) {
    std::swap(gx, gy);
    swapped = true;
  }
  PairEnv env = make_env(*gx, *gy, spec.refine_depth);
  const double e_pow = -0.5 * (env.n + spec.beta);
  double sum = 0.0, comp = 0.0;  // Kahan
  for (size_t ia = 0; ia < gx->cells().size(); ++ia) {
    for (size_t ib = 0; ib < gy->cells().size(); ++ib) {
      expand_pair_impl(env, ia, ib, [&](const Vec& x, const Vec& y, double w) {
        double r2 = (x - y).squaredNorm();
        double val = (swapped ? spec.g(y, x) : spec.g(x, y)) * std::pow(r2, e_pow) * w;
        if (!std::isfinite(val))
          throw NumericError("double_integral: non-finite kernel value at x=" + to_string(x) +
                             ", y=" + to_string(y));
        double yk = val - comp;
        double tk = sum + yk;
        comp = (tk - sum) - yk;
        sum = tk;
      });
    }
  }
  return sum;
}

void pair_sweep(const Grid& gx, const Grid& gy, double beta, int refine_depth,
                PairAccumulator& acc) {
  PairEnv env = make_env(gx, gy, refine_depth);
  const double e_pow = -0.5 * (env.n + beta);
  size_t Nx = gx.cells().size(), Ny = gy.cells().size();
  size_t tx = (Nx + kTile - 1) / kTile, ty = (Ny + kTile - 1) / kTile;
  size_t T = tx * ty;
  std::vector<std::unique_ptr<PairAccumulator>> partial(T);
  std::vector<std::string> errors(T);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long t = 0; t < static_cast<long long>(T); ++t) {
    size_t bi = static_cast<size_t>(t) / ty, bj = static_cast<size_t>(t) % ty;
    size_t i0 = bi * kTile, i1 = std::min(Nx, i0 + kTile);
    size_t j0 = bj * kTile, j1 = std::min(Ny, j0 + kTile);
    std::unique_ptr<PairAccumulator> local = acc.clone_empty();
    try {
      for (size_t ia = i0; ia < i1; ++ia) {
        for (size_t ib = j0; ib < j1; ++ib) {
          expand_pair_impl(env, ia, ib, [&](const Vec& x, const Vec& y, double w) {
            double r2 = (x - y).squaredNorm();
            double kw = std::pow(r2, e_pow) * w;
            if (!std::isfinite(kw))
              throw NumericError("pair_sweep: non-finite kernel weight at x=" + to_string(x) +
                                 ", y=" + to_string(y));
            local->accumulate(x, y, kw);
          });
        }
      }
    } catch (const std::exception& ex) {
      errors[static_cast<size_t>(t)] = ex.what();
      continue;
    }
    partial[static_cast<size_t>(t)] = std::move(local);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericError(e);
  for (size_t t = 0; t < T; ++t) acc.merge(*partial[t]);
}

double single_integral(const Grid& g, const std::function<double(const Vec&)>& fn) {
  std::vector<double> vals;
  vals.reserve(g.cells().size());
  for (const auto& c : g.cells()) {
    double v = fn(c.center) * c.volume;
    if (!std::isfinite(v))
      throw NumericError("single_integral: non-finite integrand at x=" + to_string(c.center));
    vals.push_back(v);
  }
  return pairwise_sum(vals);
}

std::vector<ConvergenceRow> convergence_study(const std::function<double(double)>& value_at_h,
                                              const std::vector<double>& hs) {
  if (hs.size() < 2) throw ConfigError("convergence_study: need at least two grid spacings");
  std::vector<ConvergenceRow> rows;
  double nan = std::nan("");
  bool monotone = true;
  for (size_t k = 0; k < hs.size(); ++k) {
    ConvergenceRow r{hs[k], value_at_h(hs[k]), nan, nan, true};
    if (k >= 2) {
      double d1 = rows[k - 1].value - rows[k - 2].value;
      double d2 = r.value - rows[k - 1].value;
      if (d1 * d2 <= 0) monotone = false;
      double ratio = hs[k - 1] / hs[k];
      if (d2 != 0.0 && d1 / d2 > 0)
        r.order = std::log(d1 / d2) / std::log(ratio);
      if (std::isfinite(r.order) && r.order > 0) {
        double f = std::pow(ratio, r.order) - 1.0;
        r.extrapolated = r.value + d2 / f;
      }
    }
    r.monotone = monotone;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fracorn
