#include "fracorn/grid.hpp"

#include <cmath>

namespace fracorn {

namespace {
// splitmix64: decorrelates the per-cell Monte-Carlo streams
uint64_t mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

Grid Grid::make(const Domain& dom, double h, uint64_t mc_seed, int mc_samples) {
  if (!(h > 0)) throw ConfigError("grid: spacing must be positive");
  Grid g;
  g.n_ = dom.n();
  g.h_ = h;
  auto [lo, hi] = dom.bounding_box();
  g.origin_ = lo;
  int n = g.n_;
  std::array<int, kMaxDim> counts{};
  for (int i = 0; i < n; ++i) {
    counts[static_cast<size_t>(i)] = static_cast<int>(std::ceil((hi[i] - lo[i]) / h - 1e-9));
    if (counts[static_cast<size_t>(i)] < 4)
      throw ConfigError("grid: fewer than 4 cells along an axis; decrease h");
  }

  std::array<int, kMaxDim> idx{};
  while (true) {
    Vec corner_lo = lo;
    for (int i = 0; i < n; ++i) corner_lo[i] = lo[i] + h * idx[static_cast<size_t>(i)];
    Vec center = corner_lo;
    for (int i = 0; i < n; ++i) center[i] += 0.5 * h;

    // full-cell test: all corners and the center inside (our domain kinds
    // are convex or have graph boundaries resolved at corner scale)
    bool all_in = dom.contains(center);
    if (all_in) {
      int kids = 1 << n;
      for (int c = 0; c < kids && all_in; ++c) {
        Vec p = corner_lo;
        for (int i = 0; i < n; ++i)
          if (c & (1 << i)) p[i] += h;
        all_in = dom.contains(p);
      }
    }

    double cellvol = 1.0;
    for (int i = 0; i < n; ++i) cellvol *= h;

    if (all_in) {
      g.cells_.push_back({center, cellvol, idx, false});
    } else {
      uint64_t s = mc_seed;
      for (int i = 0; i < n; ++i)
        s = mix(s ^ (0x100000001b3ull * static_cast<uint64_t>(idx[static_cast<size_t>(i)] + 7)));
      Rng rng(s);
      int inside = 0;
      Vec centroid = Vec::zero(n);
      Vec nearest = Vec::zero(n);
      for (int k = 0; k < mc_samples; ++k) {
        Vec p = corner_lo;
        for (int i = 0; i < n; ++i) p[i] += h * rng.uniform();
        if (dom.contains(p)) {
          ++inside;
          centroid += p;
          nearest = p;
        }
      }
      if (inside == 0) {
        if (dom.contains(center))
          g.cells_.push_back({center, cellvol * 0.5 / mc_samples, idx, true});
      } else if (inside == mc_samples && dom.contains(center)) {
        // a corner merely touches the boundary: the cell is full to
        // sampling accuracy, keep it exact so lattice structure survives
        g.cells_.push_back({center, cellvol, idx, false});
      } else {
        centroid *= 1.0 / inside;
        if (!dom.contains(centroid)) centroid = nearest;
        g.cells_.push_back({centroid, cellvol * inside / mc_samples, idx, true});
      }
    }

    int d = 0;
    while (d < n && ++idx[static_cast<size_t>(d)] == counts[static_cast<size_t>(d)]) {
      idx[static_cast<size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }
  if (g.cells_.empty()) throw ConfigError("grid: no cells inside the domain");
  return g;
}

Grid Grid::transformed(const Grid& base, const std::function<Vec(const Vec&)>& map) {
  Grid g;
  g.n_ = base.n_;
  g.h_ = base.h_;
  g.origin_ = map(base.origin_);
  g.cells_ = base.cells_;
  for (auto& c : g.cells_) {
    c.center = map(c.center);
    c.clipped = true;
  }
  return g;
}

double Grid::total_volume() const {
  double s = 0.0;
  for (const auto& c : cells_) s += c.volume;
  return s;
}

std::array<double, 2 * kMaxDim + 2> Grid::fingerprint() const {
  std::array<double, 2 * kMaxDim + 2> f{};
  f[0] = n_;
  f[1] = h_;
  for (int i = 0; i < n_; ++i) {
    f[static_cast<size_t>(2 + i)] = origin_[i];
    f[static_cast<size_t>(2 + kMaxDim + i)] = cells_.front().center[i];
  }
  return f;
}

bool Grid::same_lattice(const Grid& o) const {
  if (n_ != o.n_) return false;
  if (std::abs(h_ - o.h_) > 1e-12 * h_) return false;
  for (int i = 0; i < n_; ++i) {
    double d = (origin_[i] - o.origin_[i]) / h_;
    if (std::abs(d - std::round(d)) > 1e-9) return false;
  }
  return true;
}

}  // namespace fracorn
