#pragma once

// Uniform lattice grids over a Domain.  Interior cells are full cubes of
// side h; cells cut by the domain boundary get a Monte-Carlo volume (fixed
// seed) and are represented by the centroid of their inside part, so every
// stored center lies inside the domain.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "fracorn/core.hpp"
#include "fracorn/geometry.hpp"

namespace fracorn {

struct GridCell {
  Vec center;
  double volume;
  std::array<int, kMaxDim> idx;  // lattice index (lower corner = origin + h*idx)
  bool clipped;                  // true when the cell is cut by the boundary
};

class Grid {
 public:
  // mc_samples fixed-seed samples decide the volume/centroid of boundary
  // cells.  Fewer than 4 cells along any bounding-box axis is rejected.
  static Grid make(const Domain& dom, double h, uint64_t mc_seed = 0x9e3779b97f4a7c15ull,
                   int mc_samples = 4096);

  int n() const { return n_; }
  double h() const { return h_; }
  const Vec& origin() const { return origin_; }
  const std::vector<GridCell>& cells() const { return cells_; }
  double total_volume() const;

  // Image of a grid under a point map: centers mapped, volumes kept, and
  // every cell marked clipped so near-pair refinement is disabled (the
  // subdivision rule cannot follow a non-axis-aligned map).  Used for
  // isometry-invariance comparisons, with an identity-mapped copy of the
  // base grid on the other side so both use the same quadrature rule.
  static Grid transformed(const Grid& base, const std::function<Vec(const Vec&)>& map);

  // Lexicographic identity used to canonicalize pair order in symmetric
  // double integrals.
  std::array<double, 2 * kMaxDim + 2> fingerprint() const;
  // Two grids share a lattice when origins and spacings agree; integer
  // index arithmetic (and therefore near-pair refinement) is valid across
  // them.
  bool same_lattice(const Grid& o) const;

 private:
  int n_ = 0;
  double h_ = 0.0;
  Vec origin_;
  std::vector<GridCell> cells_;
};

}  // namespace fracorn
