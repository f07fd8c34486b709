#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace hvr {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Parent voxel grid with a fixed per-axis child resolution m. Voxel membership
// uses half-open intervals [lo, hi); points exactly on the global upper face
// are clamped into the last voxel so the grid covers its extents totally.
struct GridSpec {
  Vec3 origin;
  Vec3 extents;            // strictly positive
  int nx = 1, ny = 1, nz = 1;  // parent voxel counts
  int m = 1;               // children per parent, per axis

  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1 || m < 1)
      throw std::invalid_argument("GridSpec: dims and child resolution >= 1");
    if (!(extents.x > 0.0) || !(extents.y > 0.0) || !(extents.z > 0.0))
      throw std::invalid_argument("GridSpec: extents must be positive");
  }

  std::size_t parent_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t children_per_parent() const {
    return static_cast<std::size_t>(m) * m * m;
  }

  Vec3 parent_size() const {
    return {extents.x / nx, extents.y / ny, extents.z / nz};
  }
  Vec3 child_size() const {
    Vec3 p = parent_size();
    return {p.x / m, p.y / m, p.z / m};
  }

  // Global child index along one axis, or nullopt when outside [0, count*m).
  static std::optional<int> axis_cell(double v, double lo, double extent,
                                      int cells) {
    if (!(v >= lo)) return std::nullopt;
    if (v > lo + extent) return std::nullopt;
    int i = static_cast<int>(std::floor((v - lo) / (extent / cells)));
    if (i >= cells) i = cells - 1;  // exact upper boundary clamps inward
    return i;
  }

  // Global child coordinates (resolution nx*m x ny*m x nz*m).
  std::optional<std::array<int, 3>> child_cell(const Vec3& p) const {
    auto cx = axis_cell(p.x, origin.x, extents.x, nx * m);
    auto cy = axis_cell(p.y, origin.y, extents.y, ny * m);
    auto cz = axis_cell(p.z, origin.z, extents.z, nz * m);
    if (!cx || !cy || !cz) return std::nullopt;
    return std::array<int, 3>{*cx, *cy, *cz};
  }

  // Parent voxel containing p; derived from the child cell so parent/child
  // assignments can never disagree at cell boundaries.
  std::optional<std::array<int, 3>> parent_cell(const Vec3& p) const {
    auto c = child_cell(p);
    if (!c) return std::nullopt;
    return std::array<int, 3>{(*c)[0] / m, (*c)[1] / m, (*c)[2] / m};
  }

  std::size_t parent_index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * ny + iy) * nz + iz;
  }

  // Child cells are flattened x-fastest, then y, then z.
  std::size_t child_offset(int cx, int cy, int cz) const {
    return static_cast<std::size_t>(cz) * m * m +
           static_cast<std::size_t>(cy) * m + cx;
  }
};

}  // namespace hvr
