#pragma once

// Brute-force reference implementations for the voxelization operations.
// Membership is decided by scanning every vertex against explicit cell
// bounds (lo = origin + index*size), a different route from the library's
// floor-division binning; final frequencies use the same count/total
// arithmetic so agreement is exact.

#include <vector>

#include "hvr/env_descriptor.hpp"
#include "hvr/episode.hpp"
#include "hvr/grid.hpp"
#include "hvr/mesh.hpp"

namespace oracle {

inline bool axis_inside(double v, double lo, double hi, bool last_cell) {
  if (last_cell) return v >= lo && v <= hi;
  return v >= lo && v < hi;
}

inline bool cell_contains(const hvr::GridSpec& grid, int gx, int gy, int gz,
                          int cells_x, int cells_y, int cells_z,
                          const hvr::Vec3& p) {
  const double wx = grid.extents.x / cells_x;
  const double wy = grid.extents.y / cells_y;
  const double wz = grid.extents.z / cells_z;
  return axis_inside(p.x, grid.origin.x + gx * wx, grid.origin.x + (gx + 1) * wx,
                     gx == cells_x - 1) &&
         axis_inside(p.y, grid.origin.y + gy * wy, grid.origin.y + (gy + 1) * wy,
                     gy == cells_y - 1) &&
         axis_inside(p.z, grid.origin.z + gz * wz, grid.origin.z + (gz + 1) * wz,
                     gz == cells_z - 1);
}

inline hvr::EnvDescriptor hvr_brute(const hvr::SemanticMesh& mesh,
                                    const hvr::GridSpec& grid) {
  const int gx = grid.nx * grid.m, gy = grid.ny * grid.m, gz = grid.nz * grid.m;
  hvr::EnvDescriptor desc;
  desc.kind = hvr::DescriptorKind::kHVR;
  desc.grid = grid;
  desc.dims = {static_cast<std::size_t>(grid.nx),
               static_cast<std::size_t>(grid.ny),
               static_cast<std::size_t>(grid.nz), grid.children_per_parent()};
  desc.data.assign(static_cast<std::size_t>(gx) * gy * gz, 0.0);
  for (int x = 0; x < gx; ++x)
    for (int y = 0; y < gy; ++y)
      for (int z = 0; z < gz; ++z) {
        std::vector<int> hist(static_cast<std::size_t>(mesh.num_classes), 0);
        bool any = false;
        for (const auto& v : mesh.vertices)
          if (cell_contains(grid, x, y, z, gx, gy, gz, {v.x, v.y, v.z})) {
            ++hist[static_cast<std::size_t>(v.label)];
            any = true;
          }
        int best = 0, best_count = 0;
        if (any)
          for (std::size_t c = 1; c < hist.size(); ++c)
            if (hist[c] > best_count) {
              best = static_cast<int>(c);
              best_count = hist[c];
            }
        const std::size_t parent =
            grid.parent_index(x / grid.m, y / grid.m, z / grid.m);
        const std::size_t child =
            grid.child_offset(x % grid.m, y % grid.m, z % grid.m);
        desc.data[parent * grid.children_per_parent() + child] =
            static_cast<double>(best);
      }
  return desc;
}

inline hvr::EnvDescriptor semvoxel_brute(const hvr::SemanticMesh& mesh,
                                         const hvr::GridSpec& grid) {
  const std::size_t C = static_cast<std::size_t>(mesh.num_classes);
  hvr::EnvDescriptor desc;
  desc.kind = hvr::DescriptorKind::kSemVoxel;
  desc.grid = grid;
  desc.dims = {static_cast<std::size_t>(grid.nx),
               static_cast<std::size_t>(grid.ny),
               static_cast<std::size_t>(grid.nz), C};
  desc.data.assign(grid.parent_count() * C, 0.0);
  for (int x = 0; x < grid.nx; ++x)
    for (int y = 0; y < grid.ny; ++y)
      for (int z = 0; z < grid.nz; ++z) {
        std::vector<int> hist(C, 0);
        int total = 0;
        for (const auto& v : mesh.vertices)
          if (cell_contains(grid, x, y, z, grid.nx, grid.ny, grid.nz,
                            {v.x, v.y, v.z})) {
            ++hist[static_cast<std::size_t>(v.label)];
            ++total;
          }
        double* out = &desc.data[grid.parent_index(x, y, z) * C];
        if (total == 0) {
          out[0] = 1.0;
          continue;
        }
        for (std::size_t c = 0; c < C; ++c)
          out[c] = static_cast<double>(hist[c]) / static_cast<double>(total);
      }
  return desc;
}

inline hvr::EnvDescriptor ground_plane_brute(const hvr::EnvDescriptor& sem) {
  const std::size_t X = sem.dims[0], Y = sem.dims[1], Z = sem.dims[2],
                    C = sem.dims[3];
  hvr::EnvDescriptor out;
  out.kind = hvr::DescriptorKind::kGroundPlane2D;
  out.grid = sem.grid;
  out.dims = {X, Y, C};
  out.data.assign(X * Y * C, 0.0);
  for (std::size_t x = 0; x < X; ++x)
    for (std::size_t y = 0; y < Y; ++y) {
      double* col = &out.data[(x * Y + y) * C];
      std::size_t used = 0;
      for (std::size_t z = 0; z < Z; ++z) {
        const double* cell = &sem.data[((x * Y + y) * Z + z) * C];
        if (cell[0] == 1.0) continue;
        for (std::size_t c = 0; c < C; ++c) col[c] += cell[c];
        ++used;
      }
      if (used == 0) {
        col[0] = 1.0;
        continue;
      }
      for (std::size_t c = 0; c < C; ++c) col[c] /= static_cast<double>(used);
      double total = 0.0;
      for (std::size_t c = 0; c < C; ++c) total += col[c];
      for (std::size_t c = 0; c < C; ++c) col[c] /= total;
    }
  return out;
}

inline hvr::EnvDescriptor affordance_brute(
    const std::vector<hvr::EpisodeClip>& episodes, const hvr::GridSpec& grid,
    int num_actions) {
  const std::size_t N = static_cast<std::size_t>(num_actions);
  hvr::EnvDescriptor desc;
  desc.kind = hvr::DescriptorKind::kAffordance;
  desc.grid = grid;
  desc.dims = {static_cast<std::size_t>(grid.nx),
               static_cast<std::size_t>(grid.ny),
               static_cast<std::size_t>(grid.nz), N};
  desc.data.assign(grid.parent_count() * N, 0.0);
  for (int x = 0; x < grid.nx; ++x)
    for (int y = 0; y < grid.ny; ++y)
      for (int z = 0; z < grid.nz; ++z) {
        std::vector<int> hist(N, 0);
        int total = 0;
        for (const auto& e : episodes) {
          if (e.track.key_frames.empty()) continue;
          if (cell_contains(grid, x, y, z, grid.nx, grid.ny, grid.nz,
                            e.track.key_frames.front().position)) {
            ++hist[static_cast<std::size_t>(e.label)];
            ++total;
          }
        }
        double* out = &desc.data[grid.parent_index(x, y, z) * N];
        if (total == 0) {
          for (std::size_t a = 0; a < N; ++a)
            out[a] = 1.0 / static_cast<double>(N);
          continue;
        }
        for (std::size_t a = 0; a < N; ++a)
          out[a] = static_cast<double>(hist[a]) / static_cast<double>(total);
      }
  return desc;
}

// Random mesh on a lattice: vertex coordinates are lattice points offset by
// half a lattice step, so no vertex can sit within rounding distance of a
// voxel boundary and exact cross-implementation equality is well defined.
inline hvr::SemanticMesh lattice_mesh(const hvr::GridSpec& grid,
                                      std::size_t vertex_count,
                                      int num_classes, hvr::Rng& rng,
                                      double outside_fraction = 0.0) {
  hvr::SemanticMesh mesh;
  mesh.num_classes = num_classes;
  const int steps = 1024;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const bool outside = rng.uniform() < outside_fraction;
    auto coord = [&](double origin, double extent) {
      const double span = outside ? 1.5 : 1.0;
      const int cell = static_cast<int>(rng.uniform_index(
          static_cast<std::uint64_t>(steps * span)));
      return origin + extent * (cell + 0.5) / steps;
    };
    mesh.vertices.push_back(
        {coord(grid.origin.x, grid.extents.x),
         coord(grid.origin.y, grid.extents.y),
         coord(grid.origin.z, grid.extents.z),
         1 + static_cast<int>(rng.uniform_index(
                 static_cast<std::uint64_t>(num_classes - 1)))});
  }
  return mesh;
}

}  // namespace oracle
