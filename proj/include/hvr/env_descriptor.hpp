#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvr/episode.hpp"
#include "hvr/grid.hpp"
#include "hvr/mesh.hpp"

namespace hvr {

enum class DescriptorKind : std::uint8_t {
  kHVR = 0,          // (X,Y,Z,M^3) child-voxel class ids
  kSemVoxel = 1,     // (X,Y,Z,C) per-voxel class distribution
  kGroundPlane2D = 2,  // (X,Y,C) column-aggregated class distribution
  kAffordance = 3,   // (X,Y,Z,N) per-voxel action distribution
};

const char* kind_name(DescriptorKind kind);

// Dense environment descriptor over the parent voxel grid. data is stored
// row-major with the last axis fastest; HVR stores class ids as doubles so a
// single container and file layout covers every kind.
struct EnvDescriptor {
  DescriptorKind kind = DescriptorKind::kHVR;
  GridSpec grid;
  std::vector<std::size_t> dims;
  std::vector<double> data;

  std::size_t channels() const { return dims.back(); }
  std::size_t cell_count() const { return data.size() / dims.back(); }
  std::size_t non_empty_cells() const;
};

// Hierarchical volumetric representation: per child voxel, the majority class
// of the vertices inside it (ties to the lowest class id, empty cells class
// 0). Vertices outside the grid extents are skipped and counted.
EnvDescriptor build_hvr(const SemanticMesh& mesh, const GridSpec& grid,
                        std::size_t* out_outside_count = nullptr);

// Per parent voxel, the empirical class frequency of contained vertices;
// empty voxels one-hot on class 0.
EnvDescriptor build_semvoxel(const SemanticMesh& mesh, const GridSpec& grid,
                             std::size_t* out_outside_count = nullptr);

// Collapse a SemVoxel descriptor onto the ground plane: per (x,y), average
// the distributions of non-empty z cells and renormalize; all-empty columns
// one-hot on class 0. A cell counts as empty when its distribution is the
// empty one-hot.
EnvDescriptor build_ground_plane(const EnvDescriptor& semvoxel);

// Per parent voxel, the action-label distribution of training episodes whose
// first key-frame position falls in that voxel; unvisited voxels uniform.
// Episodes without a usable key-frame position are skipped and counted.
EnvDescriptor build_affordance(const std::vector<EpisodeClip>& episodes,
                               const GridSpec& grid, int num_actions,
                               std::size_t* out_skipped = nullptr);

// Binary descriptor file: magic "ENVD", u8 kind, u32 rank, u32 dims...,
// f64 little-endian values. Grid geometry travels separately.
void write_envd(std::ostream& out, const EnvDescriptor& desc);
EnvDescriptor read_envd(std::istream& in);
void save_envd(const std::string& path, const EnvDescriptor& desc);
EnvDescriptor load_envd(const std::string& path);

}  // namespace hvr
