#include "hvr/env_descriptor.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hvr {

const char* kind_name(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::kHVR: return "hvr";
    case DescriptorKind::kSemVoxel: return "semvoxel";
    case DescriptorKind::kGroundPlane2D: return "groundplane";
    case DescriptorKind::kAffordance: return "affordance";
  }
  return "?";
}

std::size_t EnvDescriptor::non_empty_cells() const {
  const std::size_t c = channels();
  std::size_t n = 0;
  for (std::size_t cell = 0; cell < cell_count(); ++cell) {
    if (kind == DescriptorKind::kHVR) {
      bool occupied = false;
      for (std::size_t k = 0; k < c; ++k)
        occupied = occupied || data[cell * c + k] != 0.0;
      if (occupied) ++n;
    } else {
      // probability kinds: the empty convention is one-hot on channel 0
      if (data[cell * c] != 1.0) ++n;
    }
  }
  return n;
}

EnvDescriptor build_hvr(const SemanticMesh& mesh, const GridSpec& grid,
                        std::size_t* out_outside_count) {
  mesh.validate();
  grid.validate();
  const std::size_t X = static_cast<std::size_t>(grid.nx);
  const std::size_t Y = static_cast<std::size_t>(grid.ny);
  const std::size_t Z = static_cast<std::size_t>(grid.nz);
  const std::size_t m3 = grid.children_per_parent();
  const std::size_t child_cells = X * Y * Z * m3;

  // Per-child class histogram, then majority vote with ties to the lowest id.
  std::vector<std::vector<int>> counts(child_cells);
  std::size_t outside = 0;
  for (const auto& v : mesh.vertices) {
    auto cell = grid.child_cell({v.x, v.y, v.z});
    if (!cell) {
      ++outside;
      continue;
    }
    const int cx = (*cell)[0], cy = (*cell)[1], cz = (*cell)[2];
    const std::size_t parent =
        grid.parent_index(cx / grid.m, cy / grid.m, cz / grid.m);
    const std::size_t child =
        grid.child_offset(cx % grid.m, cy % grid.m, cz % grid.m);
    auto& hist = counts[parent * m3 + child];
    if (hist.empty()) hist.assign(static_cast<std::size_t>(mesh.num_classes), 0);
    ++hist[static_cast<std::size_t>(v.label)];
  }
  if (out_outside_count) *out_outside_count = outside;

  EnvDescriptor desc;
  desc.kind = DescriptorKind::kHVR;
  desc.grid = grid;
  desc.dims = {X, Y, Z, m3};
  desc.data.assign(child_cells, 0.0);
  for (std::size_t i = 0; i < child_cells; ++i) {
    const auto& hist = counts[i];
    if (hist.empty()) continue;  // class 0 = empty
    int best = 0, best_count = 0;
    for (std::size_t c = 1; c < hist.size(); ++c)
      if (hist[c] > best_count) {
        best = static_cast<int>(c);
        best_count = hist[c];
      }
    desc.data[i] = static_cast<double>(best);
  }
  return desc;
}

EnvDescriptor build_semvoxel(const SemanticMesh& mesh, const GridSpec& grid,
                             std::size_t* out_outside_count) {
  mesh.validate();
  grid.validate();
  const std::size_t X = static_cast<std::size_t>(grid.nx);
  const std::size_t Y = static_cast<std::size_t>(grid.ny);
  const std::size_t Z = static_cast<std::size_t>(grid.nz);
  const std::size_t C = static_cast<std::size_t>(mesh.num_classes);

  std::vector<std::vector<int>> counts(X * Y * Z);
  std::size_t outside = 0;
  for (const auto& v : mesh.vertices) {
    auto cell = grid.parent_cell({v.x, v.y, v.z});
    if (!cell) {
      ++outside;
      continue;
    }
    auto& hist = counts[grid.parent_index((*cell)[0], (*cell)[1], (*cell)[2])];
    if (hist.empty()) hist.assign(C, 0);
    ++hist[static_cast<std::size_t>(v.label)];
  }
  if (out_outside_count) *out_outside_count = outside;

  EnvDescriptor desc;
  desc.kind = DescriptorKind::kSemVoxel;
  desc.grid = grid;
  desc.dims = {X, Y, Z, C};
  desc.data.assign(X * Y * Z * C, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& hist = counts[i];
    if (hist.empty()) {
      desc.data[i * C] = 1.0;  // empty voxel: one-hot on class 0
      continue;
    }
    int total = 0;
    for (int c : hist) total += c;
    for (std::size_t c = 0; c < C; ++c)
      desc.data[i * C + c] =
          static_cast<double>(hist[c]) / static_cast<double>(total);
  }
  return desc;
}

EnvDescriptor build_ground_plane(const EnvDescriptor& semvoxel) {
  if (semvoxel.kind != DescriptorKind::kSemVoxel)
    throw std::invalid_argument("build_ground_plane: input must be SemVoxel");
  const std::size_t X = semvoxel.dims[0];
  const std::size_t Y = semvoxel.dims[1];
  const std::size_t Z = semvoxel.dims[2];
  const std::size_t C = semvoxel.dims[3];

  EnvDescriptor out;
  out.kind = DescriptorKind::kGroundPlane2D;
  out.grid = semvoxel.grid;
  out.dims = {X, Y, C};
  out.data.assign(X * Y * C, 0.0);

  for (std::size_t x = 0; x < X; ++x)
    for (std::size_t y = 0; y < Y; ++y) {
      double* col = &out.data[(x * Y + y) * C];
      std::size_t used = 0;
      for (std::size_t z = 0; z < Z; ++z) {
        const double* cell = &semvoxel.data[((x * Y + y) * Z + z) * C];
        // one-hot on class 0 marks an empty cell
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

EnvDescriptor build_affordance(const std::vector<EpisodeClip>& episodes,
                               const GridSpec& grid, int num_actions,
                               std::size_t* out_skipped) {
  grid.validate();
  if (num_actions <= 0)
    throw std::invalid_argument("build_affordance: num_actions must be > 0");
  const std::size_t X = static_cast<std::size_t>(grid.nx);
  const std::size_t Y = static_cast<std::size_t>(grid.ny);
  const std::size_t Z = static_cast<std::size_t>(grid.nz);
  const std::size_t N = static_cast<std::size_t>(num_actions);

  std::vector<std::vector<int>> counts(X * Y * Z);
  std::size_t skipped = 0;
  for (const EpisodeClip& e : episodes) {
    if (e.track.key_frames.empty()) {
      ++skipped;
      continue;
    }
    auto cell = grid.parent_cell(e.track.key_frames.front().position);
    if (!cell || e.label < 0 || e.label >= num_actions) {
      ++skipped;
      continue;
    }
    auto& hist = counts[grid.parent_index((*cell)[0], (*cell)[1], (*cell)[2])];
    if (hist.empty()) hist.assign(N, 0);
    ++hist[static_cast<std::size_t>(e.label)];
  }
  if (out_skipped) *out_skipped = skipped;

  EnvDescriptor desc;
  desc.kind = DescriptorKind::kAffordance;
  desc.grid = grid;
  desc.dims = {X, Y, Z, N};
  desc.data.assign(X * Y * Z * N, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& hist = counts[i];
    if (hist.empty()) {
      for (std::size_t a = 0; a < N; ++a)
        desc.data[i * N + a] = 1.0 / static_cast<double>(N);
      continue;
    }
    int total = 0;
    for (int c : hist) total += c;
    for (std::size_t a = 0; a < N; ++a)
      desc.data[i * N + a] =
          static_cast<double>(hist[a]) / static_cast<double>(total);
  }
  return desc;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("ENVD: unexpected end of stream");
  return v;
}

}  // namespace

void write_envd(std::ostream& out, const EnvDescriptor& desc) {
  out.write("ENVD", 4);
  const std::uint8_t kind = static_cast<std::uint8_t>(desc.kind);
  out.write(reinterpret_cast<const char*>(&kind), 1);
  write_u32(out, static_cast<std::uint32_t>(desc.dims.size()));
  for (std::size_t d : desc.dims) write_u32(out, static_cast<std::uint32_t>(d));
  out.write(reinterpret_cast<const char*>(desc.data.data()),
            static_cast<std::streamsize>(desc.data.size() * sizeof(double)));
}

EnvDescriptor read_envd(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ENVD", 4) != 0)
    throw std::runtime_error("not an ENVD file");
  std::uint8_t kind = 0;
  in.read(reinterpret_cast<char*>(&kind), 1);
  if (!in || kind > 3) throw std::runtime_error("ENVD: bad descriptor kind");
  EnvDescriptor desc;
  desc.kind = static_cast<DescriptorKind>(kind);
  const std::uint32_t rank = read_u32(in);
  if (rank == 0 || rank > 8) throw std::runtime_error("ENVD: implausible rank");
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    desc.dims.push_back(read_u32(in));
    total *= desc.dims.back();
  }
  desc.data.resize(total);
  in.read(reinterpret_cast<char*>(desc.data.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw std::runtime_error("ENVD: truncated value block");
  return desc;
}

void save_envd(const std::string& path, const EnvDescriptor& desc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write ENVD file: " + path);
  write_envd(out, desc);
}

EnvDescriptor load_envd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ENVD file: " + path);
  return read_envd(in);
}

}  // namespace hvr
