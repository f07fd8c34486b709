#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvr/grid.hpp"

namespace hvr {

// Probability distribution over a (W,D,H) cell grid, stored h-fastest.
struct LocationDistribution {
  std::size_t w = 0, d = 0, h = 0;
  std::vector<double> probs;

  std::size_t cells() const { return w * d * h; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return (x * d + y) * h + z;
  }
  double sum() const;
  std::size_t argmax() const;

  static LocationDistribution uniform(std::size_t w, std::size_t d,
                                      std::size_t h);
  void validate(double tol = 1e-9) const;
};

struct KeyFrame {
  long frame = 0;
  Vec3 position;
};

// Key-frame camera registrations for one clip; may be empty when registration
// failed for every frame.
struct CameraTrack {
  std::vector<KeyFrame> key_frames;
  void validate() const;
};

// Supervisory location prior from key-frame camera positions:
// one-hot parent-voxel maps averaged over key frames, convolved with a
// truncated isotropic Gaussian (std sigma voxels, radius ceil(3*sigma),
// zero-padded), then renormalized once. Empty or fully-skipped tracks fall
// back to the uniform distribution.
// out_skipped / out_uniform_fallback report skipped key frames and the
// fallback condition when non-null.
LocationDistribution make_prior(const CameraTrack& track, const GridSpec& grid,
                                double sigma,
                                std::size_t* out_skipped = nullptr,
                                bool* out_uniform_fallback = nullptr);

// Sum-pooling over fx x fy x fz blocks; factors must divide the dims exactly.
// Probability mass is conserved.
LocationDistribution downsample_distribution(const LocationDistribution& dist,
                                             int fx, int fy, int fz);

// Track text format: header "track", lines "k <frame> <x> <y> <z>", "#"
// comments allowed.
CameraTrack parse_track(std::istream& in);
void write_track(std::ostream& out, const CameraTrack& track);
CameraTrack load_track(const std::string& path);

// Binary distribution file: magic "LOCD", u32 dims x3, f64 little-endian.
void write_locd(std::ostream& out, const LocationDistribution& dist);
LocationDistribution read_locd(std::istream& in);
void save_locd(const std::string& path, const LocationDistribution& dist);
LocationDistribution load_locd(const std::string& path);

}  // namespace hvr
