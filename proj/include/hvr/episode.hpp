#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvr/location.hpp"

namespace hvr {

// One trimmed action clip: a synthetic observation volume plus supervision.
// obs is stored flat with dims (T, H, W, C_f), channel fastest.
struct EpisodeClip {
  std::vector<std::size_t> obs_dims;
  std::vector<double> obs;
  int label = 0;
  CameraTrack track;             // empty when key-frame registration dropped
  LocationDistribution prior;    // q(r|x,e) on the parent grid
  std::optional<Vec3> true_position;  // evaluation only

  std::size_t obs_size() const;
};

// Episode record: header "episode N=<int>", then "a <label>", optional
// "p <x> <y> <z>" ground-truth position, "k <frame> <x> <y> <z>" track lines,
// then the observation tensor as an ENVD-style binary block
// (magic "OBS0", u32 rank, u32 dims..., f64 values).
void write_episode(std::ostream& out, const EpisodeClip& clip,
                   int num_actions);
EpisodeClip read_episode(std::istream& in, int* out_num_actions = nullptr);

// Split container: "episodes <count>" header, then that many records.
// Priors are rebuilt from the stored tracks against the given grid/sigma.
void save_episodes(const std::string& path,
                   const std::vector<EpisodeClip>& episodes, int num_actions);
std::vector<EpisodeClip> load_episodes(const std::string& path,
                                       const GridSpec& grid, double sigma,
                                       int* out_num_actions = nullptr);

}  // namespace hvr
