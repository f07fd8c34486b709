#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hvr/env_descriptor.hpp"
#include "hvr/episode.hpp"
#include "hvr/grid.hpp"
#include "hvr/mesh.hpp"
#include "hvr/model.hpp"
#include "hvr/rng.hpp"

namespace hvr {

// Generator of labeled environments and action episodes with controlled
// video/environment ambiguity.
//
// Construction: the parent grid is tiled into site blocks (one per action
// class). A block holds a context slab whose object class identifies the
// action, plus random clutter boxes. Confusable action pairs share an
// observation template (the manipulated prop, rendered with its class) while
// the slab and clutter are rendered class-anonymously in the observation:
// geometry is visible to the video branch, semantics only to the map. The
// pair member is therefore recoverable from the environment descriptor at
// the action location but, across worlds, not from the observation alone.
struct SynthConfig {
  std::uint64_t seed = 7;
  GridSpec grid{{0, 0, 0}, {6.0, 6.0, 2.0}, 12, 12, 4, 2};
  int num_classes = 14;  // C, including the reserved empty class 0
  int num_actions = 8;   // N; even when rho > 0
  int num_objects = 48;  // context slabs + clutter boxes
  int train_episodes = 2000;
  int test_episodes = 500;
  double sigma_obs = 0.1;  // observation noise
  double rho = 1.0;        // fraction of classes only disambiguable via env
  double p_drop = 0.0;     // fraction of episodes with an empty camera track
  bool unseen = false;     // test split runs in a freshly generated world

  double sigma_prior = 1.0;               // voxels; q smoothing
  int frames = 4;                         // T
  std::array<int, 3> crop = {5, 5, 3};    // observation window, child voxels
  std::array<int, 3> site_block = {4, 4, 2};  // parent voxels per site cell
  int zone_pad = 0;  // extra camera-zone inset (children) beyond the crop

  void validate() const;
  int confusable_classes() const;  // leading classes grouped into pairs
  std::size_t obs_channels() const {
    return static_cast<std::size_t>(crop[2]) *
           (static_cast<std::size_t>(num_classes) + 1);
  }
  Shape obs_dims() const {
    return {static_cast<std::size_t>(frames), static_cast<std::size_t>(crop[0]),
            static_cast<std::size_t>(crop[1]), obs_channels()};
  }
};

struct Box {
  Vec3 lo, hi;
};

struct ActionSite {
  int block = 0;     // linearized site-block index
  Box zone;          // camera positions for this action, meters
};

struct SynthWorld {
  SemanticMesh mesh;
  std::vector<std::pair<int, Box>> placements;  // (class, box)
  std::vector<ActionSite> sites;                // one per action class
  GridSpec grid;
  std::vector<int> child_labels;  // global child grid cache, x-major
  std::uint64_t seed = 0;

  int child_label(int cx, int cy, int cz) const;
};

SynthWorld generate_world(const SynthConfig& config);
SynthWorld generate_world_with_seed(const SynthConfig& config,
                                    std::uint64_t seed);

EpisodeClip generate_episode(const SynthWorld& world, const SynthConfig& config,
                             Rng& rng);

struct SynthSplit {
  SynthWorld world;       // training world
  SynthWorld test_world;  // == world placements in seen mode
  EnvDescriptor env;      // HVR of the training world
  EnvDescriptor test_env;
  std::vector<EpisodeClip> train;
  std::vector<EpisodeClip> test;
};

SynthSplit generate_split(const SynthConfig& config);

// Model configuration matched to this generator: location cells are the site
// blocks, the env branch consumes the one-hot expanded HVR.
ModelConfig model_config_for(const SynthConfig& config, ModelVariant variant);

// Class-role bookkeeping (deterministic functions of the config).
int template_of_action(const SynthConfig& config, int action);
int prop_class_of_action(const SynthConfig& config, int action);
int context_class_of_action(int action);  // 1 + action

}  // namespace hvr
