#pragma once

#include <cstdint>
#include <string>

#include "hvr/grid.hpp"
#include "hvr/synth.hpp"

namespace hvr::cli {

// HVR_SEED overrides the seed flag when set.
std::uint64_t resolve_seed(std::uint64_t flag_value);

struct VoxelizeArgs {
  std::string mesh_path;
  GridSpec grid{{0, 0, 0}, {7.0, 7.0, 2.0}, 28, 28, 8, 4};
  std::string kind = "hvr";  // hvr | semvoxel | groundplane | affordance
  std::string episodes_path;  // affordance only
  int num_actions = 8;        // affordance only
  double sigma_prior = 1.0;   // affordance episode loading
  std::string out_path;
};
int cmd_voxelize(const VoxelizeArgs& args);

struct PriorArgs {
  std::string track_path;
  GridSpec grid{{0, 0, 0}, {7.0, 7.0, 2.0}, 28, 28, 8, 4};
  double sigma = 1.0;
  bool check = false;
  std::string out_path;
};
int cmd_prior(const PriorArgs& args);

struct SynthArgs {
  SynthConfig config;
  std::string out_dir;
};
int cmd_synth(const SynthArgs& args);

struct TrainArgs {
  std::string data_dir;
  std::string out_checkpoint;
  std::string log_path;  // defaults to <out_checkpoint>.log
  std::string variant = "full";
  std::string init = "random";  // random | zero
  int epochs = 2;
  double lr = 0.05;
  double momentum = 0.9;
  double theta = 2.0;
  double lambda_kl = 1.0;
  int c_phi = 16;
  int c_psi = 16;
  std::uint64_t seed = 7;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint_path;
  std::string data_dir;
  std::string out_dir;
  std::string split = "test";  // test | train
  double tau = -1.0;           // < 0: uniform-density threshold
  int workers = 1;
};
int cmd_eval(const EvalArgs& args);

struct RenderArgs {
  std::string locd_path;
  std::string out_path;
};
int cmd_render(const RenderArgs& args);

}  // namespace hvr::cli
