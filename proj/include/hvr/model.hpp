#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hvr/env_descriptor.hpp"
#include "hvr/episode.hpp"
#include "hvr/location.hpp"
#include "hvr/ops.hpp"
#include "hvr/rng.hpp"
#include "hvr/tensor.hpp"

namespace hvr {

// Model variants used by the ablation experiments.
//   kFull          - stochastic location selection (Gumbel-Softmax sample)
//   kVideoOnly     - environment features zeroed
//   kGlobalEnv     - location fixed to uniform (plain global env pooling)
//   kDeterministic - no sampling; the predicted location is used directly
enum class ModelVariant : int {
  kFull = 0,
  kVideoOnly = 1,
  kGlobalEnv = 2,
  kDeterministic = 3,
};

const char* variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);

struct ModelConfig {
  int loc_w = 7, loc_d = 7, loc_h = 4;  // location map cells
  int pool_x = 4, pool_y = 4, pool_z = 2;  // parent grid -> location map
  int c_phi = 16, c_psi = 16;
  int c_head = 16;  // hidden width of the two-conv location head
  double theta = 2.0;
  int num_actions = 2;
  double lambda_kl = 1.0;
  // Uniform mass mixed into the KL target during training. The truncated
  // Gaussian prior has exact zeros; against the 1e-12 clamp those produce
  // ~25-nat gradients that saturate the location softmax at batch size 1.
  double kl_floor = 0.01;
  int num_classes = 2;   // environment object classes (HVR one-hot expansion)
  int env_channels = 2;  // channels of the env input (HVR: M^3 * C)
  Shape obs_dims;        // (T,H,W,Cf)
  ModelVariant variant = ModelVariant::kFull;

  std::size_t loc_cells() const {
    return static_cast<std::size_t>(loc_w) * loc_d * loc_h;
  }
  void validate() const;
};

// All learnable weights; every tensor requires gradients.
struct ModelParams {
  Tensor phi_conv1, phi_conv2, phi_proj;  // video branch
  Tensor psi_conv1, psi_conv2;            // environment branch
  Tensor w_r1, w_r2;                      // two-conv location head
  Tensor w_p;                             // linear classifier

  std::vector<Tensor*> all();
  std::vector<std::pair<std::string, Tensor*>> named();
};

ModelParams init_params(const ModelConfig& config, Rng& rng);
ModelParams zero_params(const ModelConfig& config);

// Checkpoint round trip; the config travels inside the tensor list.
std::vector<std::pair<std::string, Tensor>> checkpoint_tensors(
    const ModelParams& params, const ModelConfig& config);
void restore_checkpoint_tensors(
    const std::vector<std::pair<std::string, Tensor>>& named,
    ModelConfig& config, ModelParams& params);

// Environment descriptor -> network input tensor (X,Y,Z,EC). HVR class ids
// are one-hot expanded into M^3 * C binary channels; probability descriptors
// pass through; a GroundPlane2D descriptor becomes a Z=1 volume.
Tensor env_to_input(const EnvDescriptor& desc, int num_classes);

// Two conv+relu layers, global average pooling, then a learned projection
// onto the location grid. Output (W,D,H,c_phi).
Tensor encode_video(const Tensor& obs, const ModelParams& params,
                    const ModelConfig& config);

// Channel embedding conv + relu, then a patch convolution with kernel and
// stride equal to the pooling factors. Output (W,D,H,c_psi).
Tensor encode_env(const Tensor& env_input, const ModelParams& params,
                  const ModelConfig& config);
Tensor encode_env(const EnvDescriptor& desc, const ModelParams& params,
                  const ModelConfig& config);

// softmax over all cells of the location-head response to the concatenated
// features: per-cell conv -> relu -> conv to a scalar logit.
Tensor predict_location(const Tensor& video_feat, const Tensor& env_feat,
                        const ModelParams& params);

// Environment features pooled by the location sample, video features pooled
// globally, concatenated, mapped to class logits. Softmax is applied by the
// loss / inference, not here.
Tensor classify(const Tensor& r_sample, const Tensor& video_feat,
                const Tensor& env_feat, const ModelParams& params);

struct StepStats {
  double loss = 0.0;
  double ce = 0.0;
  double kl = 0.0;
};

// One forward/backward pass on a single clip. Gradients accumulate into the
// parameter buffers; the caller applies the optimizer step.
StepStats training_step(const EpisodeClip& clip, const Tensor& env_input,
                        ModelParams& params, const ModelConfig& config,
                        Rng& rng);

struct Inference {
  int label = 0;
  std::vector<double> scores;
  LocationDistribution location;
};

// Deterministic inference: the expected location replaces the sample.
Inference infer(const EpisodeClip& clip, const Tensor& env_input,
                const ModelParams& params, const ModelConfig& config);

}  // namespace hvr
