#include "hvr/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvr {

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::kFull: return "full";
    case ModelVariant::kVideoOnly: return "video-only";
    case ModelVariant::kGlobalEnv: return "global-env";
    case ModelVariant::kDeterministic: return "deterministic";
  }
  return "?";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "full") return ModelVariant::kFull;
  if (name == "video-only") return ModelVariant::kVideoOnly;
  if (name == "global-env") return ModelVariant::kGlobalEnv;
  if (name == "deterministic") return ModelVariant::kDeterministic;
  throw std::invalid_argument("unknown model variant: " + name);
}

void ModelConfig::validate() const {
  if (loc_w < 1 || loc_d < 1 || loc_h < 1)
    throw std::invalid_argument("config: location map dims >= 1");
  if (pool_x < 1 || pool_y < 1 || pool_z < 1)
    throw std::invalid_argument("config: pooling factors >= 1");
  if (c_phi < 1 || c_psi < 1 || c_head < 1)
    throw std::invalid_argument("config: channel counts >= 1");
  if (!(theta > 0.0)) throw std::invalid_argument("config: theta > 0");
  if (num_actions < 2) throw std::invalid_argument("config: num_actions >= 2");
  if (lambda_kl < 0.0) throw std::invalid_argument("config: lambda_kl >= 0");
  if (kl_floor < 0.0 || kl_floor >= 1.0)
    throw std::invalid_argument("config: kl_floor in [0,1)");
  if (env_channels < 1)
    throw std::invalid_argument("config: env_channels >= 1");
  if (obs_dims.size() != 4)
    throw std::invalid_argument("config: obs_dims must be (T,H,W,Cf)");
}

std::vector<Tensor*> ModelParams::all() {
  return {&phi_conv1, &phi_conv2, &phi_proj, &psi_conv1,
          &psi_conv2, &w_r1,      &w_r2,     &w_p};
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
  return {{"phi/conv1", &phi_conv1}, {"phi/conv2", &phi_conv2},
          {"phi/proj", &phi_proj},   {"psi/conv1", &psi_conv1},
          {"psi/conv2", &psi_conv2}, {"head/w_r1", &w_r1},
          {"head/w_r2", &w_r2},      {"head/w_p", &w_p}};
}

namespace {

Tensor random_tensor(Shape dims, Rng& rng, double scale) {
  Tensor t(dims, 0.0, true);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, scale);
  return t;
}

ModelParams make_params(const ModelConfig& config, Rng* rng) {
  config.validate();
  const std::size_t env_ch = static_cast<std::size_t>(config.env_channels);
  const std::size_t cf = config.obs_dims[3];
  const std::size_t cphi = static_cast<std::size_t>(config.c_phi);
  const std::size_t cpsi = static_cast<std::size_t>(config.c_psi);
  const std::size_t cells = config.loc_cells();
  const std::size_t px = static_cast<std::size_t>(config.pool_x);
  const std::size_t py = static_cast<std::size_t>(config.pool_y);
  const std::size_t pz = static_cast<std::size_t>(config.pool_z);

  auto make = [&](Shape dims, std::size_t fan_in) {
    if (!rng) {
      Tensor t(dims, 0.0, true);
      return t;
    }
    return random_tensor(std::move(dims), *rng,
                         1.0 / std::sqrt(static_cast<double>(fan_in)));
  };

  ModelParams p;
  p.phi_conv1 = make({3, 3, 3, cf, cphi}, 27 * cf);
  p.phi_conv2 = make({3, 3, 3, cphi, cphi}, 27 * cphi);
  p.phi_proj = make({cphi, cphi}, cphi);
  p.psi_conv1 = make({1, 1, 1, env_ch, cpsi}, std::max<std::size_t>(1, env_ch));
  p.psi_conv2 = make({px, py, pz, cpsi, cpsi}, px * py * pz * cpsi);
  const std::size_t ch = static_cast<std::size_t>(config.c_head);
  p.w_r1 = make({1, 1, 1, cphi + cpsi, ch}, cphi + cpsi);
  p.w_r2 = make({1, 1, 1, ch, 1}, ch);
  p.w_p = make({cphi + cpsi, static_cast<std::size_t>(config.num_actions)},
               cphi + cpsi);
  return p;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, Rng& rng) {
  return make_params(config, &rng);
}

ModelParams zero_params(const ModelConfig& config) {
  return make_params(config, nullptr);
}

std::vector<std::pair<std::string, Tensor>> checkpoint_tensors(
    const ModelParams& params, const ModelConfig& config) {
  std::vector<std::pair<std::string, Tensor>> named;
  std::vector<double> meta{
      static_cast<double>(config.loc_w),   static_cast<double>(config.loc_d),
      static_cast<double>(config.loc_h),   static_cast<double>(config.pool_x),
      static_cast<double>(config.pool_y),  static_cast<double>(config.pool_z),
      static_cast<double>(config.c_phi),   static_cast<double>(config.c_psi),
      config.theta,                        static_cast<double>(config.num_actions),
      config.lambda_kl,                    static_cast<double>(config.num_classes),
      static_cast<double>(config.env_channels),
      static_cast<double>(static_cast<int>(config.variant)),
      config.kl_floor,                     static_cast<double>(config.c_head)};
  for (std::size_t d : config.obs_dims) meta.push_back(static_cast<double>(d));
  const std::size_t meta_len = meta.size();
  named.emplace_back("meta/config",
                     Tensor::from_values({meta_len}, std::move(meta)));
  auto copy = [&](const char* name, const Tensor& t) {
    named.emplace_back(name, Tensor::from_values(t.dims(), t.values()));
  };
  copy("phi/conv1", params.phi_conv1);
  copy("phi/conv2", params.phi_conv2);
  copy("phi/proj", params.phi_proj);
  copy("psi/conv1", params.psi_conv1);
  copy("psi/conv2", params.psi_conv2);
  copy("head/w_r1", params.w_r1);
  copy("head/w_r2", params.w_r2);
  copy("head/w_p", params.w_p);
  return named;
}

void restore_checkpoint_tensors(
    const std::vector<std::pair<std::string, Tensor>>& named,
    ModelConfig& config, ModelParams& params) {
  const Tensor* meta = nullptr;
  for (const auto& [name, tensor] : named)
    if (name == "meta/config") meta = &tensor;
  if (!meta || meta->size() < 20)
    throw std::runtime_error("checkpoint: missing meta/config record");
  const auto& m = meta->values();
  config.loc_w = static_cast<int>(m[0]);
  config.loc_d = static_cast<int>(m[1]);
  config.loc_h = static_cast<int>(m[2]);
  config.pool_x = static_cast<int>(m[3]);
  config.pool_y = static_cast<int>(m[4]);
  config.pool_z = static_cast<int>(m[5]);
  config.c_phi = static_cast<int>(m[6]);
  config.c_psi = static_cast<int>(m[7]);
  config.theta = m[8];
  config.num_actions = static_cast<int>(m[9]);
  config.lambda_kl = m[10];
  config.num_classes = static_cast<int>(m[11]);
  config.env_channels = static_cast<int>(m[12]);
  config.variant = static_cast<ModelVariant>(static_cast<int>(m[13]));
  config.kl_floor = m[14];
  config.c_head = static_cast<int>(m[15]);
  config.obs_dims.clear();
  for (std::size_t i = 16; i < m.size(); ++i)
    config.obs_dims.push_back(static_cast<std::size_t>(m[i]));
  config.validate();

  params = ModelParams{};
  auto slots = params.named();
  for (const auto& [name, tensor] : named) {
    if (name == "meta/config") continue;
    bool found = false;
    for (auto& [slot_name, slot] : slots)
      if (slot_name == name) {
        *slot = Tensor::from_values(tensor.dims(), tensor.values());
        slot->set_requires_grad(true);
        found = true;
      }
    if (!found)
      throw std::runtime_error("checkpoint: unknown tensor '" + name + "'");
  }
  for (auto& [slot_name, slot] : slots)
    if (!slot->defined())
      throw std::runtime_error("checkpoint: missing tensor '" +
                               std::string(slot_name) + "'");
}

Tensor env_to_input(const EnvDescriptor& desc, int num_classes) {
  if (desc.kind == DescriptorKind::kHVR) {
    const std::size_t X = desc.dims[0], Y = desc.dims[1], Z = desc.dims[2];
    const std::size_t m3 = desc.dims[3];
    const std::size_t C = static_cast<std::size_t>(num_classes);
    std::vector<double> data(X * Y * Z * m3 * C, 0.0);
    for (std::size_t cell = 0; cell < X * Y * Z; ++cell)
      for (std::size_t j = 0; j < m3; ++j) {
        const int cls = static_cast<int>(desc.data[cell * m3 + j]);
        if (cls < 0 || static_cast<std::size_t>(cls) >= C)
          throw std::invalid_argument("env_to_input: HVR class id outside C");
        data[(cell * m3 + j) * C + static_cast<std::size_t>(cls)] = 1.0;
      }
    return Tensor::from_values({X, Y, Z, m3 * C}, std::move(data));
  }
  if (desc.kind == DescriptorKind::kGroundPlane2D) {
    const std::size_t X = desc.dims[0], Y = desc.dims[1], C = desc.dims[2];
    return Tensor::from_values({X, Y, 1, C}, desc.data);
  }
  return Tensor::from_values(
      {desc.dims[0], desc.dims[1], desc.dims[2], desc.dims[3]}, desc.data);
}

Tensor encode_video(const Tensor& obs, const ModelParams& params,
                    const ModelConfig& config) {
  if (obs.dims() != config.obs_dims)
    throw std::invalid_argument("encode_video: observation " +
                                shape_str(obs.dims()) + " vs configured " +
                                shape_str(config.obs_dims));
  Tensor h = relu(conv3d(obs, params.phi_conv1, {1, 1, 1}, {1, 1, 1}));
  h = relu(conv3d(h, params.phi_conv2, {1, 1, 1}, {1, 1, 1}));
  Tensor pooled = avg_pool_spatial(h);
  // Egocentric video carries appearance, not world-cell identity: the
  // projected clip embedding is replicated across the location grid, and all
  // per-cell structure comes from the environment branch.
  Tensor projected = linear(pooled, params.phi_proj);
  return broadcast_spatial(projected,
                           {static_cast<std::size_t>(config.loc_w),
                            static_cast<std::size_t>(config.loc_d),
                            static_cast<std::size_t>(config.loc_h)});
}

Tensor encode_env(const Tensor& env_input, const ModelParams& params,
                  const ModelConfig& config) {
  if (env_input.rank() != 4)
    throw std::invalid_argument("encode_env: input must be (X,Y,Z,EC)");
  const std::size_t X = env_input.dims()[0];
  const std::size_t Y = env_input.dims()[1];
  const std::size_t Z = env_input.dims()[2];
  if (X != static_cast<std::size_t>(config.loc_w * config.pool_x) ||
      Y != static_cast<std::size_t>(config.loc_d * config.pool_y) ||
      Z != static_cast<std::size_t>(config.loc_h * config.pool_z))
    throw std::invalid_argument(
        "encode_env: descriptor grid " + shape_str(env_input.dims()) +
        " does not pool down to the location map");
  Tensor h = relu(conv3d(env_input, params.psi_conv1, {1, 1, 1}, {0, 0, 0}));
  h = relu(conv3d(h, params.psi_conv2,
                  {config.pool_x, config.pool_y, config.pool_z}, {0, 0, 0}));
  return h;
}

Tensor encode_env(const EnvDescriptor& desc, const ModelParams& params,
                  const ModelConfig& config) {
  return encode_env(env_to_input(desc, config.num_classes), params, config);
}

Tensor predict_location(const Tensor& video_feat, const Tensor& env_feat,
                        const ModelParams& params) {
  Tensor fused = concat_channels(video_feat, env_feat);
  Tensor hidden = relu(conv3d(fused, params.w_r1, {1, 1, 1}, {0, 0, 0}));
  Tensor logits = conv3d(hidden, params.w_r2, {1, 1, 1}, {0, 0, 0});
  Shape grid_dims(fused.dims().begin(), fused.dims().end() - 1);
  return softmax_grid(reshape(logits, std::move(grid_dims)));
}

Tensor classify(const Tensor& r_sample, const Tensor& video_feat,
                const Tensor& env_feat, const ModelParams& params) {
  Tensor video_vec = avg_pool_spatial(video_feat);
  Tensor env_vec = weighted_avg_pool(env_feat, r_sample);
  return linear(concat_channels(video_vec, env_vec), params.w_p);
}

namespace {

struct ForwardHeads {
  Tensor video_feat;
  Tensor env_feat;
  Tensor location;  // p(r|x,e)
};

ForwardHeads forward_heads(const EpisodeClip& clip, const Tensor& env_input,
                           const ModelParams& params,
                           const ModelConfig& config) {
  ForwardHeads heads;
  Tensor obs = Tensor::from_values(clip.obs_dims, clip.obs);
  heads.video_feat = encode_video(obs, params, config);
  Tensor zero_env({static_cast<std::size_t>(config.loc_w),
                   static_cast<std::size_t>(config.loc_d),
                   static_cast<std::size_t>(config.loc_h),
                   static_cast<std::size_t>(config.c_psi)});
  heads.env_feat = config.variant == ModelVariant::kVideoOnly
                       ? zero_env
                       : encode_env(env_input, params, config);
  // The global-env ablation fuses environment features without location
  // selection; like the plain video baseline, its location head reads
  // network features from the video branch alone.
  const Tensor& head_env = config.variant == ModelVariant::kGlobalEnv
                               ? zero_env
                               : heads.env_feat;
  heads.location = predict_location(heads.video_feat, head_env, params);
  return heads;
}

Tensor uniform_sample_like(const Tensor& location) {
  return Tensor(location.dims(),
                1.0 / static_cast<double>(location.size()));
}

}  // namespace

StepStats training_step(const EpisodeClip& clip, const Tensor& env_input,
                        ModelParams& params, const ModelConfig& config,
                        Rng& rng) {
  config.validate();
  ForwardHeads heads = forward_heads(clip, env_input, params, config);

  Tensor sample;
  switch (config.variant) {
    case ModelVariant::kGlobalEnv:
      sample = uniform_sample_like(heads.location);
      break;
    case ModelVariant::kDeterministic:
      sample = heads.location;
      break;
    default:
      sample = gumbel_softmax(heads.location, config.theta, rng);
  }

  Tensor logits = classify(sample, heads.video_feat, heads.env_feat, params);
  Tensor ce = cross_entropy(logits, clip.label);

  LocationDistribution q = downsample_distribution(
      clip.prior, config.pool_x, config.pool_y, config.pool_z);
  if (config.kl_floor > 0.0) {
    const double u = config.kl_floor / static_cast<double>(q.cells());
    for (double& v : q.probs) v = (1.0 - config.kl_floor) * v + u;
  }
  Tensor q_t = Tensor::from_values(heads.location.dims(), q.probs);
  Tensor kl = kl_divergence(heads.location, q_t);

  Tensor loss = add(ce, scale(kl, config.lambda_kl));
  loss.backward();
  return StepStats{loss.item(), ce.item(), kl.item()};
}

Inference infer(const EpisodeClip& clip, const Tensor& env_input,
                const ModelParams& params, const ModelConfig& config) {
  config.validate();
  ForwardHeads heads = forward_heads(clip, env_input, params, config);
  Tensor sample = config.variant == ModelVariant::kGlobalEnv
                      ? uniform_sample_like(heads.location)
                      : heads.location;
  Tensor logits = classify(sample, heads.video_feat, heads.env_feat, params);
  Tensor scores = softmax_grid(logits);

  Inference out;
  out.scores = scores.values();
  out.label = static_cast<int>(
      std::max_element(out.scores.begin(), out.scores.end()) -
      out.scores.begin());
  out.location =
      LocationDistribution{static_cast<std::size_t>(config.loc_w),
                           static_cast<std::size_t>(config.loc_d),
                           static_cast<std::size_t>(config.loc_h),
                           heads.location.values()};
  return out;
}

}  // namespace hvr
