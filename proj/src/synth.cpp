#include "hvr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvr {

void SynthConfig::validate() const {
  grid.validate();
  if (num_actions < 2) throw std::invalid_argument("synth: num_actions >= 2");
  if (rho < 0.0 || rho > 1.0 || p_drop < 0.0 || p_drop > 1.0)
    throw std::invalid_argument("synth: rho and p_drop must be in [0,1]");
  if (rho > 0.0 && num_actions % 2 != 0)
    throw std::invalid_argument(
        "synth: num_actions must be even when rho > 0 (confusable pairs)");
  if (num_classes < num_actions + 2)
    throw std::invalid_argument(
        "synth: num_classes must be >= num_actions + 2 (context classes plus "
        "a prop/clutter band)");
  if (num_objects < num_actions)
    throw std::invalid_argument("synth: num_objects >= num_actions");
  if (frames < 1) throw std::invalid_argument("synth: frames >= 1");
  if (crop[0] < 3 || crop[1] < 3 || crop[2] < 1 || crop[0] % 2 == 0 ||
      crop[1] % 2 == 0 || crop[2] % 2 == 0)
    throw std::invalid_argument("synth: crop dims must be odd, >= (3,3,1)");
  if (grid.nx % site_block[0] != 0 || grid.ny % site_block[1] != 0 ||
      grid.nz % site_block[2] != 0)
    throw std::invalid_argument("synth: site blocks must tile the grid");
  const int bx = grid.nx / site_block[0];
  const int by = grid.ny / site_block[1];
  const int bz = grid.nz / site_block[2];
  if (bx * by * bz < num_actions)
    throw std::invalid_argument(
        "synth: grid too small to place objects (fewer site blocks than "
        "action classes)");
  // every episode crop must fit inside one block around the camera zone
  if (zone_pad < 0) throw std::invalid_argument("synth: zone_pad >= 0");
  const int cbx = site_block[0] * grid.m;
  const int cby = site_block[1] * grid.m;
  const int cbz = site_block[2] * grid.m;
  if (cbx < crop[0] + 2 * zone_pad + 1 || cby < crop[1] + 2 * zone_pad + 1 ||
      cbz < crop[2])
    throw std::invalid_argument(
        "synth: grid too small to place objects (site block cannot contain "
        "the observation crop)");
}

int SynthConfig::confusable_classes() const {
  int n = static_cast<int>(std::lround(rho * num_actions / 2.0)) * 2;
  return std::min(n, num_actions);
}

int template_of_action(const SynthConfig& config, int action) {
  const int n_conf = config.confusable_classes();
  if (action < n_conf) return action / 2;
  return n_conf / 2 + (action - n_conf);
}

int prop_class_of_action(const SynthConfig& config, int action) {
  const int band = config.num_classes - 1 - config.num_actions;
  return config.num_actions + 1 +
         template_of_action(config, action) % band;
}

int context_class_of_action(int action) { return 1 + action; }

int SynthWorld::child_label(int cx, int cy, int cz) const {
  const int gx = grid.nx * grid.m;
  const int gy = grid.ny * grid.m;
  const int gz = grid.nz * grid.m;
  if (cx < 0 || cy < 0 || cz < 0 || cx >= gx || cy >= gy || cz >= gz) return 0;
  return child_labels[(static_cast<std::size_t>(cx) * gy + cy) * gz + cz];
}

namespace {

// Uniform vertex cloud; at least 50 vertices per object, more for big boxes
// so every covered child voxel is very likely hit.
void fill_box(SemanticMesh& mesh, const Box& box, int label, const Vec3& child,
              Rng& rng) {
  const double vol_children = ((box.hi.x - box.lo.x) / child.x) *
                              ((box.hi.y - box.lo.y) / child.y) *
                              ((box.hi.z - box.lo.z) / child.z);
  const int count = std::clamp(static_cast<int>(vol_children * 12.0), 50, 600);
  for (int i = 0; i < count; ++i)
    mesh.vertices.push_back({rng.uniform(box.lo.x, box.hi.x),
                             rng.uniform(box.lo.y, box.hi.y),
                             rng.uniform(box.lo.z, box.hi.z), label});
}

std::vector<int> rasterize_children(const SemanticMesh& mesh,
                                    const GridSpec& grid) {
  EnvDescriptor hvr = build_hvr(mesh, grid);
  const int gx = grid.nx * grid.m;
  const int gy = grid.ny * grid.m;
  const int gz = grid.nz * grid.m;
  std::vector<int> labels(static_cast<std::size_t>(gx) * gy * gz, 0);
  const std::size_t m3 = grid.children_per_parent();
  for (int cx = 0; cx < gx; ++cx)
    for (int cy = 0; cy < gy; ++cy)
      for (int cz = 0; cz < gz; ++cz) {
        const std::size_t parent = grid.parent_index(cx / grid.m, cy / grid.m,
                                                     cz / grid.m);
        const std::size_t child = grid.child_offset(cx % grid.m, cy % grid.m,
                                                    cz % grid.m);
        labels[(static_cast<std::size_t>(cx) * gy + cy) * gz + cz] =
            static_cast<int>(hvr.data[parent * m3 + child]);
      }
  return labels;
}

}  // namespace

SynthWorld generate_world(const SynthConfig& config) {
  return generate_world_with_seed(config, Rng(config.seed).split(1).seed());
}

SynthWorld generate_world_with_seed(const SynthConfig& config,
                                    std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const GridSpec& grid = config.grid;
  const Vec3 child = grid.child_size();

  const int bx = grid.nx / config.site_block[0];
  const int by = grid.ny / config.site_block[1];
  const int bz = grid.nz / config.site_block[2];
  std::vector<int> blocks(static_cast<std::size_t>(bx) * by * bz);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i] = static_cast<int>(i);
  rng.shuffle(blocks);

  // block -> origin in child units
  auto block_child_origin = [&](int b) {
    const int ix = b / (by * bz);
    const int iy = (b / bz) % by;
    const int iz = b % bz;
    return std::array<int, 3>{ix * config.site_block[0] * grid.m,
                              iy * config.site_block[1] * grid.m,
                              iz * config.site_block[2] * grid.m};
  };
  auto child_point = [&](double cx, double cy, double cz) {
    return Vec3{grid.origin.x + cx * child.x, grid.origin.y + cy * child.y,
                grid.origin.z + cz * child.z};
  };

  const int cbx = config.site_block[0] * grid.m;
  const int cby = config.site_block[1] * grid.m;
  const int hx = config.crop[0] / 2, hy = config.crop[1] / 2,
            hz = config.crop[2] / 2;

  SynthWorld world;
  world.seed = seed;
  world.grid = grid;
  world.mesh.num_classes = config.num_classes;
  world.sites.resize(static_cast<std::size_t>(config.num_actions));

  // One context slab + camera zone per action class.
  for (int a = 0; a < config.num_actions; ++a) {
    const int b = blocks[static_cast<std::size_t>(a)];
    const auto o = block_child_origin(b);

    // camera zone: as wide as the block allows while keeping the crop inside
    // it (plus zone_pad children of slack), starting one child above the
    // slab floor so the slab surface stays inside the observation window
    const int cbz = config.site_block[2] * grid.m;
    const double ix = hx + config.zone_pad, iy = hy + config.zone_pad;
    const double zx0 = o[0] + ix, zx1 = o[0] + cbx - ix;
    const double zy0 = o[1] + iy, zy1 = o[1] + cby - iy;
    const double zz0 = o[2] + std::max(1, hz);
    const double zz1 = o[2] + std::min(static_cast<double>(cbz - hz), zz0 + 2.0);
    ActionSite site;
    site.block = b;
    site.zone = Box{child_point(zx0, zy0, zz0), child_point(zx1, zy1, zz1)};
    world.sites[static_cast<std::size_t>(a)] = site;

    // slab: one-or-two-child-thick floor piece spanning the zone footprint
    const double sx0 = o[0] + rng.uniform(0.2, 1.2);
    const double sx1 = o[0] + cbx - rng.uniform(0.2, 1.2);
    const double sy0 = o[1] + rng.uniform(0.2, 1.2);
    const double sy1 = o[1] + cby - rng.uniform(0.2, 1.2);
    const double sz1 = o[2] + rng.uniform(0.6, 1.9);
    Box slab{child_point(sx0, sy0, o[2] + 0.05),
             child_point(sx1, sy1, sz1)};
    const int ctx = context_class_of_action(a);
    world.placements.emplace_back(ctx, slab);
    fill_box(world.mesh, slab, ctx, child, rng);
  }

  // Clutter: anonymous-geometry fingerprints. Site blocks are filled first so
  // every action location has identifying structure in view.
  const int clutter_count = config.num_objects - config.num_actions;
  const int band = config.num_classes - 1 - config.num_actions;
  const int per_site = 4;
  for (int i = 0; i < clutter_count; ++i) {
    int b;
    if (i < per_site * config.num_actions) {
      b = blocks[static_cast<std::size_t>(i % config.num_actions)];
    } else {
      const std::size_t rest = blocks.size() - config.num_actions;
      b = blocks[config.num_actions +
                 (i - per_site * config.num_actions) % rest];
    }
    const auto o = block_child_origin(b);
    const int cbz = config.site_block[2] * grid.m;
    const double cx = o[0] + rng.uniform(1.0, cbx - 1.0);
    const double cy = o[1] + rng.uniform(1.0, cby - 1.0);
    const double cz = o[2] + rng.uniform(1.2, cbz - 0.6);
    const double rx = rng.uniform(0.3, 0.9);
    const double ry = rng.uniform(0.3, 0.9);
    const double rz = std::min(rng.uniform(0.3, 0.9),
                               o[2] + cbz - 0.05 - cz);  // stay in the block
    Box box{child_point(cx - rx, cy - ry, cz - rz),
            child_point(cx + rx, cy + ry, cz + rz)};
    const int cls = config.num_actions + 1 +
                    static_cast<int>(rng.uniform_index(
                        static_cast<std::uint64_t>(band)));
    world.placements.emplace_back(cls, box);
    fill_box(world.mesh, box, cls, child, rng);
  }

  world.child_labels = rasterize_children(world.mesh, grid);
  return world;
}

EpisodeClip generate_episode(const SynthWorld& world, const SynthConfig& config,
                             Rng& rng) {
  const int action =
      static_cast<int>(rng.uniform_index(config.num_actions));
  const ActionSite& site = world.sites[static_cast<std::size_t>(action)];
  const Vec3 pos{rng.uniform(site.zone.lo.x, site.zone.hi.x),
                 rng.uniform(site.zone.lo.y, site.zone.hi.y),
                 rng.uniform(site.zone.lo.z, site.zone.hi.z)};

  EpisodeClip clip;
  clip.label = action;
  clip.true_position = pos;

  // Observation: the crop of the child grid around the camera, with world
  // structure rendered as the anonymous channel C and the action's prop
  // template stamped over the central cells with its visible class.
  const int C = config.num_classes;
  const int hx = config.crop[0] / 2, hy = config.crop[1] / 2,
            hz = config.crop[2] / 2;
  auto center = world.grid.child_cell(pos);
  if (!center) throw std::logic_error("synth: camera left the grid");

  const int tmpl = template_of_action(config, action);
  const int prop = prop_class_of_action(config, action);
  const std::size_t channels = config.obs_channels();
  std::vector<int> codes(static_cast<std::size_t>(config.crop[0]) *
                         config.crop[1] * config.crop[2]);
  std::size_t idx = 0;
  for (int ox = -hx; ox <= hx; ++ox)
    for (int oy = -hy; oy <= hy; ++oy)
      for (int oz = -hz; oz <= hz; ++oz, ++idx) {
        int code = 0;
        const int lbl = world.child_label((*center)[0] + ox, (*center)[1] + oy,
                                          (*center)[2] + oz);
        if (lbl != 0) code = C;  // geometry without semantics
        if (oz == 0 && std::abs(ox) <= 1 && std::abs(oy) <= 1) {
          const int bit = (oy + 1) * 3 + (ox + 1);
          if (((tmpl + 1) >> bit) & 1) code = prop;
        }
        codes[idx] = code;
      }

  clip.obs_dims = config.obs_dims();
  const std::size_t frame_stride = static_cast<std::size_t>(config.crop[0]) *
                                   config.crop[1] * channels;
  clip.obs.assign(static_cast<std::size_t>(config.frames) * frame_stride, 0.0);
  for (int t = 0; t < config.frames; ++t) {
    for (int ix = 0; ix < config.crop[0]; ++ix)
      for (int iy = 0; iy < config.crop[1]; ++iy)
        for (int iz = 0; iz < config.crop[2]; ++iz) {
          const std::size_t code_idx =
              (static_cast<std::size_t>(ix) * config.crop[1] + iy) *
                  config.crop[2] +
              iz;
          const std::size_t base =
              static_cast<std::size_t>(t) * frame_stride +
              (static_cast<std::size_t>(ix) * config.crop[1] + iy) * channels +
              static_cast<std::size_t>(iz) * (C + 1);
          clip.obs[base + static_cast<std::size_t>(codes[code_idx])] = 1.0;
        }
    if (config.sigma_obs > 0.0)
      for (std::size_t j = 0; j < frame_stride; ++j)
        clip.obs[static_cast<std::size_t>(t) * frame_stride + j] +=
            rng.normal(0.0, config.sigma_obs);
  }

  // Key-frame track: dropped entirely with probability p_drop; otherwise one
  // key frame at the position, sometimes a second one inside the same parent
  // voxel.
  if (!rng.bernoulli(config.p_drop)) {
    clip.track.key_frames.push_back({0, pos});
    if (rng.bernoulli(0.3)) {
      const Vec3 parent = world.grid.parent_size();
      auto cell = world.grid.parent_cell(pos);
      Vec3 lo{world.grid.origin.x + (*cell)[0] * parent.x,
              world.grid.origin.y + (*cell)[1] * parent.y,
              world.grid.origin.z + (*cell)[2] * parent.z};
      Vec3 jitter{
          std::clamp(pos.x + rng.uniform(-0.3, 0.3) * parent.x,
                     lo.x + 1e-6, lo.x + parent.x - 1e-6),
          std::clamp(pos.y + rng.uniform(-0.3, 0.3) * parent.y,
                     lo.y + 1e-6, lo.y + parent.y - 1e-6),
          std::clamp(pos.z + rng.uniform(-0.3, 0.3) * parent.z,
                     lo.z + 1e-6, lo.z + parent.z - 1e-6)};
      clip.track.key_frames.push_back({8, jitter});
    }
  }
  clip.prior = make_prior(clip.track, world.grid, config.sigma_prior);
  return clip;
}

SynthSplit generate_split(const SynthConfig& config) {
  config.validate();
  Rng base(config.seed);

  SynthSplit split;
  split.world = generate_world_with_seed(config, base.split(1).seed());
  split.test_world = config.unseen
                         ? generate_world_with_seed(config, base.split(2).seed())
                         : split.world;
  split.env = build_hvr(split.world.mesh, config.grid);
  split.test_env = config.unseen ? build_hvr(split.test_world.mesh, config.grid)
                                 : split.env;

  split.train.reserve(static_cast<std::size_t>(config.train_episodes));
  for (int i = 0; i < config.train_episodes; ++i) {
    Rng ep = base.split(0x100000 + static_cast<std::uint64_t>(i));
    split.train.push_back(generate_episode(split.world, config, ep));
  }
  split.test.reserve(static_cast<std::size_t>(config.test_episodes));
  for (int i = 0; i < config.test_episodes; ++i) {
    Rng ep = base.split(0x200000 + static_cast<std::uint64_t>(i));
    split.test.push_back(generate_episode(split.test_world, config, ep));
  }
  return split;
}

ModelConfig model_config_for(const SynthConfig& config, ModelVariant variant) {
  ModelConfig mc;
  mc.pool_x = config.site_block[0];
  mc.pool_y = config.site_block[1];
  mc.pool_z = config.site_block[2];
  mc.loc_w = config.grid.nx / mc.pool_x;
  mc.loc_d = config.grid.ny / mc.pool_y;
  mc.loc_h = config.grid.nz / mc.pool_z;
  mc.num_actions = config.num_actions;
  mc.num_classes = config.num_classes;
  mc.env_channels = static_cast<int>(config.grid.children_per_parent()) *
                    config.num_classes;
  mc.obs_dims = config.obs_dims();
  mc.variant = variant;
  return mc;
}

}  // namespace hvr
