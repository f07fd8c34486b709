#include "hvr/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hvr/checkpoint.hpp"
#include "hvr/env_descriptor.hpp"
#include "hvr/metrics.hpp"
#include "hvr/model.hpp"
#include "hvr/pgm.hpp"

namespace hvr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t resolve_seed(std::uint64_t flag_value) {
  if (const char* env = std::getenv("HVR_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return flag_value;
}

namespace {

json grid_to_json(const GridSpec& g) {
  return json{{"origin", {g.origin.x, g.origin.y, g.origin.z}},
              {"extents", {g.extents.x, g.extents.y, g.extents.z}},
              {"dims", {g.nx, g.ny, g.nz}},
              {"m", g.m}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.origin = {j["origin"][0], j["origin"][1], j["origin"][2]};
  g.extents = {j["extents"][0], j["extents"][1], j["extents"][2]};
  g.nx = j["dims"][0];
  g.ny = j["dims"][1];
  g.nz = j["dims"][2];
  g.m = j["m"];
  return g;
}

SynthConfig synth_config_from_meta(const json& meta) {
  SynthConfig c;
  c.seed = meta["seed"];
  c.grid = grid_from_json(meta["grid"]);
  c.num_classes = meta["num_classes"];
  c.num_actions = meta["num_actions"];
  c.num_objects = meta["num_objects"];
  c.train_episodes = meta["train_episodes"];
  c.test_episodes = meta["test_episodes"];
  c.sigma_obs = meta["sigma_obs"];
  c.rho = meta["rho"];
  c.p_drop = meta["p_drop"];
  c.unseen = meta["unseen"];
  c.sigma_prior = meta["sigma_prior"];
  c.frames = meta["frames"];
  c.crop = {meta["crop"][0], meta["crop"][1], meta["crop"][2]};
  c.site_block = {meta["site_block"][0], meta["site_block"][1],
                  meta["site_block"][2]};
  return c;
}

json load_meta(const std::string& data_dir) {
  std::ifstream in(fs::path(data_dir) / "meta.json");
  if (!in)
    throw std::runtime_error("cannot open " + data_dir + "/meta.json");
  json meta;
  in >> meta;
  return meta;
}

int fail(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

}  // namespace

int cmd_voxelize(const VoxelizeArgs& args) {
  try {
    args.grid.validate();
    EnvDescriptor desc;
    std::size_t outside = 0;
    if (args.kind == "affordance") {
      if (args.episodes_path.empty())
        throw std::runtime_error("--kind affordance requires --episodes");
      auto episodes =
          load_episodes(args.episodes_path, args.grid, args.sigma_prior);
      std::size_t skipped = 0;
      desc = build_affordance(episodes, args.grid, args.num_actions, &skipped);
      outside = skipped;
    } else {
      SemanticMesh mesh = load_mesh(args.mesh_path);
      if (args.kind == "hvr") {
        desc = build_hvr(mesh, args.grid, &outside);
      } else if (args.kind == "semvoxel") {
        desc = build_semvoxel(mesh, args.grid, &outside);
      } else if (args.kind == "groundplane") {
        desc = build_ground_plane(build_semvoxel(mesh, args.grid, &outside));
      } else {
        throw std::runtime_error("unknown descriptor kind: " + args.kind);
      }
    }
    save_envd(args.out_path, desc);
    std::cout << "kind: " << kind_name(desc.kind) << "\ndims:";
    for (std::size_t d : desc.dims) std::cout << " " << d;
    std::cout << "\nnon-empty cells: " << desc.non_empty_cells()
              << "\nout-of-extent vertices: " << outside << "\nwrote "
              << args.out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_prior(const PriorArgs& args) {
  try {
    CameraTrack track = load_track(args.track_path);
    std::size_t skipped = 0;
    bool fallback = false;
    LocationDistribution prior =
        make_prior(track, args.grid, args.sigma, &skipped, &fallback);
    save_locd(args.out_path, prior);
    if (args.check) {
      prior.validate();
      std::cout << "check: sum = " << prior.sum() << " ok\n";
    }
    std::cout << "key frames: " << track.key_frames.size() << " (skipped "
              << skipped << ")\n";
    if (fallback) std::cout << "warning: all key frames outside grid, uniform prior\n";
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_synth(const SynthArgs& args) {
  try {
    SynthConfig config = args.config;
    config.validate();
    fs::create_directories(args.out_dir);
    SynthSplit split = generate_split(config);

    const fs::path dir(args.out_dir);
    save_mesh((dir / "world.mesh").string(), split.world.mesh);
    save_envd((dir / "env.envd").string(), split.env);
    if (config.unseen) {
      save_mesh((dir / "world_test.mesh").string(), split.test_world.mesh);
      save_envd((dir / "env_test.envd").string(), split.test_env);
    }
    save_episodes((dir / "train.episodes").string(), split.train,
                  config.num_actions);
    save_episodes((dir / "test.episodes").string(), split.test,
                  config.num_actions);

    json meta{{"seed", config.seed},
              {"grid", grid_to_json(config.grid)},
              {"num_classes", config.num_classes},
              {"num_actions", config.num_actions},
              {"num_objects", config.num_objects},
              {"train_episodes", config.train_episodes},
              {"test_episodes", config.test_episodes},
              {"sigma_obs", config.sigma_obs},
              {"rho", config.rho},
              {"p_drop", config.p_drop},
              {"unseen", config.unseen},
              {"sigma_prior", config.sigma_prior},
              {"frames", config.frames},
              {"crop", {config.crop[0], config.crop[1], config.crop[2]}},
              {"site_block",
               {config.site_block[0], config.site_block[1],
                config.site_block[2]}}};
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";

    std::cout << "world objects: " << split.world.placements.size()
              << "\ntrain episodes: " << split.train.size()
              << "\ntest episodes: " << split.test.size() << "\nwrote "
              << args.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_train(const TrainArgs& args) {
  try {
    json meta = load_meta(args.data_dir);
    SynthConfig synth = synth_config_from_meta(meta);
    const fs::path dir(args.data_dir);

    ModelConfig config =
        model_config_for(synth, variant_from_name(args.variant));
    config.theta = args.theta;
    config.lambda_kl = args.lambda_kl;
    config.c_phi = args.c_phi;
    config.c_psi = args.c_psi;

    EnvDescriptor env = load_envd((dir / "env.envd").string());
    env.grid = synth.grid;
    Tensor env_input = env_to_input(env, config.num_classes);

    auto episodes = load_episodes((dir / "train.episodes").string(),
                                  synth.grid, synth.sigma_prior);
    if (episodes.empty()) throw std::runtime_error("no training episodes");

    Rng rng(resolve_seed(args.seed));
    ModelParams params = args.init == "zero" ? zero_params(config)
                                             : init_params(config, rng);

    const std::string log_path =
        args.log_path.empty() ? args.out_checkpoint + ".log" : args.log_path;
    std::ofstream log(log_path);
    if (!log) throw std::runtime_error("cannot write log: " + log_path);
    log.precision(10);

    std::vector<std::size_t> order(episodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t total_steps =
        episodes.size() * static_cast<std::size_t>(std::max(0, args.epochs));
    std::vector<std::vector<double>> velocity;
    auto tensors = params.all();

    std::size_t step = 0;
    for (int epoch = 0; epoch < args.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        const double lr = cosine_lr(args.lr, step, total_steps);
        StepStats stats =
            training_step(episodes[i], env_input, params, config, rng);
        if (!std::isfinite(stats.loss)) {
          std::cerr << "error: non-finite loss at step " << step << "\n";
          return 2;
        }
        sgd_step(tensors, velocity, lr, args.momentum);
        log << "step=" << step << " loss=" << stats.loss << " ce=" << stats.ce
            << " kl=" << stats.kl << " lr=" << lr << "\n";
        ++step;
      }
    }

    save_checkpoint(args.out_checkpoint, checkpoint_tensors(params, config));
    std::cout << "variant: " << args.variant << "\nsteps: " << step
              << "\nwrote " << args.out_checkpoint << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_eval(const EvalArgs& args) {
  try {
    json meta = load_meta(args.data_dir);
    SynthConfig synth = synth_config_from_meta(meta);
    const fs::path dir(args.data_dir);

    ModelConfig config;
    ModelParams params;
    restore_checkpoint_tensors(load_checkpoint(args.checkpoint_path), config,
                               params);

    const bool test_split = args.split != "train";
    const std::string env_file =
        (test_split && synth.unseen) ? "env_test.envd" : "env.envd";
    EnvDescriptor env = load_envd((dir / env_file).string());
    env.grid = synth.grid;
    Tensor env_input = env_to_input(env, config.num_classes);

    auto episodes = load_episodes(
        (dir / (test_split ? "test.episodes" : "train.episodes")).string(),
        synth.grid, synth.sigma_prior);

    EvalOptions options;
    options.tau = args.tau;
    options.sigma = synth.sigma_prior;
    options.workers = args.workers;
    std::vector<EpisodeRecord> records;
    EvalReport report = evaluate(params, config, episodes, env_input,
                                 synth.grid, options, &records);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);

    std::ofstream txt(out / "report.txt");
    txt.precision(10);
    txt << "episodes = " << report.episodes << "\n"
        << "mean_class_acc = " << report.mean_class_acc << "\n"
        << "top1_acc = " << report.top1_acc << "\n"
        << "loc_precision = " << report.loc_precision << "\n"
        << "loc_recall = " << report.loc_recall << "\n"
        << "loc_f1 = " << report.loc_f1 << "\n"
        << "localized_episodes = " << report.localized_episodes << "\n";
    for (std::size_t c = 0; c < report.class_total.size(); ++c) {
      txt << "class_" << c << "_acc = ";
      if (report.class_total[c] == 0)
        txt << "n/a\n";
      else
        txt << static_cast<double>(report.class_correct[c]) /
                   static_cast<double>(report.class_total[c])
            << "\n";
    }

    json jr{{"episodes", report.episodes},
            {"mean_class_acc", report.mean_class_acc},
            {"top1_acc", report.top1_acc},
            {"loc_precision", report.loc_precision},
            {"loc_recall", report.loc_recall},
            {"loc_f1", report.loc_f1},
            {"localized_episodes", report.localized_episodes},
            {"class_total", report.class_total},
            {"class_correct", report.class_correct}};
    std::ofstream js(out / "report.json");
    js << jr.dump(2) << "\n";

    std::ofstream csv(out / "predictions.csv");
    csv << "episode,label,pred,top_voxel\n";
    for (const EpisodeRecord& r : records)
      csv << r.id << "," << r.label << "," << r.pred << "," << r.top_voxel
          << "\n";

    std::cout << "episodes: " << report.episodes
              << "\nmean class acc: " << report.mean_class_acc
              << "\ntop-1 acc: " << report.top1_acc
              << "\nlocalization P/R/F1: " << report.loc_precision << " "
              << report.loc_recall << " " << report.loc_f1 << "\nwrote "
              << args.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_render(const RenderArgs& args) {
  try {
    LocationDistribution dist = load_locd(args.locd_path);
    save_topdown_pgm(args.out_path, dist);
    std::cout << "wrote " << args.out_path << " (" << dist.w << "x" << dist.d
              << ")\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

}  // namespace hvr::cli
