// Command-line front end: voxelize | prior | synth | train | eval | render.

#include <CLI11.hpp>

#include "hvr/cli.hpp"

namespace {

void add_grid_flags(CLI::App* cmd, hvr::GridSpec& grid) {
  cmd->add_option("--origin", [&grid](const std::vector<std::string>& v) {
        grid.origin = {std::stod(v[0]), std::stod(v[1]), std::stod(v[2])};
        return true;
      })
      ->expected(3)
      ->description("grid origin x y z (meters), default 0 0 0");
  cmd->add_option("--extents", [&grid](const std::vector<std::string>& v) {
        grid.extents = {std::stod(v[0]), std::stod(v[1]), std::stod(v[2])};
        return true;
      })
      ->expected(3)
      ->description("grid extents x y z (meters)");
  cmd->add_option("--dims", [&grid](const std::vector<std::string>& v) {
        grid.nx = std::stoi(v[0]);
        grid.ny = std::stoi(v[1]);
        grid.nz = std::stoi(v[2]);
        return true;
      })
      ->expected(3)
      ->description("parent voxel counts X Y Z, default 28 28 8");
  cmd->add_option("--m", grid.m, "children per parent voxel per axis");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action recognition and 3D localization on a volumetric map"};
  app.require_subcommand(1);

  hvr::cli::VoxelizeArgs vox;
  CLI::App* voxelize =
      app.add_subcommand("voxelize", "rasterize a labeled mesh into an "
                                     "environment descriptor");
  voxelize->add_option("--mesh", vox.mesh_path, "input mesh file");
  add_grid_flags(voxelize, vox.grid);
  voxelize->add_option("--kind", vox.kind,
                       "hvr | semvoxel | groundplane | affordance");
  voxelize->add_option("--episodes", vox.episodes_path,
                       "episode file (affordance kind)");
  voxelize->add_option("--actions", vox.num_actions,
                       "action count (affordance kind)");
  voxelize->add_option("--out", vox.out_path, "output ENVD file")->required();

  hvr::cli::PriorArgs prior;
  CLI::App* prior_cmd = app.add_subcommand(
      "prior", "camera track -> Gaussian location prior");
  prior_cmd->add_option("--track", prior.track_path, "input track file")
      ->required();
  add_grid_flags(prior_cmd, prior.grid);
  prior_cmd->add_option("--sigma", prior.sigma, "Gaussian std in voxels");
  prior_cmd->add_flag("--check", prior.check, "verify the output sums to 1");
  prior_cmd->add_option("--out", prior.out_path, "output LOCD file")
      ->required();

  hvr::cli::SynthArgs synth;
  std::uint64_t synth_seed = synth.config.seed;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "generate a synthetic environment and episode splits");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  add_grid_flags(synth_cmd, synth.config.grid);
  synth_cmd->add_option("--classes", synth.config.num_classes,
                        "object classes incl. empty");
  synth_cmd->add_option("--actions", synth.config.num_actions,
                        "action classes");
  synth_cmd->add_option("--objects", synth.config.num_objects,
                        "total object placements");
  synth_cmd->add_option("--train-episodes", synth.config.train_episodes, "");
  synth_cmd->add_option("--test-episodes", synth.config.test_episodes, "");
  synth_cmd->add_option("--sigma-obs", synth.config.sigma_obs,
                        "observation noise");
  synth_cmd->add_option("--rho", synth.config.rho,
                        "fraction of env-dependent classes");
  synth_cmd->add_option("--p-drop", synth.config.p_drop,
                        "key-frame dropout rate");
  synth_cmd->add_flag("--unseen", synth.config.unseen,
                      "fresh world for the test split");
  synth_cmd->add_option("--sigma-prior", synth.config.sigma_prior,
                        "prior smoothing in voxels");
  synth_cmd->add_option("--out", synth.out_dir, "output directory")
      ->required();

  hvr::cli::TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model variant");
  train_cmd->add_option("--data", train.data_dir, "synth output directory")
      ->required();
  train_cmd->add_option("--out", train.out_checkpoint, "output checkpoint")
      ->required();
  train_cmd->add_option("--log", train.log_path,
                        "training log (default <out>.log)");
  train_cmd->add_option("--variant", train.variant,
                        "full | video-only | global-env | deterministic");
  train_cmd->add_option("--init", train.init, "random | zero");
  train_cmd->add_option("--epochs", train.epochs, "passes over the train set");
  train_cmd->add_option("--lr", train.lr, "initial learning rate");
  train_cmd->add_option("--momentum", train.momentum, "SGD momentum");
  train_cmd->add_option("--theta", train.theta, "Gumbel-Softmax temperature");
  train_cmd->add_option("--lambda-kl", train.lambda_kl, "KL loss weight");
  train_cmd->add_option("--c-phi", train.c_phi, "video feature channels");
  train_cmd->add_option("--c-psi", train.c_psi, "env feature channels");
  train_cmd->add_option("--seed", train.seed, "training seed");

  hvr::cli::EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint and write a report");
  eval_cmd->add_option("--checkpoint", eval.checkpoint_path, "model file")
      ->required();
  eval_cmd->add_option("--data", eval.data_dir, "synth output directory")
      ->required();
  eval_cmd->add_option("--out", eval.out_dir, "report directory")->required();
  eval_cmd->add_option("--split", eval.split, "test | train");
  eval_cmd->add_option("--tau", eval.tau,
                       "heatmap binarization threshold (default: uniform "
                       "density)");
  eval_cmd->add_option("--workers", eval.workers, "parallel evaluation");

  hvr::cli::RenderArgs render;
  CLI::App* render_cmd = app.add_subcommand(
      "render", "top-down max projection of a LOCD heatmap as PGM");
  render_cmd->add_option("--in", render.locd_path, "input LOCD file")
      ->required();
  render_cmd->add_option("--out", render.out_path, "output PGM file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (voxelize->parsed()) return hvr::cli::cmd_voxelize(vox);
  if (prior_cmd->parsed()) return hvr::cli::cmd_prior(prior);
  if (synth_cmd->parsed()) {
    synth.config.seed = hvr::cli::resolve_seed(synth_seed);
    return hvr::cli::cmd_synth(synth);
  }
  if (train_cmd->parsed()) {
    train.seed = hvr::cli::resolve_seed(train.seed);
    return hvr::cli::cmd_train(train);
  }
  if (eval_cmd->parsed()) return hvr::cli::cmd_eval(eval);
  if (render_cmd->parsed()) return hvr::cli::cmd_render(render);
  return 1;
}
