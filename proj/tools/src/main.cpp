// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "gs360/types.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>

namespace {

using gs360::cli::EvalArgs;
using gs360::cli::FitArgs;
using gs360::cli::RenderArgs;
using gs360::cli::SweepArgs;
using gs360::cli::SynthArgs;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;

void add_synth(CLI::App &app, std::function<void()> &action) {
  auto args = std::make_shared<SynthArgs>();
  CLI::App *cmd = app.add_subcommand(
      "synth", "Write analytic ground-truth panoramas and a surface cloud");
  cmd->add_option("--room", args->room, "Room preset name (roomA)")
      ->capture_default_str();
  cmd->add_option("--config", args->config,
                  "Room config file (extents/texture/period/seed/poses)");
  cmd->add_option("--height", args->height,
                  "Preset panorama height in pixels (width is twice that)")
      ->capture_default_str();
  cmd->add_option("--cloud-density", args->cloud_density,
                  "Surface samples per square meter")
      ->capture_default_str();
  cmd->add_option("--seed", args->seed, "Override the room seed (>= 0)");
  cmd->add_option("--out", args->out_dir, "Output directory")->required();
  cmd->callback([args, &action] { action = [args] { run_synth(*args); }; });
}

void add_sweep(CLI::App &app, std::function<void()> &action) {
  auto args = std::make_shared<SweepArgs>();
  CLI::App *cmd = app.add_subcommand(
      "sweep", "Plane-sweep a depth prior from posed panoramas");
  cmd->add_option("--images", args->images,
                  "Panorama files, same order as the pose file")
      ->required()
      ->expected(-2);
  cmd->add_option("--poses", args->poses, "Pose file")->required();
  cmd->add_option("--ref", args->ref, "Reference view index")
      ->capture_default_str();
  cmd->add_option("--near", args->near_m, "Nearest hypothesis in meters")
      ->capture_default_str();
  cmd->add_option("--far", args->far_m, "Farthest hypothesis in meters")
      ->capture_default_str();
  cmd->add_option("--K,--hypotheses", args->hypotheses,
                  "Depth hypothesis count")
      ->capture_default_str();
  cmd->add_option("--tau", args->tau, "Soft-argmin temperature (cost units)")
      ->capture_default_str();
  cmd->add_option("--threads", args->threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  cmd->add_option("--save-volume", args->volume_out,
                  "Also dump the raw cost volume to this file");
  cmd->add_option("--out", args->out_dir, "Output directory")->required();
  cmd->callback([args, &action] { action = [args] { run_sweep(*args); }; });
}

void add_fit(CLI::App &app, std::function<void()> &action) {
  auto args = std::make_shared<FitArgs>();
  CLI::App *cmd =
      app.add_subcommand("fit", "Optimize a Gaussian set against target views");
  cmd->add_option("--targets", args->targets_dir,
                  "Directory with poses.txt and view_NNN.{rgb.png,depth.pfm,normal.pfm}")
      ->required();
  cmd->add_option("--views", args->views,
                  "View indices to supervise (default: all)");
  cmd->add_option("--init", args->init_file,
                  "Initial Gaussian set file (default: seed from depth)");
  cmd->add_option("--init-view", args->init_view,
                  "View whose depth seeds the init")
      ->capture_default_str();
  cmd->add_option("--stride", args->stride, "Pixels per seeded block")
      ->capture_default_str();
  cmd->add_option("--prior-depth", args->prior_depth,
                  "PFM depth prior overriding the init view's depth");
  cmd->add_option("--prior-conf", args->prior_conf,
                  "PFM confidence prior used as initial opacity");
  cmd->add_option("--jitter-centers", args->jitter_sigma,
                  "Center jitter sigma in meters (seeded)")
      ->capture_default_str();
  cmd->add_flag("--randomize-rotations", args->randomize_rotations,
                "Replace init rotations with seeded random ones");
  cmd->add_option("--lambda1", args->lambda1, "Scale term weight")
      ->capture_default_str();
  cmd->add_option("--lambda2", args->lambda2, "Depth term weight")
      ->capture_default_str();
  cmd->add_option("--lambda3", args->lambda3, "Normal-consistency term weight")
      ->capture_default_str();
  cmd->add_option("--iters", args->iters, "Optimization iterations (0 = eval only)")
      ->capture_default_str();
  cmd->add_option("--seed", args->seed, "Seed for jitter/rotation randomness")
      ->capture_default_str();
  cmd->add_option("--threads", args->threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  cmd->add_option("--step-center", args->step_center,
                  "Center step per scene-scale unit")
      ->capture_default_str();
  cmd->add_option("--step-scales", args->step_scales, "Scale step (meters)")
      ->capture_default_str();
  cmd->add_option("--step-rotation", args->step_rotation, "Quaternion step")
      ->capture_default_str();
  cmd->add_option("--step-opacity", args->step_opacity, "Opacity step")
      ->capture_default_str();
  cmd->add_option("--step-color", args->step_color, "Color step")
      ->capture_default_str();
  cmd->add_option("--eval-cloud", args->eval_cloud,
                  "Ground-truth cloud for post-fit metrics");
  cmd->add_option("--out", args->out_dir, "Output directory")->required();
  cmd->callback([args, &action] { action = [args] { run_fit(*args); }; });
}

void add_render(CLI::App &app, std::function<void()> &action) {
  auto args = std::make_shared<RenderArgs>();
  CLI::App *cmd =
      app.add_subcommand("render", "Render a Gaussian set from a stored pose");
  cmd->add_option("--gaussians", args->gaussians, "Gaussian set file")
      ->required();
  cmd->add_option("--poses", args->poses, "Pose file")->required();
  cmd->add_option("--view", args->view, "Pose index to render")
      ->capture_default_str();
  cmd->add_flag("--reference", args->reference,
                "Use the unbinned reference renderer");
  cmd->add_flag("--zscaled-depth", args->zscaled_depth,
                "Report z-scaled intersection depth instead of ray length");
  cmd->add_option("--background", args->background,
                  "Background color r g b in [0,1]")
      ->expected(3);
  cmd->add_option("--threads", args->threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  cmd->add_option("--out", args->out_dir, "Output directory")->required();
  cmd->callback([args, &action] { action = [args] { run_render(*args); }; });
}

void add_eval(CLI::App &app, std::function<void()> &action) {
  auto args = std::make_shared<EvalArgs>();
  CLI::App *cmd = app.add_subcommand("eval", "Compare a prediction against truth");
  cmd->add_option("--mode", args->mode, "image | depth | cloud")
      ->required()
      ->check(CLI::IsMember({"image", "depth", "cloud"}));
  cmd->add_option("--pred", args->pred,
                  "Prediction (image/PFM/cloud/.gs per mode)")
      ->required();
  cmd->add_option("--gt", args->gt, "Ground truth file")->required();
  cmd->add_option("--band-deg", args->band_deg,
                  "Depth mode: latitude band half-width in degrees")
      ->capture_default_str();
  cmd->add_option("--json", args->json_out,
                  "Write metrics JSON here ('-': JSON to stdout)");
  cmd->callback([args, &action] { action = [args] { run_eval(*args); }; });
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"geosplat360: panoramic flattened-Gaussian splatting toolkit"};
  app.require_subcommand(1);

  std::function<void()> action;
  add_synth(app, action);
  add_sweep(app, action);
  add_fit(app, action);
  add_render(app, action);
  add_eval(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (action)
      action();
  } catch (const gs360::DivergenceError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const gs360::IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
