// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gs360::cli {

struct SynthArgs {
  std::string room = "roomA"; // preset name; config overrides when set
  std::string config;
  std::string out_dir;
  int height = 512;          // preset panorama height, pixels
  double cloud_density = 100.0; // surface samples per square meter
  std::int64_t seed = -1;    // <0: keep the preset/config seed
};
void run_synth(const SynthArgs &args);

struct SweepArgs {
  std::vector<std::string> images; // reference first unless --ref overrides
  std::string poses;
  int ref = 0;
  double near_m = 0.3;
  double far_m = 20.0;
  int hypotheses = 64;
  double tau = 1.0;
  std::string out_dir;
  std::string volume_out; // optional raw volume dump
  int threads = 0;
};
void run_sweep(const SweepArgs &args);

struct FitArgs {
  std::string targets_dir;
  std::vector<int> views; // empty: all views in the pose file
  std::string init_file;  // Gaussian set; empty: initialize from depth
  int init_view = 0;
  int stride = 4;            // pixels per seeded Gaussian block
  std::string prior_depth;   // PFM overriding the init view's depth
  std::string prior_conf;    // PFM opacity source for the init
  double jitter_sigma = 0.0; // meters, center perturbation
  bool randomize_rotations = false;
  double lambda1 = 1.0;  // scale term weight
  double lambda2 = 0.1;  // depth term weight
  double lambda3 = 0.01; // normal-consistency term weight
  int iters = 500;
  std::uint64_t seed = 0;
  int threads = 0;
  double step_center = 1e-3;
  double step_scales = 5e-3;
  double step_rotation = 1e-3;
  double step_opacity = 5e-2;
  double step_color = 1e-2;
  std::string eval_cloud; // optional gt cloud for post-fit metrics
  std::string out_dir;
};
void run_fit(const FitArgs &args);

struct RenderArgs {
  std::string gaussians;
  std::string poses;
  int view = 0;
  std::string out_dir;
  bool reference = false; // default tiled
  bool zscaled_depth = false;
  std::vector<double> background; // empty or r,g,b in [0,1]
  int threads = 0;
};
void run_render(const RenderArgs &args);

struct EvalArgs {
  std::string mode; // image | depth | cloud
  std::string pred;
  std::string gt;
  double band_deg = 90.0; // depth mode: latitude band half-width
  std::string json_out;   // path, or "-" for JSON on stdout
};
void run_eval(const EvalArgs &args);

} // namespace gs360::cli
