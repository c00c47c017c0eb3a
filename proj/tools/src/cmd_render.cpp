// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"
#include "common.hpp"

#include "gs360/image_io.hpp"
#include "gs360/render.hpp"

#include <filesystem>
#include <stdexcept>

namespace gs360::cli {

namespace fs = std::filesystem;

void run_render(const RenderArgs &args) {
  if (args.out_dir.empty())
    throw std::invalid_argument("render: --out is required");
  const auto cams = load_pose_file(args.poses);
  if (args.view < 0 || args.view >= static_cast<int>(cams.size()))
    throw std::invalid_argument("render: --view out of range");
  const auto scene = load_gaussians(args.gaussians);

  RenderOptions opts;
  opts.mode = args.reference ? RenderMode::Reference : RenderMode::Tiled;
  opts.threads = args.threads;
  opts.depth_model =
      args.zscaled_depth ? DepthModel::ZScaled : DepthModel::RayLength;
  if (!args.background.empty()) {
    if (args.background.size() != 3)
      throw std::invalid_argument("render: --background needs three values");
    opts.background = Vec3(args.background[0], args.background[1],
                           args.background[2]);
  }

  const RenderResult rr = render(cams[args.view], scene, opts);

  ensure_directory(args.out_dir);
  const fs::path out(args.out_dir);
  write_png8((out / "rgb.png").string(), rr.pano.rgb);
  write_pfm((out / "depth.pfm").string(), rr.pano.depth);
  write_pfm((out / "normal.pfm").string(), rr.pano.normal);
  write_pfm((out / "alpha.pfm").string(), rr.pano.alpha);
}

} // namespace gs360::cli
