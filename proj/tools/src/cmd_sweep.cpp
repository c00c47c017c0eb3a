// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"
#include "common.hpp"

#include "gs360/costvol.hpp"
#include "gs360/image_io.hpp"

#include <filesystem>
#include <stdexcept>

namespace gs360::cli {

namespace fs = std::filesystem;

void run_sweep(const SweepArgs &args) {
  if (args.images.size() < 2)
    throw std::invalid_argument("sweep: need a reference and at least one source");
  if (args.out_dir.empty())
    throw std::invalid_argument("sweep: --out is required");
  const auto cams = load_pose_file(args.poses);
  if (cams.size() != args.images.size())
    throw std::invalid_argument("sweep: image and pose counts differ");
  if (args.ref < 0 || args.ref >= static_cast<int>(args.images.size()))
    throw std::invalid_argument("sweep: --ref out of range");

  std::vector<Image> rgbs;
  rgbs.reserve(args.images.size());
  for (const auto &path : args.images)
    rgbs.push_back(read_image(path));

  std::vector<EquirectCamera> src_cams;
  std::vector<Image> src_rgbs;
  for (size_t i = 0; i < cams.size(); ++i) {
    if (static_cast<int>(i) == args.ref)
      continue;
    src_cams.push_back(cams[i]);
    src_rgbs.push_back(std::move(rgbs[i]));
  }

  const auto hypotheses =
      inverse_depth_hypotheses(args.hypotheses, args.near_m, args.far_m);
  const SphereCostVolume vol =
      sweep(cams[args.ref], rgbs[args.ref], src_cams, src_rgbs, hypotheses,
            args.threads);
  const DepthPrior prior = regress_depth(vol, args.tau);

  ensure_directory(args.out_dir);
  const fs::path out(args.out_dir);
  write_pfm((out / "depth.pfm").string(), prior.depth);
  write_pfm((out / "confidence.pfm").string(), prior.confidence);
  if (!args.volume_out.empty())
    save_cost_volume(args.volume_out, vol);
}

} // namespace gs360::cli
