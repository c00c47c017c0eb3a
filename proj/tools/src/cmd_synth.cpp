// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"
#include "common.hpp"

#include "gs360/image_io.hpp"
#include "gs360/synth.hpp"

#include <filesystem>
#include <stdexcept>

namespace gs360::cli {

namespace fs = std::filesystem;

void run_synth(const SynthArgs &args) {
  if (args.out_dir.empty())
    throw std::invalid_argument("synth: --out is required");

  BoxRoom room;
  if (!args.config.empty()) {
    room = load_room_config(args.config);
  } else if (args.room == "roomA") {
    room = room_a_preset(args.height);
  } else {
    throw std::invalid_argument("synth: unknown room preset: " + args.room);
  }
  if (args.seed >= 0)
    room.seed = static_cast<uint64_t>(args.seed);

  ensure_directory(args.out_dir);
  const fs::path out(args.out_dir);

  for (size_t i = 0; i < room.cameras.size(); ++i) {
    const PanoramaBuffer gt = render_gt(room, room.cameras[i]);
    write_png8((out / view_rgb_name(static_cast<int>(i))).string(), gt.rgb);
    write_pfm((out / view_depth_name(static_cast<int>(i))).string(), gt.depth);
    write_pfm((out / view_normal_name(static_cast<int>(i))).string(), gt.normal);
  }
  save_pose_file((out / "poses.txt").string(), room.cameras);
  save_cloud((out / "cloud.txt").string(), sample_surface(room, args.cloud_density));
}

} // namespace gs360::cli
