// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

#include "gs360/image_io.hpp"

#include <cstdio>
#include <filesystem>

namespace gs360::cli {

namespace fs = std::filesystem;

namespace {

std::string view_name(int index, const char *suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "view_%03d.%s", index, suffix);
  return buf;
}

} // namespace

std::string view_rgb_name(int index) { return view_name(index, "rgb.png"); }
std::string view_depth_name(int index) { return view_name(index, "depth.pfm"); }
std::string view_normal_name(int index) { return view_name(index, "normal.pfm"); }

void ensure_directory(const std::string &path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path))
    throw IoError("cannot create directory: " + path);
}

ViewSet load_view_set(const std::string &dir, std::vector<int> views) {
  const auto cams = load_pose_file((fs::path(dir) / "poses.txt").string());
  if (views.empty()) {
    views.resize(cams.size());
    for (size_t i = 0; i < cams.size(); ++i)
      views[i] = static_cast<int>(i);
  }
  ViewSet out;
  for (int idx : views) {
    if (idx < 0 || idx >= static_cast<int>(cams.size()))
      throw std::invalid_argument("view index out of range: " + std::to_string(idx));
    const EquirectCamera &cam = cams[idx];
    PanoramaBuffer target(cam.width(), cam.height());
    for (int v = 0; v < cam.height(); ++v)
      for (int u = 0; u < cam.width(); ++u)
        target.alpha.at(u, v) = 1.0;

    const fs::path rgb_path = fs::path(dir) / view_rgb_name(idx);
    Image rgb = read_image(rgb_path.string());
    if (rgb.width() != cam.width() || rgb.height() != cam.height() ||
        rgb.channels() != 3)
      throw IoError("target rgb does not match its camera: " + rgb_path.string());
    target.rgb = std::move(rgb);

    const fs::path depth_path = fs::path(dir) / view_depth_name(idx);
    if (fs::exists(depth_path)) {
      Image depth = read_pfm(depth_path.string());
      if (!depth.same_size(target.depth))
        throw IoError("target depth does not match its camera: " +
                      depth_path.string());
      target.depth = std::move(depth);
    }
    const fs::path normal_path = fs::path(dir) / view_normal_name(idx);
    if (fs::exists(normal_path)) {
      Image normal = read_pfm(normal_path.string());
      if (!normal.same_size(target.normal))
        throw IoError("target normal does not match its camera: " +
                      normal_path.string());
      target.normal = std::move(normal);
    }
    out.cameras.push_back(cam);
    out.targets.push_back(std::move(target));
    out.indices.push_back(idx);
  }
  return out;
}

} // namespace gs360::cli
