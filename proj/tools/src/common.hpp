// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/image.hpp"

#include <string>
#include <vector>

namespace gs360::cli {

std::string view_rgb_name(int index);
std::string view_depth_name(int index);
std::string view_normal_name(int index);

/// Creates the directory (and parents) or throws IoError.
void ensure_directory(const std::string &path);

/// One supervised view loaded from a target directory: rgb is required,
/// depth/normal planes fall back to the invalid sentinel when their files
/// are absent.
struct ViewSet {
  std::vector<EquirectCamera> cameras;
  std::vector<PanoramaBuffer> targets;
  std::vector<int> indices; // original indices into the pose file
};

ViewSet load_view_set(const std::string &dir, std::vector<int> views);

} // namespace gs360::cli
