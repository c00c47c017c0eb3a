// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gs360 {

/// Dense H x W x C grid of doubles, row-major with interleaved channels.
class Image {
public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {
    if (width < 1 || height < 1 || channels < 1)
      throw std::invalid_argument("Image: dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  bool same_size(const Image &o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  double &at(int u, int v, int c = 0) {
    return data_[(static_cast<size_t>(v) * width_ + u) * channels_ + c];
  }
  double at(int u, int v, int c = 0) const {
    return data_[(static_cast<size_t>(v) * width_ + u) * channels_ + c];
  }

  Vec3 vec3(int u, int v) const {
    size_t i = (static_cast<size_t>(v) * width_ + u) * channels_;
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set_vec3(int u, int v, const Vec3 &x) {
    size_t i = (static_cast<size_t>(v) * width_ + u) * channels_;
    data_[i] = x[0];
    data_[i + 1] = x[1];
    data_[i + 2] = x[2];
  }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  size_t size() const { return data_.size(); }

private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Rendered panorama planes. Depth uses -1 as the invalid sentinel; normal
/// rows are unit vectors or the (0,0,0) sentinel.
struct PanoramaBuffer {
  static constexpr double kInvalidDepth = -1.0;

  Image rgb;    // 3 channels, [0,1]
  Image depth;  // 1 channel, meters
  Image alpha;  // 1 channel, [0,1]
  Image normal; // 3 channels, unit or zero

  PanoramaBuffer() = default;
  PanoramaBuffer(int width, int height)
      : rgb(width, height, 3), depth(width, height, 1, kInvalidDepth),
        alpha(width, height, 1), normal(width, height, 3) {}

  int width() const { return rgb.width(); }
  int height() const { return rgb.height(); }

  bool depth_valid(int u, int v) const { return depth.at(u, v) >= 0.0; }
  bool normal_valid(int u, int v) const {
    return normal.at(u, v, 0) != 0.0 || normal.at(u, v, 1) != 0.0 ||
           normal.at(u, v, 2) != 0.0;
  }
};

/// Bilinear sample at a continuous pixel position: u wraps across the
/// longitude seam, v clamps at the poles. Integer coordinates hit pixel
/// centers exactly.
inline double sample_bilinear_wrap(const Image &img, double u, double v, int c = 0) {
  const int w = img.width();
  const int h = img.height();
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double au = u - fu;
  const double av = v - fv;
  int u0 = static_cast<int>(fu) % w;
  if (u0 < 0)
    u0 += w;
  const int u1 = (u0 + 1) % w;
  const int v0 = std::clamp(static_cast<int>(fv), 0, h - 1);
  const int v1 = std::clamp(static_cast<int>(fv) + 1, 0, h - 1);
  return (1.0 - av) * ((1.0 - au) * img.at(u0, v0, c) + au * img.at(u1, v0, c)) +
         av * ((1.0 - au) * img.at(u0, v1, c) + au * img.at(u1, v1, c));
}

inline bool depth_pixel_valid(const Image &depth, int u, int v) {
  return depth.at(u, v) >= 0.0;
}
inline bool normal_pixel_valid(const Image &normal, int u, int v) {
  return normal.at(u, v, 0) != 0.0 || normal.at(u, v, 1) != 0.0 ||
         normal.at(u, v, 2) != 0.0;
}

} // namespace gs360
