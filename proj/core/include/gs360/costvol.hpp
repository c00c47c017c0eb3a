// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/image.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gs360 {

/// Spherical plane-sweep matching volume: per pixel, one photometric cost
/// per depth hypothesis (lower = better match).
struct SphereCostVolume {
  int width = 0;
  int height = 0;
  std::vector<double> hypotheses; // meters, strictly increasing, K >= 2
  std::vector<float> cost;        // H*W*K, hypothesis index innermost
  int reference_camera = 0;

  size_t index(int u, int v, int k) const {
    return (static_cast<size_t>(v) * width + u) * hypotheses.size() + k;
  }
  void validate() const; // throws std::invalid_argument
};

/// Dense depth and per-pixel matching confidence regressed from a volume.
/// Confidence is the softmax peak mass, hence in (0, 1].
struct DepthPrior {
  Image depth;      // 1 channel, meters
  Image confidence; // 1 channel
};

/// K depths uniform in inverse depth between near and far (inclusive).
std::vector<double> inverse_depth_hypotheses(int k, double near_m, double far_m);

/// Builds the matching volume: every reference pixel is unprojected at each
/// hypothesis depth, reprojected into all source panoramas, sampled
/// bilinearly (seam-wrapped), and scored by the variance of the sampled
/// intensities across {reference, sources}, averaged over channels. A source
/// sample degenerates only when the world point hits the source center;
/// pixels where every source degenerates get the worst finite cost.
SphereCostVolume sweep(const EquirectCamera &ref_cam, const Image &ref_rgb,
                       std::span<const EquirectCamera> src_cams,
                       std::span<const Image> src_rgbs,
                       std::span<const double> hypotheses, int threads = 0);

/// Soft-argmin readout: p_k = softmax(-cost_k / tau), depth = sum p_k d_k,
/// confidence = max_k p_k. tau must be positive.
DepthPrior regress_depth(const SphereCostVolume &vol, double tau);

/// Raw little-endian float dump with a 24-byte header
/// (magic, W, H, K as u32; near, far as f32). The hypothesis ladder is
/// regenerated from (K, near, far) on load and must therefore be
/// inverse-depth-uniform; near/far round to f32 across a round-trip.
void save_cost_volume(const std::string &path, const SphereCostVolume &vol);
SphereCostVolume load_cost_volume(const std::string &path);

constexpr std::uint32_t kCostVolumeMagic = 0x76637367; // "gscv"

/// Per-channel affine modulation parameters derived from a conditioning
/// vector: gamma = Gw c + gb, beta = Bw c + bb. identity() starts at
/// gamma = 1, beta = 0 regardless of the conditioning input.
struct FilmMap {
  MatX gamma_weights; // channels x cond_dim
  VecX gamma_bias;
  MatX beta_weights;
  VecX beta_bias;

  static FilmMap identity(int channels, int cond_dim);
};

/// Compresses high-level feature planes into a conditioning vector by
/// per-channel global mean pooling and concatenation.
VecX condition_vector(std::span<const Image> planes);

/// Per-channel affine remap of a feature stack:
/// out[c] = gamma[c] * in[c] + beta[c].
Image film_modulate(const Image &features, const FilmMap &map, const VecX &cond);

} // namespace gs360
