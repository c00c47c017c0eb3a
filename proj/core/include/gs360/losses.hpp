// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/gaussian.hpp"
#include "gs360/image.hpp"
#include "gs360/render.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gs360 {

/// Term weights for the total objective
///   total = l_rgb + scale_w * l_s + depth_w * l_depth + dnormal_w * l_dn.
struct LossWeights {
  double scale_w = 1.0;
  double depth_w = 0.1;
  double dnormal_w = 0.01;
  double perceptual_w = 0.05; // applied inside rgb_loss to the plugged term

  void validate() const; // throws std::invalid_argument on negative weights
};

struct LossReport {
  double l_rgb = 0.0;
  double l_s = 0.0;
  double l_depth = 0.0;
  double l_dn = 0.0;
  double total = 0.0;

  std::string json_line() const; // one-line record for training logs
};

/// Optional image-pair functional added to rgb_loss with weight
/// perceptual_w. No analytic gradient flows through it; the default (none)
/// contributes zero.
using PerceptualFn = std::function<double(const Image &, const Image &)>;

/// Mean over Gaussians of the smallest scale (flatness pressure).
double scale_loss(std::span<const GaussianPrimitive> scene);

/// Mean over jointly-valid pixels of |n_d - n|_1 + (1 - n_d . n) between a
/// rendered and a target normal plane. Throws when no pixel is valid in both.
double dnormal_loss(const Image &rendered, const Image &target);

/// Mean absolute depth difference over jointly-valid pixels. Throws when no
/// pixel is valid in both.
double depth_loss(const Image &rendered, const Image &target);

/// MSE over all pixels/channels plus perceptual_w * perceptual(rendered,
/// target) when a perceptual functional is supplied.
double rgb_loss(const Image &rendered, const Image &target,
                double perceptual_w = 0.0, const PerceptualFn &perceptual = nullptr);

/// Assembles the weighted total from precomputed terms.
LossReport total_loss(double l_rgb, double l_s, double l_depth, double l_dn,
                      const LossWeights &weights);

/// Gradient of the total objective with respect to one Gaussian. The
/// rotation block is taken with respect to the raw (unnormalized) quaternion
/// coefficients (w, x, y, z); normalization is part of the chain.
struct GaussianGrad {
  Vec3 center = Vec3::Zero();
  Vec3 scales = Vec3::Zero();
  Vec4 rotation = Vec4::Zero();
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
};

struct LossEval {
  LossReport report;
  std::vector<GaussianGrad> grads; // empty unless requested
};

/// Full objective over one or more supervised views: renders each view,
/// evaluates every term, and (optionally) backpropagates analytically to all
/// Gaussian parameters. Per-view terms reduce by mean over views; targets
/// supervise where their depth/normal planes are valid. A view with no
/// jointly-valid depth (or normal) pixels contributes zero to that term.
/// Gradients cover the MSE part of rgb_loss; a plugged perceptual term only
/// shifts the reported value.
LossEval evaluate_loss(std::span<const GaussianPrimitive> scene,
                       std::span<const EquirectCamera> cams,
                       std::span<const PanoramaBuffer> targets,
                       const LossWeights &weights, bool with_grads,
                       int threads = 0,
                       const PerceptualFn &perceptual = nullptr);

namespace detail {

/// dR/d(w, x, y, z) of the rotation matrix at a unit quaternion, in that
/// component order.
std::array<Mat3, 4> rotation_quat_derivatives(const Quat &unit_q);

} // namespace detail

} // namespace gs360
