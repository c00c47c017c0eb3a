// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/gaussian.hpp"
#include "gs360/image.hpp"
#include "gs360/losses.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gs360 {

/// Adam-style per-scene fitting configuration. Center steps are multiplied
/// by the scene scale (median center distance from the centroid).
struct FitConfig {
  int iterations = 500;
  double step_center = 1e-3;
  double step_scales = 5e-3;
  double step_rotation = 1e-3;
  double step_opacity = 5e-2;
  double step_color = 1e-2;
  LossWeights weights;
  std::uint64_t seed = 0; // recorded for provenance; the fit itself is exact
  int threads = 0;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-15;
  double min_scale = 1e-4;          // meters, post-step clamp
  double divergence_factor = 10.0;  // vs the initial total
  int divergence_patience = 50;     // consecutive iterations

  void validate() const; // throws std::invalid_argument
};

struct FitResult {
  std::vector<GaussianPrimitive> scene;
  std::vector<LossReport> trace; // iterations + 1 entries; [0] is the start
};

/// Runs Adam on the total objective over the given supervised views.
/// Deterministic for a fixed config and thread count. Throws
/// DivergenceError when the total stays above divergence_factor times the
/// initial loss for divergence_patience consecutive iterations.
FitResult fit(std::vector<GaussianPrimitive> scene,
              std::span<const EquirectCamera> cams,
              std::span<const PanoramaBuffer> targets, const FitConfig &cfg);

/// Seeds one Gaussian per stride x stride pixel block of a depth prior:
/// center unprojected at the block-center depth, tangential scales matched
/// to the block footprint with the normal axis at 0.1x, rotation aligning
/// that axis with the ray, opacity from the prior's alpha plane and color
/// from its rgb plane. Blocks whose center depth is invalid are skipped;
/// throws when every block is.
std::vector<GaussianPrimitive> init_from_depth(const EquirectCamera &cam,
                                               const PanoramaBuffer &prior,
                                               int stride);

/// Median distance of Gaussian centers from their centroid (1.0 for
/// degenerate point sets): the length unit for center step sizes.
double scene_scale(std::span<const GaussianPrimitive> scene);

} // namespace gs360
