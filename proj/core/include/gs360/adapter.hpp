// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/gaussian.hpp"
#include "gs360/image.hpp"

#include <vector>

namespace gs360 {

/// Unconstrained per-pixel parameter planes, one Gaussian per valid pixel.
/// A pixel is valid where its depth is positive.
struct RawGaussianPlanes {
  Image offset;       // 2ch, sub-pixel (du, dv)
  Image depth;        // 1ch, meters; <= 0 marks an invalid pixel
  Image scale_logits; // 3ch
  Image quat_raw;     // 4ch, (w, x, y, z), any magnitude
  Image opacity;      // 1ch, confidence in [0,1] or a logit (see config)
  Image color_logits; // 3ch

  void validate() const; // throws std::invalid_argument on size mismatch
};

struct AdapterConfig {
  double kappa = 3.0;               // scale ceiling in angular pixel sizes
  bool opacity_is_confidence = true; // false: squash through a sigmoid
  double offset_clamp = 0.5;         // pixels
};

/// Counters for degenerate inputs the activation repairs or skips.
struct AdapterDiagnostics {
  long degenerate_rotations = 0; // zero-norm quaternions replaced by identity
  long skipped_pixels = 0;       // non-positive depth
};

/// Maps raw planes to valid primitives: center unprojected at the clamped
/// sub-pixel offset and given depth; scales sigmoid-squashed against a
/// ceiling of kappa * depth * (2 pi / W); rotation normalized; opacity taken
/// as confidence or sigmoid-squashed; color sigmoid-squashed. Every output
/// satisfies the GaussianPrimitive invariants for any finite input.
std::vector<GaussianPrimitive> activate(const RawGaussianPlanes &raw,
                                        const EquirectCamera &cam,
                                        const AdapterConfig &cfg = {},
                                        AdapterDiagnostics *diag = nullptr);

} // namespace gs360
