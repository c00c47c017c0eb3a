// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace gs360 {

/// One splat: center, per-axis scales (meters), rotation, opacity, and a
/// view-independent per-channel color (degree-0 band only).
struct GaussianPrimitive {
  Vec3 center = Vec3::Zero();   // world, meters
  Vec3 scales = Vec3::Ones();   // > 0, meters along principal axes
  Quat rotation = Quat::Identity(); // unit
  double opacity = 1.0;         // [0,1]
  Vec3 color = Vec3::Zero();    // free reals; [0,1] is the displayable range

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

/// Flattened form: the ellipsoid collapsed along its minimal scale axis.
struct OrientedDisc {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // unit
  Vec2 radii = Vec2::Ones();    // the two non-minimal scales, descending
};

/// Covariance R(q) diag(s^2) R(q)^T; eigenvalues are the squared scales and
/// eigenvectors the columns of R(q). Throws if q deviates from unit length
/// by more than 1e-6.
Mat3 build_covariance(const Vec3 &scales, const Quat &q);

/// Index of the minimal scale; ties break to the lowest axis.
int min_scale_axis(const Vec3 &scales);

/// Unit normal of the flattened Gaussian: the rotation column of the minimal
/// scale axis, stored canonically with its first nonzero component positive.
Vec3 gaussian_normal(const GaussianPrimitive &g);

/// Same normal oriented to face a viewer looking along `view_dir`
/// (normal . view_dir < 0).
Vec3 gaussian_normal(const GaussianPrimitive &g, const Vec3 &view_dir);

OrientedDisc flatten(const GaussianPrimitive &g);

enum class GaussianFileMode { Ascii, Binary };

/// Gaussian set file: one-line header `geosplat360 v1 <count> <ascii|binary>`
/// followed by records `x y z s1 s2 s3 qw qx qy qz alpha r g b` (text lines,
/// or little-endian 32-bit floats in binary mode).
void save_gaussians(const std::string &path, std::span<const GaussianPrimitive> set,
                    GaussianFileMode mode = GaussianFileMode::Binary);
std::vector<GaussianPrimitive> load_gaussians(const std::string &path);

} // namespace gs360
