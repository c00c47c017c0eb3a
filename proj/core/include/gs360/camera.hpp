// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/types.hpp"

#include <string>
#include <vector>

namespace gs360 {

/// Rigid camera-to-world transform. `rotation` must be orthonormal with
/// determinant +1.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero(); // meters

  Vec3 to_world(const Vec3 &p_cam) const { return rotation * p_cam + translation; }
  Vec3 to_camera(const Vec3 &p_world) const {
    return rotation.transpose() * (p_world - translation);
  }
  Vec3 dir_to_world(const Vec3 &d_cam) const { return rotation * d_cam; }
  Vec3 dir_to_camera(const Vec3 &d_world) const {
    return rotation.transpose() * d_world;
  }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ(); // unit length
};

/// Equirectangular panorama camera.
///
/// Camera frame: y up, z forward, x right; longitude 0 at +z. Pixel centers
/// sit at half-integer fractions of the image, i.e. column u covers longitude
/// 2*pi*(u+0.5)/W - pi. Depth throughout is Euclidean distance along the ray.
class EquirectCamera {
public:
  EquirectCamera(int width, int height, RigidPose pose = {});

  int width() const { return width_; }
  int height() const { return height_; }
  const RigidPose &pose() const { return pose_; }

private:
  int width_;
  int height_;
  RigidPose pose_;
};

/// Unit ray through subpixel (u, v), camera frame, origin at the camera
/// center. Domain is the full image rectangle [-0.5, W-0.5] x [-0.5, H-0.5];
/// outside it throws std::invalid_argument.
Ray pixel_to_ray(const EquirectCamera &cam, double u, double v);

/// Inverse of pixel_to_ray for a unit direction in camera frame. Returns
/// (u, v) with u in [-0.5, W-0.5) (the seam wraps toward the u=0 side) and
/// v in [-0.5, H-0.5]. Exact pole directions map to u = 0 by convention.
Vec2 ray_to_pixel(const EquirectCamera &cam, const Vec3 &dir);

/// World-space point at Euclidean distance `depth` along the ray through
/// (u, v). depth must be > 0.
Vec3 unproject(const EquirectCamera &cam, double u, double v, double depth);

/// Pose file: one camera per line, `W H r00 r01 r02 r10 ... r22 tx ty tz`
/// (row-major camera-to-world rotation, translation in meters). `#` starts a
/// comment; blank lines are skipped.
std::vector<EquirectCamera> load_pose_file(const std::string &path);
void save_pose_file(const std::string &path,
                    const std::vector<EquirectCamera> &cams);

} // namespace gs360
