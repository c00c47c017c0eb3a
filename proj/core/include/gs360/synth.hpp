// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gs360 {

enum class WallTexture { Checker, Gradient };

/// Axis-aligned interior box centered at the origin, viewed from inside.
/// Walls carry a procedural texture so photometric matching is well posed.
struct BoxRoom {
  Vec3 extents = Vec3(4, 4, 4); // full interior size, meters
  WallTexture texture = WallTexture::Checker;
  double period = 0.25; // checker period, meters
  std::vector<EquirectCamera> cameras;
  uint64_t seed = 0;

  bool contains(const Vec3 &p) const {
    return std::abs(p.x()) < extents.x() / 2 && std::abs(p.y()) < extents.y() / 2 &&
           std::abs(p.z()) < extents.z() / 2;
  }
};

/// Canonical acceptance fixture: 5 x 3 x 7 m room, three cameras 0.5 m apart
/// near the center, width = 2 * height.
BoxRoom room_a_preset(int height = 512);

struct WallHit {
  double depth;  // Euclidean ray length, meters
  Vec3 point;    // world
  Vec3 normal;   // inward wall normal
  int face;      // 0..5: -x,+x,-y,+y,-z,+z
};

/// Analytic interior ray/box intersection from a point strictly inside.
WallHit intersect_room(const BoxRoom &room, const Vec3 &origin, const Vec3 &dir);

/// Procedural wall color at a hit point.
Vec3 wall_color(const BoxRoom &room, const WallHit &hit);

/// Analytic ground-truth panorama (rgb, depth, normal, full alpha) for a
/// camera inside the room. Throws if the camera is outside.
PanoramaBuffer render_gt(const BoxRoom &room, const EquirectCamera &cam);

struct SurfaceSample {
  Vec3 position;
  Vec3 normal; // inward
};

/// Stratified jittered samples on the six interior faces, about
/// density * area points per face. Deterministic for a fixed room seed.
std::vector<SurfaceSample> sample_surface(const BoxRoom &room, double density);

/// Room config file: `extents X Y Z`, `texture checker|gradient`,
/// `period P`, `seed N`, `poses FILE` (pose-file path, resolved relative to
/// the config). `#` starts a comment.
BoxRoom load_room_config(const std::string &path);

/// Point cloud with normals, text lines `x y z nx ny nz`.
void save_cloud(const std::string &path, const std::vector<SurfaceSample> &cloud);
std::vector<SurfaceSample> load_cloud(const std::string &path);

} // namespace gs360
