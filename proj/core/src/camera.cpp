// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gs360 {

EquirectCamera::EquirectCamera(int width, int height, RigidPose pose)
    : width_(width), height_(height), pose_(std::move(pose)) {
  if (width < 2 || height < 1)
    throw std::invalid_argument("EquirectCamera: width must be >= 2 and height >= 1");
  Mat3 rtr = pose_.rotation.transpose() * pose_.rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(pose_.rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("EquirectCamera: rotation is not a proper rotation");
}

Ray pixel_to_ray(const EquirectCamera &cam, double u, double v) {
  const double w = cam.width(), h = cam.height();
  if (!(u >= -0.5 && u <= w - 0.5) || !(v >= -0.5 && v <= h - 0.5))
    throw std::invalid_argument("pixel_to_ray: pixel out of range");
  const double lon = 2.0 * kPi * (u + 0.5) / w - kPi;
  const double lat = kPi / 2.0 - kPi * (v + 0.5) / h;
  const double cl = std::cos(lat);
  Ray r;
  r.origin = Vec3::Zero();
  r.direction = Vec3(cl * std::sin(lon), std::sin(lat), cl * std::cos(lon));
  return r;
}

Vec2 ray_to_pixel(const EquirectCamera &cam, const Vec3 &dir) {
  if (std::abs(dir.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("ray_to_pixel: direction is not unit length");
  const double w = cam.width(), h = cam.height();
  const double horiz = std::hypot(dir.x(), dir.z());
  const double lat = std::atan2(dir.y(), horiz);
  double v = (kPi / 2.0 - lat) * h / kPi - 0.5;
  if (horiz == 0.0)
    return {0.0, v}; // pole: longitude undefined, u fixed at 0
  const double lon = std::atan2(dir.x(), dir.z());
  double u = (lon + kPi) * w / (2.0 * kPi) - 0.5;
  if (u >= w - 0.5)
    u -= w; // seam wraps toward the u=0 boundary
  return {u, v};
}

Vec3 unproject(const EquirectCamera &cam, double u, double v, double depth) {
  if (!(depth > 0.0))
    throw std::invalid_argument("unproject: depth must be > 0");
  Ray r = pixel_to_ray(cam, u, v);
  return cam.pose().to_world(depth * r.direction);
}

std::vector<EquirectCamera> load_pose_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open pose file: " + path);
  std::vector<EquirectCamera> cams;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    int w, h;
    if (!(ss >> w >> h))
      continue; // blank or comment-only line
    double m[12];
    for (double &x : m)
      if (!(ss >> x))
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": expected `W H r00..r22 tx ty tz`");
    RigidPose pose;
    pose.rotation << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
    pose.translation = Vec3(m[9], m[10], m[11]);
    try {
      cams.emplace_back(w, h, pose);
    } catch (const std::invalid_argument &e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cams;
}

void save_pose_file(const std::string &path,
                    const std::vector<EquirectCamera> &cams) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write pose file: " + path);
  out.precision(17);
  out << "# geosplat360 poses: W H r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz\n";
  for (const auto &c : cams) {
    out << c.width() << ' ' << c.height();
    const Mat3 &r = c.pose().rotation;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out << ' ' << r(i, j);
    const Vec3 &t = c.pose().translation;
    out << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
  }
  if (!out)
    throw IoError("failed writing pose file: " + path);
}

} // namespace gs360
