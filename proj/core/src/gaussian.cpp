// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/gaussian.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gs360 {

void GaussianPrimitive::validate() const {
  if (!(scales.x() > 0 && scales.y() > 0 && scales.z() > 0))
    throw std::invalid_argument("GaussianPrimitive: scales must be positive");
  if (std::abs(rotation.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("GaussianPrimitive: quaternion is not unit");
  if (!(opacity >= 0.0 && opacity <= 1.0))
    throw std::invalid_argument("GaussianPrimitive: opacity outside [0,1]");
}

Mat3 build_covariance(const Vec3 &scales, const Quat &q) {
  if (!(scales.x() > 0 && scales.y() > 0 && scales.z() > 0))
    throw std::invalid_argument("build_covariance: scales must be positive");
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("build_covariance: quaternion is not unit (normalize via adapter)");
  Mat3 r = q.toRotationMatrix();
  return r * scales.cwiseProduct(scales).asDiagonal() * r.transpose();
}

int min_scale_axis(const Vec3 &scales) {
  int k = 0;
  if (scales[1] < scales[k])
    k = 1;
  if (scales[2] < scales[k])
    k = 2;
  return k;
}

Vec3 gaussian_normal(const GaussianPrimitive &g) {
  Vec3 n = g.rotation.toRotationMatrix().col(min_scale_axis(g.scales));
  for (int i = 0; i < 3; ++i) {
    if (n[i] > 0.0)
      break;
    if (n[i] < 0.0) {
      n = -n;
      break;
    }
  }
  return n;
}

Vec3 gaussian_normal(const GaussianPrimitive &g, const Vec3 &view_dir) {
  Vec3 n = g.rotation.toRotationMatrix().col(min_scale_axis(g.scales));
  return n.dot(view_dir) > 0.0 ? Vec3(-n) : n;
}

OrientedDisc flatten(const GaussianPrimitive &g) {
  OrientedDisc disc;
  disc.center = g.center;
  disc.normal = gaussian_normal(g);
  int k = min_scale_axis(g.scales);
  double a = g.scales[(k + 1) % 3];
  double b = g.scales[(k + 2) % 3];
  disc.radii = a >= b ? Vec2(a, b) : Vec2(b, a);
  return disc;
}

namespace {

constexpr int kRecordFloats = 14;

void pack_record(const GaussianPrimitive &g, float *out) {
  const double vals[kRecordFloats] = {
      g.center.x(),  g.center.y(),     g.center.z(),     g.scales.x(),
      g.scales.y(),  g.scales.z(),     g.rotation.w(),   g.rotation.x(),
      g.rotation.y(), g.rotation.z(),  g.opacity,        g.color.x(),
      g.color.y(),   g.color.z()};
  for (int i = 0; i < kRecordFloats; ++i)
    out[i] = static_cast<float>(vals[i]);
}

GaussianPrimitive unpack_record(const double *v) {
  GaussianPrimitive g;
  g.center = Vec3(v[0], v[1], v[2]);
  g.scales = Vec3(v[3], v[4], v[5]);
  g.rotation = Quat(v[6], v[7], v[8], v[9]);
  g.opacity = v[10];
  g.color = Vec3(v[11], v[12], v[13]);
  return g;
}

bool host_little_endian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t *>(&probe) == 1;
}

void swap32(float *data, size_t n) {
  auto *b = reinterpret_cast<uint8_t *>(data);
  for (size_t i = 0; i < n; ++i) {
    std::swap(b[4 * i], b[4 * i + 3]);
    std::swap(b[4 * i + 1], b[4 * i + 2]);
  }
}

} // namespace

void save_gaussians(const std::string &path, std::span<const GaussianPrimitive> set,
                    GaussianFileMode mode) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write gaussian set: " + path);
  out << "geosplat360 v1 " << set.size() << ' '
      << (mode == GaussianFileMode::Ascii ? "ascii" : "binary") << '\n';
  if (mode == GaussianFileMode::Ascii) {
    out.precision(9);
    for (const auto &g : set) {
      float rec[kRecordFloats];
      pack_record(g, rec);
      for (int i = 0; i < kRecordFloats; ++i)
        out << rec[i] << (i + 1 == kRecordFloats ? '\n' : ' ');
    }
  } else {
    std::vector<float> rec(kRecordFloats);
    for (const auto &g : set) {
      pack_record(g, rec.data());
      if (!host_little_endian())
        swap32(rec.data(), rec.size());
      out.write(reinterpret_cast<const char *>(rec.data()),
                kRecordFloats * sizeof(float));
    }
  }
  if (!out)
    throw IoError("failed writing gaussian set: " + path);
}

std::vector<GaussianPrimitive> load_gaussians(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open gaussian set: " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version, encoding;
  size_t count = 0;
  if (!(hs >> magic >> version >> count >> encoding) || magic != "geosplat360" ||
      version != "v1" || (encoding != "ascii" && encoding != "binary"))
    throw IoError("bad gaussian set header in " + path);
  std::vector<GaussianPrimitive> set;
  set.reserve(count);
  if (encoding == "ascii") {
    double v[kRecordFloats];
    for (size_t i = 0; i < count; ++i) {
      for (double &x : v)
        if (!(in >> x))
          throw IoError("truncated gaussian set: " + path);
      set.push_back(unpack_record(v));
    }
  } else {
    std::vector<float> rec(kRecordFloats);
    for (size_t i = 0; i < count; ++i) {
      in.read(reinterpret_cast<char *>(rec.data()), kRecordFloats * sizeof(float));
      if (!in)
        throw IoError("truncated gaussian set: " + path);
      if (!host_little_endian())
        swap32(rec.data(), rec.size());
      double v[kRecordFloats];
      for (int j = 0; j < kRecordFloats; ++j)
        v[j] = rec[j];
      set.push_back(unpack_record(v));
    }
  }
  // 32-bit storage drifts quaternions slightly off unit length.
  for (auto &g : set)
    if (g.rotation.norm() > 0)
      g.rotation.normalize();
  return set;
}

} // namespace gs360
