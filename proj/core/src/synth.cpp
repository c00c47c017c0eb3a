// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace gs360 {

namespace {

// Two base colors per face, distinct hues so photometric terms localize.
// Mid-range values so the per-cell tint never clamps against 0 or 1.
const Vec3 kPalette[6][2] = {
    {{0.50, 0.16, 0.16}, {0.58, 0.50, 0.46}}, // -x
    {{0.16, 0.36, 0.52}, {0.54, 0.58, 0.60}}, // +x
    {{0.30, 0.22, 0.16}, {0.50, 0.44, 0.34}}, // -y floor
    {{0.54, 0.54, 0.58}, {0.32, 0.32, 0.38}}, // +y ceiling
    {{0.18, 0.44, 0.26}, {0.56, 0.58, 0.54}}, // -z
    {{0.46, 0.34, 0.12}, {0.60, 0.56, 0.46}}, // +z
};

uint64_t mix_hash(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// Per-cell, per-channel tint; breaks the checker's translational period so
// plane-sweep matching has a unique minimum even when a camera baseline is a
// multiple of the cell period.
Vec3 cell_tint(int face, long ci, long cj) {
  uint64_t h = mix_hash((static_cast<uint64_t>(face) << 40) ^
                        (static_cast<uint64_t>(ci + (1L << 20)) << 21) ^
                        static_cast<uint64_t>(cj + (1L << 20)));
  Vec3 t;
  for (int c = 0; c < 3; ++c) {
    t[c] = 0.55 + 0.90 * (static_cast<double>((h >> (16 * c)) & 0xffff) / 65535.0);
  }
  return t;
}

void face_axes(int face, int &a, int &i, int &j) {
  a = face / 2;
  i = (a + 1) % 3;
  j = (a + 2) % 3;
}

} // namespace

BoxRoom room_a_preset(int height) {
  BoxRoom room;
  room.extents = Vec3(5, 3, 7);
  room.period = 0.25;
  room.seed = 1234;
  int width = 2 * height;
  RigidPose p0, p1, p2;
  p1.translation = Vec3(0.5, 0, 0);
  p2.translation = Vec3(0, 0, 0.5);
  room.cameras.emplace_back(width, height, p0);
  room.cameras.emplace_back(width, height, p1);
  room.cameras.emplace_back(width, height, p2);
  return room;
}

WallHit intersect_room(const BoxRoom &room, const Vec3 &origin, const Vec3 &dir) {
  double best_t = std::numeric_limits<double>::infinity();
  int best_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0)
      continue;
    double boundary = (dir[a] > 0 ? 0.5 : -0.5) * room.extents[a];
    double t = (boundary - origin[a]) / dir[a];
    if (t < best_t) {
      best_t = t;
      best_axis = a;
    }
  }
  WallHit hit;
  hit.depth = best_t; // Euclidean for unit dir
  hit.point = origin + best_t * dir;
  hit.normal = Vec3::Zero();
  hit.normal[best_axis] = dir[best_axis] > 0 ? -1.0 : 1.0;
  hit.face = best_axis * 2 + (dir[best_axis] > 0 ? 1 : 0);
  return hit;
}

namespace {

Vec3 checker_cell_color(int face, long ci, long cj) {
  const Vec3 &base = kPalette[face][(ci + cj) & 1];
  return base.cwiseProduct(cell_tint(face, ci, cj));
}

} // namespace

Vec3 wall_color(const BoxRoom &room, const WallHit &hit) {
  int a, i, j;
  face_axes(hit.face, a, i, j);
  double pi = hit.point[i] + room.extents[i] / 2;
  double pj = hit.point[j] + room.extents[j] / 2;
  const Vec3 &ca = kPalette[hit.face][0];
  const Vec3 &cb = kPalette[hit.face][1];
  if (room.texture == WallTexture::Gradient) {
    double t = std::clamp(pi / room.extents[i], 0.0, 1.0);
    return ca + t * (cb - ca);
  }
  // Cell colors interpolated bilinearly across the whole cell: the wave is
  // piecewise linear, so bilinear resampling between views reproduces it, and
  // its gradient is nonzero everywhere, so matching localizes to sub-cell
  // precision instead of one flat basin per cell.
  double mi = pi / room.period - 0.5;
  double mj = pj / room.period - 0.5;
  long i0 = static_cast<long>(std::floor(mi));
  long j0 = static_cast<long>(std::floor(mj));
  double wi = mi - static_cast<double>(i0);
  double wj = mj - static_cast<double>(j0);
  Vec3 c00 = checker_cell_color(hit.face, i0, j0);
  Vec3 c10 = checker_cell_color(hit.face, i0 + 1, j0);
  Vec3 c01 = checker_cell_color(hit.face, i0, j0 + 1);
  Vec3 c11 = checker_cell_color(hit.face, i0 + 1, j0 + 1);
  Vec3 mixed = (1.0 - wj) * ((1.0 - wi) * c00 + wi * c10) +
               wj * ((1.0 - wi) * c01 + wi * c11);
  return mixed.cwiseMin(1.0).cwiseMax(0.0);
}

PanoramaBuffer render_gt(const BoxRoom &room, const EquirectCamera &cam) {
  const Vec3 pos = cam.pose().translation;
  if (!room.contains(pos))
    throw std::invalid_argument("render_gt: camera is not inside the room");
  PanoramaBuffer pano(cam.width(), cam.height());
  for (int v = 0; v < cam.height(); ++v) {
    for (int u = 0; u < cam.width(); ++u) {
      Ray ray = pixel_to_ray(cam, u, v);
      Vec3 dir_w = cam.pose().dir_to_world(ray.direction);
      WallHit hit = intersect_room(room, pos, dir_w);
      pano.rgb.set_vec3(u, v, wall_color(room, hit));
      pano.depth.at(u, v) = hit.depth;
      pano.alpha.at(u, v) = 1.0;
      // Normals stored in camera frame, facing the camera.
      pano.normal.set_vec3(u, v, cam.pose().dir_to_camera(hit.normal));
    }
  }
  return pano;
}

std::vector<SurfaceSample> sample_surface(const BoxRoom &room, double density) {
  if (!(density > 0))
    throw std::invalid_argument("sample_surface: density must be > 0");
  std::vector<SurfaceSample> cloud;
  for (int face = 0; face < 6; ++face) {
    int a, i, j;
    face_axes(face, a, i, j);
    double si = room.extents[i], sj = room.extents[j];
    long n = std::max(1L, std::lround(density * si * sj));
    long gi = std::max(1L, std::lround(std::sqrt(static_cast<double>(n) * si / sj)));
    long gj = std::max(1L, std::lround(static_cast<double>(n) / gi));
    std::mt19937_64 rng(mix_hash(room.seed * 6 + face + 1));
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (long ii = 0; ii < gi; ++ii) {
      for (long jj = 0; jj < gj; ++jj) {
        SurfaceSample s;
        s.position[a] = (face % 2 == 1 ? 0.5 : -0.5) * room.extents[a];
        s.position[i] = ((ii + jitter(rng)) / gi - 0.5) * si;
        s.position[j] = ((jj + jitter(rng)) / gj - 0.5) * sj;
        s.normal = Vec3::Zero();
        s.normal[a] = face % 2 == 1 ? -1.0 : 1.0; // inward
        cloud.push_back(s);
      }
    }
  }
  return cloud;
}

BoxRoom load_room_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open room config: " + path);
  BoxRoom room;
  room.cameras.clear();
  bool have_extents = false, have_poses = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key))
      continue;
    auto fail = [&](const std::string &why) -> IoError {
      return IoError(path + ":" + std::to_string(lineno) + ": field '" + key +
                     "': " + why);
    };
    if (key == "extents") {
      double x, y, z;
      if (!(ss >> x >> y >> z) || x <= 0 || y <= 0 || z <= 0)
        throw fail("expected three positive sizes in meters");
      room.extents = Vec3(x, y, z);
      have_extents = true;
    } else if (key == "texture") {
      std::string t;
      ss >> t;
      if (t == "checker")
        room.texture = WallTexture::Checker;
      else if (t == "gradient")
        room.texture = WallTexture::Gradient;
      else
        throw fail("expected 'checker' or 'gradient'");
    } else if (key == "period") {
      double p;
      if (!(ss >> p) || p <= 0)
        throw fail("expected a positive period in meters");
      room.period = p;
    } else if (key == "seed") {
      if (!(ss >> room.seed))
        throw fail("expected an integer seed");
    } else if (key == "poses") {
      std::string rel;
      if (!(ss >> rel))
        throw fail("expected a pose file path");
      auto resolved = std::filesystem::path(path).parent_path() / rel;
      room.cameras = load_pose_file(resolved.string());
      have_poses = true;
    } else {
      throw fail("unknown field");
    }
  }
  if (!have_extents)
    throw IoError(path + ": field 'extents': missing");
  if (!have_poses || room.cameras.empty())
    throw IoError(path + ": field 'poses': missing or empty pose file");
  for (const auto &c : room.cameras)
    if (!room.contains(c.pose().translation))
      throw IoError(path + ": field 'poses': camera outside the room interior");
  return room;
}

void save_cloud(const std::string &path, const std::vector<SurfaceSample> &cloud) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write cloud: " + path);
  out.precision(9);
  out << "# x y z nx ny nz\n";
  for (const auto &s : cloud)
    out << s.position.x() << ' ' << s.position.y() << ' ' << s.position.z() << ' '
        << s.normal.x() << ' ' << s.normal.y() << ' ' << s.normal.z() << '\n';
  if (!out)
    throw IoError("failed writing cloud: " + path);
}

std::vector<SurfaceSample> load_cloud(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open cloud: " + path);
  std::vector<SurfaceSample> cloud;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    SurfaceSample s;
    if (!(ss >> s.position.x() >> s.position.y() >> s.position.z()))
      continue;
    if (!(ss >> s.normal.x() >> s.normal.y() >> s.normal.z()))
      s.normal = Vec3::Zero();
    cloud.push_back(s);
  }
  return cloud;
}

} // namespace gs360
