// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace gs360;

namespace {

BoxRoom cube_room(int height) {
  BoxRoom room;
  room.extents = Vec3(4, 4, 4);
  room.cameras.emplace_back(2 * height, height);
  return room;
}

} // namespace

TEST_CASE("interior rays hit the analytic walls") {
  BoxRoom room = cube_room(16);

  WallHit fwd = intersect_room(room, Vec3::Zero(), Vec3(0, 0, 1));
  CHECK(fwd.depth == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fwd.normal.isApprox(Vec3(0, 0, -1), 1e-12));
  CHECK(fwd.face == 5);

  Vec3 corner_dir = Vec3(1, 1, 1).normalized();
  WallHit corner = intersect_room(room, Vec3::Zero(), corner_dir);
  CHECK(corner.depth == doctest::Approx(Vec3(2, 2, 2).norm()).epsilon(1e-12));

  WallHit floor = intersect_room(room, Vec3(0.5, 0, 0.5), Vec3(0, -1, 0));
  CHECK(floor.depth == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(floor.normal.isApprox(Vec3(0, 1, 0), 1e-12));
  CHECK(floor.face == 2);
}

TEST_CASE("rendered depth satisfies the wall plane equations") {
  BoxRoom room = room_a_preset(24);
  const EquirectCamera &cam = room.cameras[0];
  PanoramaBuffer pano = render_gt(room, cam);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> uu(0, cam.width() - 1), vv(0, cam.height() - 1);
  for (int i = 0; i < 500; ++i) {
    int u = uu(rng), v = vv(rng);
    REQUIRE(pano.depth_valid(u, v));
    Ray r = pixel_to_ray(cam, u, v);
    Vec3 p = cam.pose().translation +
             pano.depth.at(u, v) * cam.pose().dir_to_world(r.direction);
    // The hit point lies on one of the six wall planes.
    double res = std::min({std::abs(std::abs(p.x()) - room.extents.x() / 2),
                           std::abs(std::abs(p.y()) - room.extents.y() / 2),
                           std::abs(std::abs(p.z()) - room.extents.z() / 2)});
    CHECK(res < 1e-9);
    // The stored normal is the inward unit normal of that wall.
    CHECK(pano.normal_valid(u, v));
    Vec3 n = pano.normal.vec3(u, v);
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.dot(cam.pose().dir_to_world(r.direction)) < 0.0);
  }
}

TEST_CASE("ground-truth rendering is bit-deterministic") {
  BoxRoom room = room_a_preset(16);
  PanoramaBuffer a = render_gt(room, room.cameras[1]);
  PanoramaBuffer b = render_gt(room, room.cameras[1]);
  CHECK(std::memcmp(a.rgb.data(), b.rgb.data(), a.rgb.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.depth.data(), b.depth.data(), a.depth.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.normal.data(), b.normal.data(), a.normal.size() * sizeof(double)) == 0);
}

TEST_CASE("rendering outside the room is a domain error") {
  BoxRoom room = cube_room(8);
  room.cameras[0] = EquirectCamera(16, 8, RigidPose{Mat3::Identity(), Vec3(10, 0, 0)});
  CHECK_THROWS_AS(render_gt(room, room.cameras[0]), std::invalid_argument);
}

TEST_CASE("the roomA preset matches its documented shape") {
  BoxRoom room = room_a_preset(128);
  CHECK(room.extents.isApprox(Vec3(5, 3, 7), 0.0));
  REQUIRE(room.cameras.size() == 3);
  for (const auto &cam : room.cameras) {
    CHECK(cam.width() == 256);
    CHECK(cam.height() == 128);
    CHECK(room.contains(cam.pose().translation));
  }
  CHECK((room.cameras[1].pose().translation - room.cameras[0].pose().translation)
            .norm() == doctest::Approx(0.5));
  CHECK((room.cameras[2].pose().translation - room.cameras[0].pose().translation)
            .norm() == doctest::Approx(0.5));
}

TEST_CASE("surface samples lie on the walls at the requested density") {
  BoxRoom room = cube_room(8); // 6 faces x 16 m^2
  std::vector<SurfaceSample> cloud = sample_surface(room, 25.0);
  double area = 6 * 16.0;
  CHECK(cloud.size() > area * 25 * 0.9);
  CHECK(cloud.size() < area * 25 * 1.1);
  for (const auto &s : cloud) {
    double res = std::min({std::abs(std::abs(s.position.x()) - 2.0),
                           std::abs(std::abs(s.position.y()) - 2.0),
                           std::abs(std::abs(s.position.z()) - 2.0)});
    CHECK(res < 1e-9);
    CHECK(s.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Deterministic for a fixed seed, different for another.
  std::vector<SurfaceSample> again = sample_surface(room, 25.0);
  REQUIRE(again.size() == cloud.size());
  CHECK(again[0].position.isApprox(cloud[0].position, 0.0));
  room.seed = 99;
  std::vector<SurfaceSample> other = sample_surface(room, 25.0);
  CHECK_FALSE(other[0].position.isApprox(cloud[0].position, 1e-12));
}

TEST_CASE("doubling the density roughly doubles the sample count") {
  BoxRoom room = cube_room(8);
  size_t n1 = sample_surface(room, 10.0).size();
  size_t n2 = sample_surface(room, 20.0).size();
  CHECK(std::abs(static_cast<double>(n2) - 2.0 * static_cast<double>(n1)) <
        0.2 * static_cast<double>(n1));
}

TEST_CASE("clouds round-trip through their text format") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "gs360_cloud_test";
  fs::create_directories(dir);
  BoxRoom room = cube_room(8);
  std::vector<SurfaceSample> cloud = sample_surface(room, 5.0);
  std::string path = (dir / "cloud.txt").string();
  save_cloud(path, cloud);
  std::vector<SurfaceSample> back = load_cloud(path);
  REQUIRE(back.size() == cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    CHECK(back[i].position.isApprox(cloud[i].position, 1e-12));
    CHECK(back[i].normal.isApprox(cloud[i].normal, 1e-12));
  }
  fs::remove_all(dir);
}

TEST_CASE("room configs load extents, texture, and poses") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "gs360_roomcfg_test";
  fs::create_directories(dir);

  std::vector<EquirectCamera> cams;
  cams.emplace_back(64, 32);
  save_pose_file((dir / "poses.txt").string(), cams);
  {
    std::ofstream cfg(dir / "room.cfg");
    cfg << "# test room\n"
        << "extents 6 2.5 4\n"
        << "texture gradient\n"
        << "period 0.5\n"
        << "seed 77\n"
        << "poses poses.txt\n";
  }
  BoxRoom room = load_room_config((dir / "room.cfg").string());
  CHECK(room.extents.isApprox(Vec3(6, 2.5, 4), 1e-12));
  CHECK(room.texture == WallTexture::Gradient);
  CHECK(room.period == doctest::Approx(0.5));
  CHECK(room.seed == 77);
  REQUIRE(room.cameras.size() == 1);
  CHECK(room.cameras[0].width() == 64);
  CHECK_THROWS_AS(load_room_config((dir / "nope.cfg").string()), IoError);
  fs::remove_all(dir);
}
