// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/render.hpp"

#include "gs360/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace gs360;

namespace {

std::vector<GaussianPrimitive> random_scene(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<GaussianPrimitive> scene;
  scene.reserve(n);
  for (int i = 0; i < n; ++i) {
    GaussianPrimitive g;
    double r = 0.5 + 2.5 * uni(rng);
    Vec3 dir(uni(rng) * 2 - 1, uni(rng) * 2 - 1, uni(rng) * 2 - 1);
    if (dir.norm() < 1e-3)
      dir = Vec3::UnitZ();
    g.center = r * dir.normalized();
    for (int a = 0; a < 3; ++a)
      g.scales[a] = std::exp(std::log(0.02) + uni(rng) * std::log(0.5 / 0.02));
    Quat q(uni(rng) * 2 - 1, uni(rng) * 2 - 1, uni(rng) * 2 - 1, uni(rng) * 2 - 1);
    if (q.norm() < 1e-3)
      q = Quat::Identity();
    q.normalize();
    g.rotation = q;
    g.opacity = 0.05 + 0.9 * uni(rng);
    g.color = Vec3(uni(rng), uni(rng), uni(rng));
    scene.push_back(g);
  }
  return scene;
}

} // namespace

TEST_CASE("plane intersection depth matches hand values") {
  Ray axial{Vec3::Zero(), Vec3(0, 0, 1)};
  Vec3 n(0, 0, 1), p(0, 0, 2);

  auto t_ray = intersection_depth(n, p, axial, DepthModel::RayLength);
  auto t_z = intersection_depth(n, p, axial, DepthModel::ZScaled);
  REQUIRE(t_ray.has_value());
  REQUIRE(t_z.has_value());
  CHECK(*t_ray == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(*t_z == doctest::Approx(2.0).epsilon(1e-14));

  // Oblique ray: ray length grows by 1/cos, the z-scaled variant stays at
  // the plane height.
  Ray oblique{Vec3::Zero(), Vec3(1, 0, 1).normalized()};
  CHECK(*intersection_depth(n, p, oblique, DepthModel::RayLength) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(*intersection_depth(n, p, oblique, DepthModel::ZScaled) ==
        doctest::Approx(2.0).epsilon(1e-14));

  // Flipping the plane normal leaves the depth unchanged.
  CHECK(*intersection_depth(-n, p, oblique, DepthModel::RayLength) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

  // Offset origin.
  Ray from_one{Vec3(0, 0, 1), Vec3(0, 0, 1)};
  CHECK(*intersection_depth(n, p, from_one, DepthModel::RayLength) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // Grazing rays are rejected, with the documented 1e-8 threshold.
  CHECK_FALSE(intersection_depth(n, p, Ray{Vec3::Zero(), Vec3(1, 0, 0)}).has_value());
  Vec3 almost = Vec3(1.0, 0.0, 1e-9).normalized();
  CHECK_FALSE(intersection_depth(n, p, Ray{Vec3::Zero(), almost}).has_value());
  Vec3 barely = Vec3(1.0, 0.0, 1e-7).normalized();
  CHECK(intersection_depth(n, p, Ray{Vec3::Zero(), barely}).has_value());
}

TEST_CASE("falloff opacity is the opacity at the center and decays off-axis") {
  GaussianPrimitive g;
  g.center = Vec3(0, 0, 2);
  g.scales = Vec3(0.5, 0.5, 0.05);
  g.opacity = 0.7;
  Mat3 cov = build_covariance(g.scales, g.rotation);

  Ray through_center{Vec3::Zero(), Vec3(0, 0, 1)};
  CHECK(falloff_opacity(g, through_center, cov) == doctest::Approx(0.7).epsilon(1e-14));

  // Parallel ray offset by 0.1 m: the plane hit is displaced 0.1 along x,
  // so the quadratic form is (0.1/0.5)^2.
  Ray offset{Vec3(0.1, 0, 0), Vec3(0, 0, 1)};
  CHECK(falloff_opacity(g, offset, cov) ==
        doctest::Approx(0.7 * std::exp(-0.5 * 0.04)).epsilon(1e-12));

  // Grazing ray (parallel to the disc plane) is culled.
  Ray grazing{Vec3(0, 0, 2.0 + 1e-9), Vec3(1, 0, 0)};
  CHECK(falloff_opacity(g, grazing, cov) == 0.0);
}

TEST_CASE("transmittance and compositing follow the over operator exactly") {
  std::vector<SplatFragment> frags(2);
  frags[0] = {0, 1.0, 0.5, 0.0};
  frags[1] = {1, 2.0, 0.25, 0.0};
  fill_transmittance(frags);
  CHECK(frags[0].trans == 1.0);
  CHECK(frags[1].trans == 0.5);

  std::vector<Vec3> colors = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  Vec3 bg(0, 0, 1);
  Vec3 rgb = composite_rgb(frags, colors, bg);
  // Weights 0.5 and 0.125; the remaining 0.375 goes to the background.
  CHECK(rgb.isApprox(Vec3(0.5, 0.125, 0.375), 1e-14));
  CHECK(composite_depth(frags) == doctest::Approx(1.2).epsilon(1e-14));

  // Telescoping identity: weights plus the residual transmittance sum to 1.
  double t_rest = frags.back().trans * (1.0 - frags.back().alpha);
  CHECK(0.5 + 0.125 + t_rest == doctest::Approx(1.0).epsilon(1e-15));

  // Empty lists: background color, invalid depth.
  std::vector<SplatFragment> none;
  std::vector<Vec3> no_colors;
  CHECK(composite_rgb(none, no_colors, bg).isApprox(bg, 0.0));
  CHECK(composite_depth(none) == -1.0);
}

TEST_CASE("an empty scene renders background, zero alpha, invalid depth") {
  EquirectCamera cam(32, 16);
  RenderOptions opts;
  opts.background = Vec3(0.2, 0.4, 0.6);
  opts.threads = 1;
  RenderResult res = render(cam, {}, opts);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 32; ++u) {
      CHECK(res.pano.rgb.vec3(u, v).isApprox(opts.background, 0.0));
      CHECK(res.pano.alpha.at(u, v) == 0.0);
      CHECK_FALSE(res.pano.depth_valid(u, v));
      CHECK_FALSE(res.pano.normal_valid(u, v));
    }
}

TEST_CASE("a single flattened Gaussian renders its analytic falloff and depth") {
  GaussianPrimitive g;
  g.center = Vec3(0, 0, 2);
  g.scales = Vec3(0.5, 0.5, 0.05);
  g.opacity = 0.8;
  g.color = Vec3(0.9, 0.5, 0.1);
  Mat3 cov = build_covariance(g.scales, g.rotation);

  EquirectCamera cam(64, 32);
  RenderOptions opts;
  opts.mode = RenderMode::Reference;
  opts.keep_fragments = true;
  opts.threads = 1;
  opts.background = Vec3(0.1, 0.1, 0.1);
  std::vector<GaussianPrimitive> scene = {g};
  RenderResult res = render(cam, scene, opts);

  int hits = 0;
  for (int v = 12; v < 20; ++v)
    for (int u = 28; u < 36; ++u) {
      const auto &frags = res.fragments.at(u, v);
      Ray ray = pixel_to_ray(cam, u, v);
      double expect = falloff_opacity(g, ray, cov);
      if (frags.empty()) {
        CHECK(expect < kAlphaCull + 1e-12);
        continue;
      }
      ++hits;
      REQUIRE(frags.size() == 1);
      CHECK(frags[0].index == 0);
      CHECK(frags[0].alpha == doctest::Approx(expect).epsilon(1e-12));
      auto t = intersection_depth(gaussian_normal(g), g.center, ray,
                                  DepthModel::RayLength);
      REQUIRE(t.has_value());
      CHECK(frags[0].depth == doctest::Approx(*t).epsilon(1e-12));
      // Single fragment: alpha-blend against the background directly.
      double a = frags[0].alpha;
      CHECK(res.pano.alpha.at(u, v) == doctest::Approx(a).epsilon(1e-12));
      CHECK(res.pano.rgb.vec3(u, v).isApprox(a * g.color + (1 - a) * opts.background,
                                             1e-12));
      CHECK(res.pano.depth.at(u, v) == doctest::Approx(*t).epsilon(1e-12));
    }
  CHECK(hits > 4); // the splat spans several pixels at this resolution
}

TEST_CASE("tiled and reference rendering produce identical images") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (uint64_t seed : {21u, 22u, 23u}) {
    std::vector<GaussianPrimitive> scene = random_scene(60, seed);
    Vec3 axis(uni(rng), uni(rng), uni(rng));
    RigidPose pose{Eigen::AngleAxisd(uni(rng), axis.normalized()).toRotationMatrix(),
                   Vec3(0.2 * uni(rng), 0.2 * uni(rng), 0.2 * uni(rng))};
    EquirectCamera cam(64, 32, pose);

    RenderOptions ref_opts, tiled_opts;
    ref_opts.mode = RenderMode::Reference;
    tiled_opts.mode = RenderMode::Tiled;
    ref_opts.keep_fragments = tiled_opts.keep_fragments = true;
    RenderResult a = render(cam, scene, ref_opts);
    RenderResult b = render(cam, scene, tiled_opts);

    CHECK(std::memcmp(a.pano.rgb.data(), b.pano.rgb.data(),
                      a.pano.rgb.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.pano.depth.data(), b.pano.depth.data(),
                      a.pano.depth.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.pano.alpha.data(), b.pano.alpha.data(),
                      a.pano.alpha.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.pano.normal.data(), b.pano.normal.data(),
                      a.pano.normal.size() * sizeof(double)) == 0);

    // Fragment sets match splat-for-splat, not just after compositing.
    for (int v = 0; v < cam.height(); v += 5)
      for (int u = 0; u < cam.width(); u += 7) {
        const auto &fa = a.fragments.at(u, v);
        const auto &fb = b.fragments.at(u, v);
        REQUIRE(fa.size() == fb.size());
        for (size_t i = 0; i < fa.size(); ++i) {
          CHECK(fa[i].index == fb[i].index);
          CHECK(fa[i].depth == fb[i].depth);
          CHECK(fa[i].alpha == fb[i].alpha);
        }
      }
  }
}

TEST_CASE("fragment lists are sorted, culled, and consistent with alpha") {
  std::vector<GaussianPrimitive> scene = random_scene(120, 31);
  EquirectCamera cam(64, 32);
  RenderOptions opts;
  opts.keep_fragments = true;
  RenderResult res = render(cam, scene, opts);

  int populated = 0;
  for (int v = 0; v < cam.height(); ++v)
    for (int u = 0; u < cam.width(); ++u) {
      const auto &frags = res.fragments.at(u, v);
      if (frags.empty())
        continue;
      ++populated;
      double trans = 1.0;
      double weight_sum = 0.0;
      for (size_t i = 0; i < frags.size(); ++i) {
        CHECK(frags[i].alpha >= kAlphaCull);
        CHECK(frags[i].alpha <= kAlphaCap);
        CHECK(frags[i].depth > 0.0);
        if (i > 0)
          CHECK(frags[i].depth >= frags[i - 1].depth);
        CHECK(frags[i].trans == doctest::Approx(trans).epsilon(1e-12));
        weight_sum += frags[i].alpha * trans;
        trans *= 1.0 - frags[i].alpha;
      }
      CHECK(res.pano.alpha.at(u, v) == doctest::Approx(weight_sum).epsilon(1e-12));
      CHECK(res.pano.alpha.at(u, v) == doctest::Approx(1.0 - trans).epsilon(1e-9));
    }
  CHECK(populated > 100);
}

TEST_CASE("depth-derived normals recover a wall plane to machine precision") {
  EquirectCamera cam(128, 64);
  const double wall_z = 2.0;
  Image depth(cam.width(), cam.height(), 1, -1.0);
  for (int v = 0; v < cam.height(); ++v)
    for (int u = 0; u < cam.width(); ++u) {
      Ray ray = pixel_to_ray(cam, u, v);
      if (ray.direction.z() > 0.05)
        depth.at(u, v) = wall_z / ray.direction.z(); // ray length to z = wall_z
    }
  Image normal = depth_to_normal(cam, depth);

  for (int v = 24; v < 40; ++v)
    for (int u = 56; u < 72; ++u) {
      Vec3 n = normal.vec3(u, v);
      REQUIRE(n.norm() > 0.5); // valid
      CHECK(n.isApprox(Vec3(0, 0, -1), 1e-9));
      CHECK(n.dot(pixel_to_ray(cam, u, v).direction) < 0.0);
    }

  // Rows at the poles carry the invalid sentinel.
  for (int u = 0; u < cam.width(); ++u) {
    CHECK(normal.vec3(u, 0).isZero(0.0));
    CHECK(normal.vec3(u, cam.height() - 1).isZero(0.0));
  }
  // So do pixels whose neighbor depth is missing.
  CHECK(normal.vec3(0, 32).isZero(0.0)); // -z looking pixel, invalid neighbors
}

TEST_CASE("zscaled depth reports the plane height along the center axis") {
  GaussianPrimitive g;
  g.center = Vec3(0, 0, 2);
  g.scales = Vec3(0.6, 0.6, 0.05);
  g.opacity = 0.9;
  EquirectCamera cam(64, 32);
  RenderOptions opts;
  opts.keep_fragments = true;
  opts.depth_model = DepthModel::ZScaled;
  std::vector<GaussianPrimitive> scene = {g};
  RenderResult res = render(cam, scene, opts);
  int checked = 0;
  for (int v = 14; v < 18; ++v)
    for (int u = 30; u < 34; ++u) {
      const auto &frags = res.fragments.at(u, v);
      if (frags.empty())
        continue;
      Ray ray = pixel_to_ray(cam, u, v);
      auto t_ray = intersection_depth(gaussian_normal(g), g.center, ray,
                                      DepthModel::RayLength);
      auto t_z = intersection_depth(gaussian_normal(g), g.center, ray,
                                    DepthModel::ZScaled);
      REQUIRE(t_ray.has_value());
      REQUIRE(t_z.has_value());
      // Fragments always carry the ray-length depth; the model only rescales
      // the composited panorama depth.
      CHECK(frags[0].depth == doctest::Approx(*t_ray).epsilon(1e-12));
      CHECK(res.pano.depth.at(u, v) == doctest::Approx(*t_z).epsilon(1e-12));
      ++checked;
    }
  CHECK(checked > 0);
}
