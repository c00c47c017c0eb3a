// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/adapter.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gs360;

namespace {

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

RawGaussianPlanes make_planes(int w, int h, double depth_value = 2.0) {
  RawGaussianPlanes raw;
  raw.offset = Image(w, h, 2);
  raw.depth = Image(w, h, 1, depth_value);
  raw.scale_logits = Image(w, h, 3);
  raw.quat_raw = Image(w, h, 4);
  raw.opacity = Image(w, h, 1, 0.8);
  raw.color_logits = Image(w, h, 3);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      raw.quat_raw.at(u, v, 0) = 1.0; // identity rotations by default
  return raw;
}

} // namespace

TEST_CASE("plane-shape validation catches mismatches") {
  RawGaussianPlanes raw = make_planes(4, 2);
  CHECK_NOTHROW(raw.validate());
  raw.scale_logits = Image(4, 2, 2);
  CHECK_THROWS_AS(raw.validate(), std::invalid_argument);
  raw = make_planes(4, 2);
  raw.offset = Image(3, 2, 2);
  CHECK_THROWS_AS(raw.validate(), std::invalid_argument);
  raw = make_planes(4, 2);
  raw.depth = Image(4, 2, 3, 1.0);
  CHECK_THROWS_AS(raw.validate(), std::invalid_argument);

  raw = make_planes(4, 2);
  EquirectCamera wrong(8, 4);
  CHECK_THROWS_AS(activate(raw, wrong), std::invalid_argument);
  EquirectCamera cam(4, 2);
  AdapterConfig bad;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(activate(raw, cam, bad), std::invalid_argument);
  bad = {};
  bad.offset_clamp = -0.1;
  CHECK_THROWS_AS(activate(raw, cam, bad), std::invalid_argument);
}

TEST_CASE("activation applies the documented squashing formulas") {
  const int w = 8, h = 4;
  EquirectCamera cam(w, h);
  RawGaussianPlanes raw = make_planes(w, h, 2.0);
  raw.scale_logits.at(3, 1, 0) = -1.0;
  raw.scale_logits.at(3, 1, 1) = 0.0;
  raw.scale_logits.at(3, 1, 2) = 3.0;
  raw.color_logits.at(3, 1, 0) = -2.0;
  raw.color_logits.at(3, 1, 1) = 0.5;
  raw.color_logits.at(3, 1, 2) = 40.0;

  AdapterDiagnostics diag;
  std::vector<GaussianPrimitive> out = activate(raw, cam, {}, &diag);
  REQUIRE(out.size() == size_t(w) * h);
  CHECK(diag.skipped_pixels == 0);
  CHECK(diag.degenerate_rotations == 0);

  const GaussianPrimitive &g = out[size_t(1) * w + 3]; // row-major (u=3, v=1)
  CHECK(g.center.isApprox(unproject(cam, 3.0, 1.0, 2.0), 1e-12));
  double ceiling = 3.0 * 2.0 * (2 * M_PI / w);
  CHECK(g.scales[0] == doctest::Approx(sigmoid_ref(-1.0) * ceiling).epsilon(1e-12));
  CHECK(g.scales[1] == doctest::Approx(0.5 * ceiling).epsilon(1e-12));
  CHECK(g.scales[2] == doctest::Approx(sigmoid_ref(3.0) * ceiling).epsilon(1e-12));
  CHECK(g.scales.maxCoeff() < ceiling);
  CHECK(g.opacity == 0.8); // confidence mode passes through
  CHECK(g.color[0] == doctest::Approx(sigmoid_ref(-2.0)).epsilon(1e-12));
  CHECK(g.color[1] == doctest::Approx(sigmoid_ref(0.5)).epsilon(1e-12));
  CHECK(g.color[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_NOTHROW(g.validate());

  // Far-negative logits bottom out at a positive floor instead of zero.
  raw.scale_logits.at(0, 0, 0) = -800.0;
  out = activate(raw, cam);
  CHECK(out[0].scales[0] > 0.0);
  CHECK(out[0].scales[0] <= 1e-12);
}

TEST_CASE("sub-pixel offsets are clamped to the configured window") {
  const int w = 8, h = 4;
  EquirectCamera cam(w, h);
  RawGaussianPlanes raw = make_planes(w, h, 1.5);
  raw.offset.at(2, 1, 0) = 2.0;   // clamps to +0.5
  raw.offset.at(2, 1, 1) = -3.0;  // clamps to -0.5
  raw.offset.at(4, 2, 0) = 0.25;  // within range, applied as-is

  std::vector<GaussianPrimitive> out = activate(raw, cam);
  CHECK(out[size_t(1) * w + 2].center.isApprox(unproject(cam, 2.5, 0.5, 1.5), 1e-12));
  CHECK(out[size_t(2) * w + 4].center.isApprox(unproject(cam, 4.25, 2.0, 1.5), 1e-12));

  // The clamp also keeps border pixels inside the pixel-coordinate domain.
  raw = make_planes(w, h, 1.5);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      raw.offset.at(u, v, 0) = -0.5;
      raw.offset.at(u, v, 1) = 0.5;
    }
  CHECK_NOTHROW(activate(raw, cam));

  AdapterConfig tight;
  tight.offset_clamp = 0.1;
  raw.offset.at(5, 1, 0) = 0.4;
  raw.offset.at(5, 1, 1) = 0.0;
  out = activate(raw, cam, tight);
  CHECK(out[size_t(1) * w + 5].center.isApprox(unproject(cam, 5.1, 1.0, 1.5), 1e-12));
}

TEST_CASE("degenerate rotations and invalid depths are tallied") {
  const int w = 4, h = 2;
  EquirectCamera cam(w, h);
  RawGaussianPlanes raw = make_planes(w, h, 2.0);
  for (int c = 0; c < 4; ++c)
    raw.quat_raw.at(1, 0, c) = 0.0;              // zero norm -> identity
  raw.quat_raw.at(2, 0, 0) = 2.0;                // non-unit, normalizable
  raw.depth.at(3, 0) = 0.0;                      // skipped
  raw.depth.at(0, 1) = -1.0;                     // skipped

  AdapterDiagnostics diag;
  std::vector<GaussianPrimitive> out = activate(raw, cam, {}, &diag);
  CHECK(out.size() == size_t(w) * h - 2);
  CHECK(diag.skipped_pixels == 2);
  CHECK(diag.degenerate_rotations == 1);
  // Output order is row-major over surviving pixels.
  CHECK(out[1].rotation.coeffs().isApprox(Quat::Identity().coeffs(), 1e-15));
  CHECK(out[2].rotation.coeffs().isApprox(Quat::Identity().coeffs(), 1e-15));
  for (const auto &g : out)
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("opacity can be a confidence or a logit") {
  const int w = 4, h = 2;
  EquirectCamera cam(w, h);
  RawGaussianPlanes raw = make_planes(w, h, 1.0);
  raw.opacity.at(0, 0) = 1.7;  // out of range confidence
  raw.opacity.at(1, 0) = -0.3; // out of range confidence
  raw.opacity.at(2, 0) = 0.4;

  std::vector<GaussianPrimitive> conf = activate(raw, cam);
  CHECK(conf[0].opacity == 1.0);
  CHECK(conf[1].opacity == 0.0);
  CHECK(conf[2].opacity == 0.4);

  AdapterConfig logit_mode;
  logit_mode.opacity_is_confidence = false;
  std::vector<GaussianPrimitive> squashed = activate(raw, cam, logit_mode);
  CHECK(squashed[0].opacity == doctest::Approx(sigmoid_ref(1.7)).epsilon(1e-12));
  CHECK(squashed[1].opacity == doctest::Approx(sigmoid_ref(-0.3)).epsilon(1e-12));
}

TEST_CASE("any finite input activates into valid primitives") {
  const int w = 16, h = 8;
  EquirectCamera cam(w, h);
  RawGaussianPlanes raw = make_planes(w, h);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> wild(-60.0, 60.0);
  std::uniform_real_distribution<double> depth(-2.0, 8.0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      raw.offset.at(u, v, 0) = wild(rng);
      raw.offset.at(u, v, 1) = wild(rng);
      raw.depth.at(u, v) = depth(rng);
      for (int c = 0; c < 3; ++c) {
        raw.scale_logits.at(u, v, c) = wild(rng);
        raw.color_logits.at(u, v, c) = wild(rng);
      }
      for (int c = 0; c < 4; ++c)
        raw.quat_raw.at(u, v, c) = wild(rng);
      raw.opacity.at(u, v) = wild(rng);
    }
  AdapterDiagnostics diag;
  std::vector<GaussianPrimitive> out = activate(raw, cam, {}, &diag);
  CHECK(out.size() + diag.skipped_pixels == size_t(w) * h);
  CHECK(diag.skipped_pixels > 0); // some sampled depths were non-positive
  for (const auto &g : out)
    CHECK_NOTHROW(g.validate());
}
