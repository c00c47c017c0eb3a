// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gs360 {

void RawGaussianPlanes::validate() const {
  auto bad = [&](const Image &img, int ch) {
    return img.width() != depth.width() || img.height() != depth.height() ||
           img.channels() != ch;
  };
  if (depth.channels() != 1)
    throw std::invalid_argument("RawGaussianPlanes: depth must have 1 channel");
  if (bad(offset, 2) || bad(scale_logits, 3) || bad(quat_raw, 4) ||
      bad(opacity, 1) || bad(color_logits, 3))
    throw std::invalid_argument("RawGaussianPlanes: plane shapes disagree");
}

namespace {

inline double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Positivity floor: sigmoid underflows to exactly 0 below ~-745.
constexpr double kTinyScale = 1e-12;

} // namespace

std::vector<GaussianPrimitive> activate(const RawGaussianPlanes &raw,
                                        const EquirectCamera &cam,
                                        const AdapterConfig &cfg,
                                        AdapterDiagnostics *diag) {
  raw.validate();
  if (raw.depth.width() != cam.width() || raw.depth.height() != cam.height())
    throw std::invalid_argument("activate: plane/camera size mismatch");
  if (cfg.kappa <= 0.0 || cfg.offset_clamp < 0.0)
    throw std::invalid_argument("activate: bad adapter config");

  const int w = cam.width();
  const int h = cam.height();
  const double angular = 2.0 * kPi / w;
  AdapterDiagnostics local;
  std::vector<GaussianPrimitive> out;
  out.reserve(static_cast<size_t>(w) * h);

  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double d = raw.depth.at(u, v);
      if (!(d > 0.0)) {
        ++local.skipped_pixels;
        continue;
      }
      GaussianPrimitive g;
      const double du = std::clamp(raw.offset.at(u, v, 0), -cfg.offset_clamp,
                                   cfg.offset_clamp);
      const double dv = std::clamp(raw.offset.at(u, v, 1), -cfg.offset_clamp,
                                   cfg.offset_clamp);
      // Stay inside the valid sub-pixel domain at the image border.
      const double su = std::clamp(u + du, -0.5, w - 0.5);
      const double sv = std::clamp(v + dv, -0.5, h - 0.5);
      g.center = unproject(cam, su, sv, d);

      const double ceiling = cfg.kappa * d * angular;
      for (int a = 0; a < 3; ++a)
        g.scales[a] =
            std::max(sigmoid(raw.scale_logits.at(u, v, a)) * ceiling, kTinyScale);

      const Vec4 q(raw.quat_raw.at(u, v, 0), raw.quat_raw.at(u, v, 1),
                   raw.quat_raw.at(u, v, 2), raw.quat_raw.at(u, v, 3));
      const double norm = q.norm();
      if (norm < 1e-12 || !std::isfinite(norm)) {
        ++local.degenerate_rotations;
        g.rotation = Quat::Identity();
      } else {
        g.rotation = Quat(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
      }

      const double op = raw.opacity.at(u, v);
      g.opacity = cfg.opacity_is_confidence ? std::clamp(op, 0.0, 1.0)
                                            : sigmoid(op);
      for (int c = 0; c < 3; ++c)
        g.color[c] = sigmoid(raw.color_logits.at(u, v, c));
      out.push_back(g);
    }

  if (diag)
    *diag = local;
  return out;
}

} // namespace gs360
