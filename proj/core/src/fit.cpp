// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gs360 {

void FitConfig::validate() const {
  if (iterations < 1)
    throw std::invalid_argument("FitConfig: iterations must be >= 1");
  if (step_center <= 0.0 || step_scales <= 0.0 || step_rotation <= 0.0 ||
      step_opacity <= 0.0 || step_color <= 0.0)
    throw std::invalid_argument("FitConfig: step sizes must be positive");
  weights.validate();
  if (divergence_factor <= 1.0 || divergence_patience < 1)
    throw std::invalid_argument("FitConfig: bad divergence guard");
}

double scene_scale(std::span<const GaussianPrimitive> scene) {
  if (scene.empty())
    return 1.0;
  Vec3 centroid = Vec3::Zero();
  for (const auto &g : scene)
    centroid += g.center;
  centroid /= static_cast<double>(scene.size());
  std::vector<double> dist(scene.size());
  for (size_t i = 0; i < scene.size(); ++i)
    dist[i] = (scene[i].center - centroid).norm();
  auto mid = dist.begin() + dist.size() / 2;
  std::nth_element(dist.begin(), mid, dist.end());
  const double median = *mid;
  return median > 0.0 ? median : 1.0;
}

namespace {

// Per-Gaussian Adam state over the 14 raw parameters
// (center 3, scales 3, quaternion 4, opacity 1, color 3).
struct Moments {
  std::array<double, 14> m{};
  std::array<double, 14> v{};
};

void flatten_grad(const GaussianGrad &g, std::array<double, 14> &out) {
  out[0] = g.center[0];
  out[1] = g.center[1];
  out[2] = g.center[2];
  out[3] = g.scales[0];
  out[4] = g.scales[1];
  out[5] = g.scales[2];
  out[6] = g.rotation[0];
  out[7] = g.rotation[1];
  out[8] = g.rotation[2];
  out[9] = g.rotation[3];
  out[10] = g.opacity;
  out[11] = g.color[0];
  out[12] = g.color[1];
  out[13] = g.color[2];
}

} // namespace

FitResult fit(std::vector<GaussianPrimitive> scene,
              std::span<const EquirectCamera> cams,
              std::span<const PanoramaBuffer> targets, const FitConfig &cfg) {
  cfg.validate();
  if (scene.empty())
    throw std::invalid_argument("fit: empty initial scene");
  if (cams.empty())
    throw std::invalid_argument("fit: at least one target view required");

  const double center_step = cfg.step_center * scene_scale(scene);
  std::array<double, 14> lr;
  lr.fill(0.0);
  lr[0] = lr[1] = lr[2] = center_step;
  lr[3] = lr[4] = lr[5] = cfg.step_scales;
  lr[6] = lr[7] = lr[8] = lr[9] = cfg.step_rotation;
  lr[10] = cfg.step_opacity;
  lr[11] = lr[12] = lr[13] = cfg.step_color;

  std::vector<Moments> state(scene.size());
  FitResult result;
  result.trace.reserve(cfg.iterations + 1);

  double initial_total = 0.0;
  int over_budget = 0;

  for (int iter = 0; iter <= cfg.iterations; ++iter) {
    const bool last = iter == cfg.iterations;
    LossEval eval = evaluate_loss(scene, cams, targets, cfg.weights,
                                  /*with_grads=*/!last, cfg.threads);
    result.trace.push_back(eval.report);

    if (iter == 0)
      initial_total = eval.report.total;
    else if (eval.report.total > cfg.divergence_factor * initial_total) {
      if (++over_budget >= cfg.divergence_patience) {
        std::ostringstream msg;
        msg << "fit diverged: total " << eval.report.total << " > "
            << cfg.divergence_factor << " x initial " << initial_total
            << " for " << over_budget << " consecutive iterations (iteration "
            << iter << ")";
        throw DivergenceError(msg.str());
      }
    } else {
      over_budget = 0;
    }
    if (last)
      break;

    const double t = static_cast<double>(iter + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    for (size_t i = 0; i < scene.size(); ++i) {
      std::array<double, 14> grad;
      flatten_grad(eval.grads[i], grad);
      std::array<double, 14> delta;
      Moments &mo = state[i];
      for (int k = 0; k < 14; ++k) {
        mo.m[k] = cfg.beta1 * mo.m[k] + (1.0 - cfg.beta1) * grad[k];
        mo.v[k] = cfg.beta2 * mo.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        const double mhat = mo.m[k] / bc1;
        const double vhat = mo.v[k] / bc2;
        delta[k] = lr[k] * mhat / (std::sqrt(vhat) + cfg.epsilon);
      }
      GaussianPrimitive &g = scene[i];
      g.center -= Vec3(delta[0], delta[1], delta[2]);
      g.scales -= Vec3(delta[3], delta[4], delta[5]);
      Vec4 q(g.rotation.w() - delta[6], g.rotation.x() - delta[7],
             g.rotation.y() - delta[8], g.rotation.z() - delta[9]);
      if (q.norm() < 1e-12)
        q = Vec4(1, 0, 0, 0);
      q /= q.norm();
      g.rotation = Quat(q[0], q[1], q[2], q[3]);
      g.opacity = std::clamp(g.opacity - delta[10], 0.0, 1.0);
      g.color = (g.color - Vec3(delta[11], delta[12], delta[13]))
                    .cwiseMax(0.0)
                    .cwiseMin(1.0);
      g.scales = g.scales.cwiseMax(cfg.min_scale);
    }
  }
  result.scene = std::move(scene);
  return result;
}

std::vector<GaussianPrimitive> init_from_depth(const EquirectCamera &cam,
                                               const PanoramaBuffer &prior,
                                               int stride) {
  if (stride < 1)
    throw std::invalid_argument("init_from_depth: stride must be >= 1");
  const int w = cam.width();
  const int h = cam.height();
  if (prior.width() != w || prior.height() != h)
    throw std::invalid_argument("init_from_depth: prior size mismatch");

  std::vector<GaussianPrimitive> out;
  const double angular = 2.0 * kPi / w; // radians per pixel column
  for (int bv = 0; bv < h; bv += stride)
    for (int bu = 0; bu < w; bu += stride) {
      const int cu = std::min(bu + stride / 2, w - 1);
      const int cv = std::min(bv + stride / 2, h - 1);
      if (!prior.depth_valid(cu, cv))
        continue;
      const double d = prior.depth.at(cu, cv);

      GaussianPrimitive g;
      g.center = unproject(cam, cu, cv, d);
      const double tangent = 0.5 * d * angular * stride;
      g.scales = Vec3(tangent, tangent, 0.1 * tangent);
      const Vec3 dir = cam.pose().dir_to_world(pixel_to_ray(cam, cu, cv).direction);
      g.rotation = Quat::FromTwoVectors(Vec3::UnitZ(), dir).normalized();
      g.opacity = std::clamp(prior.alpha.at(cu, cv), 0.0, 1.0);
      g.color = prior.rgb.vec3(cu, cv).cwiseMax(0.0).cwiseMin(1.0);
      out.push_back(g);
    }
  if (out.empty())
    throw std::invalid_argument("init_from_depth: depth prior has no valid blocks");
  return out;
}

} // namespace gs360
