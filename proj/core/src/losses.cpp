// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/losses.hpp"

#include "gs360/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace gs360 {

void LossWeights::validate() const {
  if (scale_w < 0.0 || depth_w < 0.0 || dnormal_w < 0.0 || perceptual_w < 0.0)
    throw std::invalid_argument("LossWeights: weights must be non-negative");
}

std::string LossReport::json_line() const {
  nlohmann::ordered_json j;
  j["l_rgb"] = l_rgb;
  j["l_s"] = l_s;
  j["l_depth"] = l_depth;
  j["l_dn"] = l_dn;
  j["total"] = total;
  return j.dump();
}

double scale_loss(std::span<const GaussianPrimitive> scene) {
  if (scene.empty())
    throw std::invalid_argument("scale_loss: empty scene");
  double acc = 0.0;
  for (const auto &g : scene)
    acc += std::abs(g.scales.minCoeff());
  return acc / static_cast<double>(scene.size());
}

namespace {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Per-pixel normal-consistency penalty |a-b|_1 + (1 - a.b).
inline double normal_pair_loss(const Vec3 &a, const Vec3 &b) {
  return (a - b).cwiseAbs().sum() + (1.0 - a.dot(b));
}

struct MaskedSum {
  double sum = 0.0;
  long count = 0;
  double mean_or(double fallback) const {
    return count > 0 ? sum / static_cast<double>(count) : fallback;
  }
};

MaskedSum dnormal_sum(const Image &rendered, const Image &target) {
  MaskedSum out;
  for (int v = 0; v < rendered.height(); ++v)
    for (int u = 0; u < rendered.width(); ++u) {
      if (!normal_pixel_valid(rendered, u, v) || !normal_pixel_valid(target, u, v))
        continue;
      out.sum += normal_pair_loss(rendered.vec3(u, v), target.vec3(u, v));
      ++out.count;
    }
  return out;
}

MaskedSum depth_sum(const Image &rendered, const Image &target) {
  MaskedSum out;
  for (int v = 0; v < rendered.height(); ++v)
    for (int u = 0; u < rendered.width(); ++u) {
      if (!depth_pixel_valid(rendered, u, v) || !depth_pixel_valid(target, u, v))
        continue;
      out.sum += std::abs(rendered.at(u, v) - target.at(u, v));
      ++out.count;
    }
  return out;
}

void require_same_size(const Image &a, const Image &b, const char *where) {
  if (!a.same_size(b))
    throw std::invalid_argument(std::string(where) + ": plane sizes differ");
}

} // namespace

double dnormal_loss(const Image &rendered, const Image &target) {
  require_same_size(rendered, target, "dnormal_loss");
  const MaskedSum s = dnormal_sum(rendered, target);
  if (s.count == 0)
    throw std::invalid_argument("dnormal_loss: no jointly-valid pixels");
  return s.sum / static_cast<double>(s.count);
}

double depth_loss(const Image &rendered, const Image &target) {
  require_same_size(rendered, target, "depth_loss");
  const MaskedSum s = depth_sum(rendered, target);
  if (s.count == 0)
    throw std::invalid_argument("depth_loss: no jointly-valid pixels");
  return s.sum / static_cast<double>(s.count);
}

double rgb_loss(const Image &rendered, const Image &target, double perceptual_w,
                const PerceptualFn &perceptual) {
  require_same_size(rendered, target, "rgb_loss");
  double acc = 0.0;
  const size_t n = rendered.size();
  const double *a = rendered.data();
  const double *b = target.data();
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  double out = acc / static_cast<double>(n);
  if (perceptual)
    out += perceptual_w * perceptual(rendered, target);
  return out;
}

LossReport total_loss(double l_rgb, double l_s, double l_depth, double l_dn,
                      const LossWeights &weights) {
  weights.validate();
  LossReport r;
  r.l_rgb = l_rgb;
  r.l_s = l_s;
  r.l_depth = l_depth;
  r.l_dn = l_dn;
  r.total = l_rgb + weights.scale_w * l_s + weights.depth_w * l_depth +
            weights.dnormal_w * l_dn;
  return r;
}

namespace detail {

std::array<Mat3, 4> rotation_quat_derivatives(const Quat &q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  std::array<Mat3, 4> d;
  d[0] << 0, -z, y, z, 0, -x, -y, x, 0;                       // d/dw
  d[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;               // d/dx
  d[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;               // d/dy
  d[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;               // d/dz
  for (auto &m : d)
    m *= 2.0;
  return d;
}

} // namespace detail

namespace {

// Camera-frame gradient accumulator for one Gaussian.
struct Accum {
  Vec3 center = Vec3::Zero();  // world frame
  Vec3 scales = Vec3::Zero();
  Mat3 rot = Mat3::Zero();     // w.r.t. the world-frame rotation matrix
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
};

// Backpropagates one pixel's composite seeds into the per-Gaussian
// accumulators. gC is dL/d(pixel rgb); gD is dL/d(composite depth), zero when
// the pixel's depth is unsupervised or invalid.
void pixel_backward(const Ray &ray, std::span<const SplatFragment> frags,
                    const std::vector<gs360::detail::CameraFrameGaussian> &prepared,
                    const Vec3 &gC, double gD, double depth, double coverage,
                    const Mat3 &cam_rot, std::vector<Accum> &acc) {
  const size_t m = frags.size();
  if (m == 0)
    return;
  const bool depth_live = gD != 0.0 && coverage >= kMinCoverage;

  // dL/d(weight_i) for weight_i = alpha_i * T_i.
  // Compositing: rgb += w_i c_i; depth = (sum w_i t_i) / (sum w_i).
  std::vector<double> gw(m), gt(m);
  for (size_t i = 0; i < m; ++i) {
    const auto &p = prepared[frags[i].index];
    gw[i] = gC.dot(p.color);
    gt[i] = 0.0;
    if (depth_live) {
      gw[i] += gD * (frags[i].depth - depth) / coverage;
      gt[i] = gD * frags[i].alpha * frags[i].trans / coverage;
    }
  }

  // dL/dalpha_i via a suffix recurrence over the transmittance products.
  // S tracks sum_{j>i} w_j gw_j (background term would seed S; it is
  // constant black here).
  std::vector<double> galpha(m);
  double s = 0.0;
  for (size_t k = m; k-- > 0;) {
    const double a = frags[k].alpha;
    galpha[k] = frags[k].trans * gw[k] - s / (1.0 - a);
    s += a * frags[k].trans * gw[k];
  }

  for (size_t i = 0; i < m; ++i) {
    const auto &f = frags[i];
    const auto &p = prepared[f.index];
    Accum &a = acc[f.index];

    const double w_i = f.alpha * f.trans;
    a.color += w_i * gC;

    // Recompute the local-frame geometry at the stored ray depth.
    const double t = f.depth;
    const Vec3 delta = t * ray.direction - p.mu;
    const Vec3 y = p.axes.transpose() * delta;
    const double q = (y.cwiseProduct(p.inv_scale)).squaredNorm();
    const double G = std::exp(-0.5 * q);
    const bool capped = p.alpha * G > kAlphaCap;

    double gG = 0.0;
    if (!capped) {
      a.opacity += galpha[i] * G;
      gG = galpha[i] * p.alpha;
    }
    const double gq = -0.5 * G * gG;

    const Vec3 inv_s2 = p.inv_scale.cwiseProduct(p.inv_scale);
    const Vec3 gy = 2.0 * gq * y.cwiseProduct(inv_s2);
    a.scales += (-2.0 * gq) * y.cwiseProduct(y).cwiseProduct(
                                  inv_s2.cwiseProduct(p.inv_scale));

    const Vec3 gdelta = p.axes * gy;
    Mat3 gaxes = delta * gy.transpose();

    const double gt_total = gt[i] + gdelta.dot(ray.direction);
    const double b = p.normal.dot(ray.direction);
    const Vec3 gn = (-gt_total / b) * delta;
    Vec3 gmu = -gdelta + (gt_total / b) * p.normal;
    gaxes.col(p.min_axis) += gn;

    a.center += cam_rot * gmu;
    a.rot += cam_rot * gaxes;
  }
}

} // namespace

LossEval evaluate_loss(std::span<const GaussianPrimitive> scene,
                       std::span<const EquirectCamera> cams,
                       std::span<const PanoramaBuffer> targets,
                       const LossWeights &weights, bool with_grads, int threads,
                       const PerceptualFn &perceptual) {
  weights.validate();
  if (scene.empty())
    throw std::invalid_argument("evaluate_loss: empty scene");
  if (cams.empty() || cams.size() != targets.size())
    throw std::invalid_argument("evaluate_loss: camera/target count mismatch");

  const size_t n_views = cams.size();
  const double inv_views = 1.0 / static_cast<double>(n_views);
  const int n_threads = resolve_threads(threads);

  LossEval out;
  if (with_grads)
    out.grads.assign(scene.size(), {});

  double l_rgb = 0.0, l_depth = 0.0, l_dn = 0.0;
  std::vector<Accum> acc(with_grads ? scene.size() : 0);

  RenderOptions ropts;
  ropts.mode = RenderMode::Tiled;
  ropts.threads = threads;
  ropts.depth_model = DepthModel::RayLength;
  ropts.keep_fragments = with_grads;
  ropts.with_normals = true;

  for (size_t view = 0; view < n_views; ++view) {
    const EquirectCamera &cam = cams[view];
    const PanoramaBuffer &target = targets[view];
    const int w = cam.width();
    const int h = cam.height();
    if (target.width() != w || target.height() != h)
      throw std::invalid_argument("evaluate_loss: target size mismatch");

    const RenderResult rr = render(cam, scene, ropts);
    const PanoramaBuffer &pano = rr.pano;

    l_rgb += inv_views * rgb_loss(pano.rgb, target.rgb, weights.perceptual_w,
                                  perceptual);
    const MaskedSum ds = depth_sum(pano.depth, target.depth);
    l_depth += inv_views * ds.mean_or(0.0);
    const MaskedSum ns = dnormal_sum(pano.normal, target.normal);
    l_dn += inv_views * ns.mean_or(0.0);

    if (!with_grads)
      continue;

    // Seed plane dL/d(composite depth). Direct depth supervision first.
    Image gD(w, h, 1, 0.0);
    if (ds.count > 0) {
      const double scale = inv_views * weights.depth_w / static_cast<double>(ds.count);
      for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
          if (depth_pixel_valid(pano.depth, u, v) &&
              depth_pixel_valid(target.depth, u, v))
            gD.at(u, v) += scale * sgn(pano.depth.at(u, v) - target.depth.at(u, v));
    }

    // Normal-consistency supervision scatters into the four depth samples
    // that formed each pixel's central differences.
    if (ns.count > 0 && weights.dnormal_w > 0.0) {
      const double scale = inv_views * weights.dnormal_w / static_cast<double>(ns.count);
      std::vector<Vec3> dirs(static_cast<size_t>(w) * h);
      for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
          dirs[static_cast<size_t>(v) * w + u] = pixel_to_ray(cam, u, v).direction;
      auto point_at = [&](int u, int v) {
        return Vec3(pano.depth.at(u, v) * dirs[static_cast<size_t>(v) * w + u]);
      };
      for (int v = 1; v + 1 < h; ++v)
        for (int u = 0; u < w; ++u) {
          if (!normal_pixel_valid(pano.normal, u, v) ||
              !normal_pixel_valid(target.normal, u, v))
            continue;
          const Vec3 n_d = pano.normal.vec3(u, v);
          const Vec3 n_t = target.normal.vec3(u, v);
          Vec3 gn;
          for (int k = 0; k < 3; ++k)
            gn[k] = scale * (sgn(n_d[k] - n_t[k]) - n_t[k]);

          const int ul = (u - 1 + w) % w;
          const int ur = (u + 1) % w;
          const Vec3 t_h = point_at(ur, v) - point_at(ul, v);
          const Vec3 t_v = point_at(u, v + 1) - point_at(u, v - 1);
          Vec3 c = t_v.cross(t_h);
          const double norm = c.norm();
          const Vec3 chat = c / norm;
          const double flip =
              chat.dot(dirs[static_cast<size_t>(v) * w + u]) > 0.0 ? -1.0 : 1.0;
          const Vec3 gc = (flip / norm) * (gn - chat * chat.dot(gn));
          const Vec3 g_tv = t_h.cross(gc);
          const Vec3 g_th = gc.cross(t_v);
          gD.at(ur, v) += g_th.dot(dirs[static_cast<size_t>(v) * w + ur]);
          gD.at(ul, v) -= g_th.dot(dirs[static_cast<size_t>(v) * w + ul]);
          gD.at(u, v + 1) += g_tv.dot(dirs[static_cast<size_t>(v + 1) * w + u]);
          gD.at(u, v - 1) -= g_tv.dot(dirs[static_cast<size_t>(v - 1) * w + u]);
        }
    }

    const auto prepared = gs360::detail::to_camera_frame(cam, scene);
    const Mat3 cam_rot = cam.pose().rotation;
    const double rgb_scale = inv_views * 2.0 / static_cast<double>(pano.rgb.size());

    // Per-chunk accumulators merged in chunk order keep results
    // deterministic for a fixed thread count.
    std::vector<std::vector<Accum>> partial(
        static_cast<size_t>(n_threads), std::vector<Accum>(scene.size()));
    parallel_chunks(h, n_threads, [&](int chunk, long begin, long end) {
      std::vector<Accum> &local = partial[chunk];
      for (long v = begin; v < end; ++v)
        for (int u = 0; u < w; ++u) {
          const auto &frags = rr.fragments.at(u, static_cast<int>(v));
          if (frags.empty())
            continue;
          const Ray ray = pixel_to_ray(cam, u, v);
          const Vec3 gC =
              rgb_scale * (pano.rgb.vec3(u, static_cast<int>(v)) -
                           target.rgb.vec3(u, static_cast<int>(v)));
          pixel_backward(ray, frags, prepared, gC, gD.at(u, static_cast<int>(v)),
                         pano.depth.at(u, static_cast<int>(v)),
                         pano.alpha.at(u, static_cast<int>(v)), cam_rot, local);
        }
    });
    for (const auto &local : partial)
      for (size_t i = 0; i < acc.size(); ++i) {
        acc[i].center += local[i].center;
        acc[i].scales += local[i].scales;
        acc[i].rot += local[i].rot;
        acc[i].opacity += local[i].opacity;
        acc[i].color += local[i].color;
      }
  }

  const double l_s = scale_loss(scene);
  out.report = total_loss(l_rgb, l_s, l_depth, l_dn, weights);

  if (with_grads) {
    const double ls_scale = weights.scale_w / static_cast<double>(scene.size());
    for (size_t i = 0; i < scene.size(); ++i) {
      GaussianGrad &g = out.grads[i];
      g.center = acc[i].center;
      g.scales = acc[i].scales;
      g.opacity = acc[i].opacity;
      g.color = acc[i].color;
      g.scales[min_scale_axis(scene[i].scales)] +=
          ls_scale * sgn(scene[i].scales.minCoeff());

      // Rotation-matrix gradient -> raw quaternion coefficients, through
      // normalization q_hat = q / |q|.
      const Quat qraw = scene[i].rotation;
      const Vec4 qv(qraw.w(), qraw.x(), qraw.y(), qraw.z());
      const double norm = qv.norm();
      const Quat qhat = qraw.normalized();
      const auto dR = detail::rotation_quat_derivatives(qhat);
      Vec4 ghat;
      for (int k = 0; k < 4; ++k)
        ghat[k] = (dR[k].array() * acc[i].rot.array()).sum();
      const Vec4 qn = qv / norm;
      g.rotation = (ghat - qn * qn.dot(ghat)) / norm;
    }
  }
  return out;
}

} // namespace gs360
