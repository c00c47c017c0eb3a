// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/render.hpp"

#include "gs360/parallel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gs360 {

std::optional<double> intersection_depth(const Vec3 &n, const Vec3 &p,
                                         const Ray &ray, DepthModel model) {
  const double denom = n.dot(ray.direction);
  if (std::abs(denom) < kMinPlaneDot)
    return std::nullopt;
  const double t = n.dot(p - ray.origin) / denom;
  if (model == DepthModel::ZScaled)
    return ray.direction.z() * t;
  return t;
}

double falloff_opacity(const GaussianPrimitive &g, const Ray &ray, const Mat3 &cov) {
  const OrientedDisc disc = flatten(g);
  const auto t = intersection_depth(disc.normal, disc.center, ray, DepthModel::RayLength);
  if (!t)
    return 0.0;
  Eigen::FullPivLU<Mat3> lu(cov);
  if (!lu.isInvertible())
    return 0.0;
  const Vec3 d = ray.origin + *t * ray.direction - g.center;
  const double q = d.dot(lu.solve(d));
  return g.opacity * std::exp(-0.5 * q);
}

void fill_transmittance(std::span<SplatFragment> fragments) {
  double t = 1.0;
  for (auto &f : fragments) {
    f.trans = t;
    t *= 1.0 - f.alpha;
  }
}

double composite_depth(std::span<const SplatFragment> sorted) {
  double num = 0.0, den = 0.0, t = 1.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto &f : sorted) {
    const double w = f.alpha * t;
    num += w * f.depth;
    den += w;
    t *= 1.0 - f.alpha;
    lo = std::min(lo, f.depth);
    hi = std::max(hi, f.depth);
  }
  if (den < kMinCoverage)
    return PanoramaBuffer::kInvalidDepth;
  // The exact value is a convex combination of fragment depths; clamping
  // removes the <=2 ulp rounding excursion of num/den past the range.
  return std::clamp(num / den, lo, hi);
}

Vec3 composite_rgb(std::span<const SplatFragment> sorted,
                   std::span<const Vec3> colors, const Vec3 &background) {
  Vec3 acc = Vec3::Zero();
  double t = 1.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    acc += sorted[i].alpha * t * colors[i];
    t *= 1.0 - sorted[i].alpha;
  }
  return acc + t * background;
}

namespace detail {

std::vector<CameraFrameGaussian>
to_camera_frame(const EquirectCamera &cam, std::span<const GaussianPrimitive> scene) {
  std::vector<CameraFrameGaussian> out(scene.size());
  const Mat3 rct = cam.pose().rotation.transpose();
  for (size_t i = 0; i < scene.size(); ++i) {
    const GaussianPrimitive &g = scene[i];
    CameraFrameGaussian &p = out[i];
    p.mu = rct * (g.center - cam.pose().translation);
    // Normalized here so the pipeline is well-defined on raw coefficients
    // (the gradient chain differentiates through this normalization).
    p.axes = rct * g.rotation.normalized().toRotationMatrix();
    p.scales = g.scales;
    p.inv_scale = g.scales.cwiseInverse();
    p.min_axis = min_scale_axis(g.scales);
    p.normal = p.axes.col(p.min_axis);
    p.n_dot_mu = p.normal.dot(p.mu);
    p.alpha = g.opacity;
    p.color = g.color;
    p.s_max = g.scales.maxCoeff();
    p.skip = g.opacity < kAlphaCull;
    p.q_cull = p.skip ? 0.0 : 2.0 * std::log(255.0 * g.opacity);
    // Any point with q <= q_cull lies within sqrt(q_cull) Mahalanobis units,
    // hence within sqrt(q_cull) * s_max meters of the center; the slack keeps
    // the bound conservative under rounding.
    p.radius = std::sqrt(std::max(p.q_cull, 0.0)) * p.s_max * (1.0 + 1e-12);
    const double rho = p.mu.norm();
    if (rho > p.radius && rho > 0.0) {
      p.mu_hat = p.mu / rho;
      const double sin_cap = p.radius / rho;
      p.cos_cap = std::sqrt(std::max(0.0, 1.0 - sin_cap * sin_cap));
    } else {
      p.mu_hat = Vec3::UnitZ();
      p.cos_cap = -2.0;
    }
  }
  return out;
}

void gather_fragments(const Ray &ray, const std::vector<CameraFrameGaussian> &prepared,
                      std::span<const int> candidates,
                      std::vector<SplatFragment> &out, bool cone_prereject) {
  for (int idx : candidates) {
    const CameraFrameGaussian &p = prepared[idx];
    if (p.skip)
      continue;
    // Cone pre-reject: rays outside the support cone cannot reach q <= q_cull.
    // Optional so the reference mode stays an exhaustive per-Gaussian sweep.
    if (cone_prereject && ray.direction.dot(p.mu_hat) < p.cos_cap)
      continue;
    const double denom = p.normal.dot(ray.direction);
    if (std::abs(denom) < kMinPlaneDot)
      continue;
    const double t = p.n_dot_mu / denom;
    if (t <= 0.0)
      continue;
    const Vec3 delta = t * ray.direction - p.mu;
    const Vec3 y = p.axes.transpose() * delta;
    const double q = (y.cwiseProduct(p.inv_scale)).squaredNorm();
    if (q > p.q_cull) // alpha * exp(-q/2) < 1/255
      continue;
    const double a = std::min(p.alpha * std::exp(-0.5 * q), kAlphaCap);
    out.push_back({idx, t, a, 1.0});
  }
  std::sort(out.begin(), out.end(), [](const SplatFragment &a, const SplatFragment &b) {
    if (a.depth != b.depth)
      return a.depth < b.depth;
    return a.index < b.index;
  });
}

namespace {

void mark_tile_row(TileGrid &grid, int ty, double u0, double u1, int width, int idx) {
  const int tiles_x = grid.tiles_x;
  if (u1 - u0 >= width - 1) {
    for (int tx = 0; tx < tiles_x; ++tx)
      grid.bins[static_cast<size_t>(ty) * tiles_x + tx].push_back(idx);
    return;
  }
  const int t0 = static_cast<int>(std::floor(u0 / grid.tile));
  const int t1 = static_cast<int>(std::floor(u1 / grid.tile));
  if (t1 - t0 + 1 >= tiles_x) {
    for (int tx = 0; tx < tiles_x; ++tx)
      grid.bins[static_cast<size_t>(ty) * tiles_x + tx].push_back(idx);
    return;
  }
  for (int tx = t0; tx <= t1; ++tx) {
    const int wrapped = ((tx % tiles_x) + tiles_x) % tiles_x;
    auto &bin = grid.bins[static_cast<size_t>(ty) * tiles_x + wrapped];
    if (bin.empty() || bin.back() != idx) // adjacent wraps may repeat
      bin.push_back(idx);
  }
}

} // namespace

TileGrid build_tile_grid(const EquirectCamera &cam,
                         const std::vector<CameraFrameGaussian> &prepared) {
  const int w = cam.width();
  const int h = cam.height();
  TileGrid grid;
  grid.tiles_x = (w + grid.tile - 1) / grid.tile;
  grid.tiles_y = (h + grid.tile - 1) / grid.tile;
  grid.bins.assign(static_cast<size_t>(grid.tiles_x) * grid.tiles_y, {});

  const double half_pi = kPi / 2.0;
  for (size_t i = 0; i < prepared.size(); ++i) {
    const CameraFrameGaussian &p = prepared[i];
    if (p.skip)
      continue;
    const double radius = p.radius;
    const double rho = p.mu.norm();
    double theta = half_pi; // camera inside the bounding sphere: everywhere
    if (rho > radius)
      theta = std::asin(std::min(1.0, radius / rho));
    if (theta >= half_pi) {
      for (auto &bin : grid.bins)
        bin.push_back(static_cast<int>(i));
      continue;
    }
    const Vec3 dir = p.mu / rho;
    const double lat_c = std::asin(std::clamp(dir.y(), -1.0, 1.0));
    const double lat_lo = std::max(lat_c - theta, -half_pi);
    const double lat_hi = std::min(lat_c + theta, half_pi);

    // Pixel rows covering the latitude band, one pixel of margin.
    int v0 = static_cast<int>(std::floor((half_pi - lat_hi) * h / kPi - 0.5)) - 1;
    int v1 = static_cast<int>(std::ceil((half_pi - lat_lo) * h / kPi - 0.5)) + 1;
    v0 = std::clamp(v0, 0, h - 1);
    v1 = std::clamp(v1, 0, h - 1);

    const bool pole = lat_c + theta >= half_pi || lat_c - theta <= -half_pi;
    double u0 = 0.0, u1 = static_cast<double>(w);
    if (!pole) {
      // Widest longitude span occurs at the band edge closest to a pole.
      const double cos_edge = std::min(std::cos(lat_lo), std::cos(lat_hi));
      const double sin_theta = std::sin(theta);
      if (sin_theta >= cos_edge) {
        u0 = 0.0;
        u1 = static_cast<double>(w);
      } else {
        const double dlam = std::asin(sin_theta / cos_edge);
        const double lon_c = std::atan2(dir.x(), dir.z());
        const double uc = (lon_c + kPi) * w / (2.0 * kPi) - 0.5;
        const double du = dlam * w / (2.0 * kPi) + 1.0;
        u0 = uc - du;
        u1 = uc + du;
      }
    }
    const int ty0 = v0 / grid.tile;
    const int ty1 = v1 / grid.tile;
    for (int ty = ty0; ty <= ty1; ++ty)
      mark_tile_row(grid, ty, u0, u1, w, static_cast<int>(i));
  }
  return grid;
}

} // namespace detail

namespace {

struct PixelComposite {
  Vec3 rgb;
  double depth;
  double alpha;
};

// Front-to-back composite with early transmittance stop. Fragments past the
// stop point are erased so stored maps match the produced image exactly.
PixelComposite composite_pixel(std::vector<SplatFragment> &frags,
                               const std::vector<detail::CameraFrameGaussian> &prepared,
                               const Vec3 &background, double rz, DepthModel model) {
  Vec3 rgb = Vec3::Zero();
  double num = 0.0, den = 0.0, t = 1.0;
  size_t used = 0;
  for (auto &f : frags) {
    if (t < kStopTransmittance)
      break;
    f.trans = t;
    const double w = f.alpha * t;
    rgb += w * prepared[f.index].color;
    num += w * f.depth;
    den += w;
    t *= 1.0 - f.alpha;
    ++used;
  }
  frags.resize(used);
  rgb += t * background;
  PixelComposite out;
  out.rgb = rgb;
  out.alpha = den;
  if (den < kMinCoverage)
    out.depth = PanoramaBuffer::kInvalidDepth;
  else
    out.depth = (model == DepthModel::ZScaled ? rz : 1.0) * num / den;
  return out;
}

} // namespace

RenderResult render(const EquirectCamera &cam,
                    std::span<const GaussianPrimitive> scene,
                    const RenderOptions &opts) {
  const int w = cam.width();
  const int h = cam.height();
  RenderResult result;
  result.pano = PanoramaBuffer(w, h);
  result.fragments.width = w;
  result.fragments.height = h;
  result.fragments.pixels.resize(static_cast<size_t>(w) * h);

  const auto prepared = detail::to_camera_frame(cam, scene);
  const int threads = resolve_threads(opts.threads);

  const bool cone_prereject = opts.mode == RenderMode::Tiled;
  auto shade_pixel = [&](int u, int v, std::span<const int> candidates,
                         std::vector<SplatFragment> &scratch) {
    const Ray ray = pixel_to_ray(cam, u, v);
    scratch.clear();
    detail::gather_fragments(ray, prepared, candidates, scratch, cone_prereject);
    const PixelComposite px = composite_pixel(scratch, prepared, opts.background,
                                              ray.direction.z(), opts.depth_model);
    result.pano.rgb.set_vec3(u, v, px.rgb);
    result.pano.depth.at(u, v) = px.depth;
    result.pano.alpha.at(u, v) = px.alpha;
    if (opts.keep_fragments)
      result.fragments.pixels[static_cast<size_t>(v) * w + u] = scratch;
  };

  if (opts.mode == RenderMode::Reference) {
    std::vector<int> all(scene.size());
    std::iota(all.begin(), all.end(), 0);
    parallel_chunks(h, threads, [&](int, long begin, long end) {
      std::vector<SplatFragment> scratch;
      for (long v = begin; v < end; ++v)
        for (int u = 0; u < w; ++u)
          shade_pixel(u, static_cast<int>(v), all, scratch);
    });
  } else {
    const detail::TileGrid grid = detail::build_tile_grid(cam, prepared);
    const long n_tiles = static_cast<long>(grid.bins.size());
    parallel_chunks(n_tiles, threads, [&](int, long begin, long end) {
      std::vector<SplatFragment> scratch;
      for (long tile = begin; tile < end; ++tile) {
        const int ty = static_cast<int>(tile) / grid.tiles_x;
        const int tx = static_cast<int>(tile) % grid.tiles_x;
        const auto &bin = grid.bins[tile];
        const int v_end = std::min((ty + 1) * grid.tile, h);
        const int u_end = std::min((tx + 1) * grid.tile, w);
        for (int v = ty * grid.tile; v < v_end; ++v)
          for (int u = tx * grid.tile; u < u_end; ++u)
            shade_pixel(u, v, bin, scratch);
      }
    });
  }

  if (opts.with_normals)
    result.pano.normal = depth_to_normal(cam, result.pano.depth);
  if (!opts.keep_fragments)
    result.fragments.pixels.clear();
  return result;
}

Image depth_to_normal(const EquirectCamera &cam, const Image &depth) {
  const int w = depth.width();
  const int h = depth.height();
  Image normal(w, h, 3, 0.0);

  // Back-projected points P = D * ray_dir for every valid pixel.
  std::vector<Vec3> points(static_cast<size_t>(w) * h);
  std::vector<Vec3> dirs(static_cast<size_t>(w) * h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const Vec3 d = pixel_to_ray(cam, u, v).direction;
      dirs[static_cast<size_t>(v) * w + u] = d;
      points[static_cast<size_t>(v) * w + u] =
          depth_pixel_valid(depth, u, v) ? Vec3(depth.at(u, v) * d) : Vec3::Zero();
    }

  for (int v = 1; v + 1 < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int ul = (u - 1 + w) % w; // longitude wraps across the seam
      const int ur = (u + 1) % w;
      if (!depth_pixel_valid(depth, u, v) || !depth_pixel_valid(depth, ul, v) ||
          !depth_pixel_valid(depth, ur, v) || !depth_pixel_valid(depth, u, v - 1) ||
          !depth_pixel_valid(depth, u, v + 1))
        continue;
      const Vec3 t_h = points[static_cast<size_t>(v) * w + ur] -
                       points[static_cast<size_t>(v) * w + ul];
      const Vec3 t_v = points[static_cast<size_t>(v + 1) * w + u] -
                       points[static_cast<size_t>(v - 1) * w + u];
      Vec3 c = t_v.cross(t_h);
      const double norm = c.norm();
      if (norm < 1e-12)
        continue;
      c /= norm;
      if (c.dot(dirs[static_cast<size_t>(v) * w + u]) > 0.0)
        c = -c; // orient toward the camera
      normal.set_vec3(u, v, c);
    }
  }
  return normal;
}

} // namespace gs360
