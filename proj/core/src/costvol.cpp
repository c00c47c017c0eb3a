// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/costvol.hpp"

#include "gs360/parallel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gs360 {

void SphereCostVolume::validate() const {
  if (width < 1 || height < 1)
    throw std::invalid_argument("SphereCostVolume: empty image grid");
  if (hypotheses.size() < 2)
    throw std::invalid_argument("SphereCostVolume: need at least 2 hypotheses");
  for (size_t k = 0; k + 1 < hypotheses.size(); ++k)
    if (!(hypotheses[k] < hypotheses[k + 1]))
      throw std::invalid_argument("SphereCostVolume: hypotheses must increase");
  if (hypotheses.front() <= 0.0)
    throw std::invalid_argument("SphereCostVolume: hypotheses must be positive");
  if (cost.size() != static_cast<size_t>(width) * height * hypotheses.size())
    throw std::invalid_argument("SphereCostVolume: cost size mismatch");
  for (float c : cost)
    if (!std::isfinite(c))
      throw std::invalid_argument("SphereCostVolume: non-finite cost");
}

std::vector<double> inverse_depth_hypotheses(int k, double near_m, double far_m) {
  if (k < 2)
    throw std::invalid_argument("inverse_depth_hypotheses: k must be >= 2");
  if (near_m <= 0.0 || far_m <= near_m)
    throw std::invalid_argument("inverse_depth_hypotheses: need 0 < near < far");
  std::vector<double> out(k);
  const double inv_near = 1.0 / near_m;
  const double inv_far = 1.0 / far_m;
  for (int i = 0; i < k; ++i) {
    const double a = static_cast<double>(i) / (k - 1);
    out[i] = 1.0 / (inv_near + a * (inv_far - inv_near));
  }
  return out;
}

SphereCostVolume sweep(const EquirectCamera &ref_cam, const Image &ref_rgb,
                       std::span<const EquirectCamera> src_cams,
                       std::span<const Image> src_rgbs,
                       std::span<const double> hypotheses, int threads) {
  if (src_cams.empty())
    throw std::invalid_argument("sweep: at least one source view required");
  if (src_cams.size() != src_rgbs.size())
    throw std::invalid_argument("sweep: source camera/image count mismatch");
  if (ref_rgb.width() != ref_cam.width() || ref_rgb.height() != ref_cam.height() ||
      ref_rgb.channels() != 3)
    throw std::invalid_argument("sweep: reference image/camera mismatch");
  for (size_t s = 0; s < src_cams.size(); ++s)
    if (src_rgbs[s].width() != src_cams[s].width() ||
        src_rgbs[s].height() != src_cams[s].height() || src_rgbs[s].channels() != 3)
      throw std::invalid_argument("sweep: source image/camera mismatch");

  SphereCostVolume vol;
  vol.width = ref_cam.width();
  vol.height = ref_cam.height();
  vol.hypotheses.assign(hypotheses.begin(), hypotheses.end());
  vol.cost.assign(static_cast<size_t>(vol.width) * vol.height * hypotheses.size(),
                  0.0f);
  {
    SphereCostVolume shape = vol; // validates geometry before the sweep
    shape.validate();
  }

  const int w = vol.width;
  const int h = vol.height;
  const int k_hyp = static_cast<int>(hypotheses.size());
  const float sentinel = std::numeric_limits<float>::max();

  parallel_chunks(h, threads, [&](int, long begin, long end) {
    for (long v = begin; v < end; ++v)
      for (int u = 0; u < w; ++u) {
        const Ray ray = pixel_to_ray(ref_cam, u, static_cast<int>(v));
        const Vec3 dir_w = ref_cam.pose().dir_to_world(ray.direction);
        const Vec3 origin = ref_cam.pose().translation;
        for (int k = 0; k < k_hyp; ++k) {
          const Vec3 point = origin + hypotheses[k] * dir_w;
          double mean[3] = {ref_rgb.at(u, static_cast<int>(v), 0),
                            ref_rgb.at(u, static_cast<int>(v), 1),
                            ref_rgb.at(u, static_cast<int>(v), 2)};
          double mean_sq[3] = {mean[0] * mean[0], mean[1] * mean[1],
                               mean[2] * mean[2]};
          int n = 1;
          for (size_t s = 0; s < src_cams.size(); ++s) {
            const Vec3 local = src_cams[s].pose().to_camera(point);
            if (local.norm() < 1e-12)
              continue; // point at the source center: direction undefined
            const Vec2 px = ray_to_pixel(src_cams[s], local.normalized());
            for (int c = 0; c < 3; ++c) {
              const double val = sample_bilinear_wrap(src_rgbs[s], px[0], px[1], c);
              mean[c] += val;
              mean_sq[c] += val * val;
            }
            ++n;
          }
          float cost;
          if (n < 2) {
            cost = sentinel; // no source sampled: uninformative pixel
          } else {
            double var = 0.0;
            for (int c = 0; c < 3; ++c) {
              const double m = mean[c] / n;
              var += mean_sq[c] / n - m * m;
            }
            cost = static_cast<float>(std::max(var / 3.0, 0.0));
          }
          vol.cost[vol.index(u, static_cast<int>(v), k)] = cost;
        }
      }
  });

  // Replace sentinels by the worst finite cost so the volume stays finite.
  float worst = 0.0f;
  for (float c : vol.cost)
    if (c != sentinel && c > worst)
      worst = c;
  for (float &c : vol.cost)
    if (c == sentinel)
      c = worst;
  return vol;
}

DepthPrior regress_depth(const SphereCostVolume &vol, double tau) {
  if (tau <= 0.0)
    throw std::invalid_argument("regress_depth: temperature must be positive");
  vol.validate();
  const int w = vol.width;
  const int h = vol.height;
  const int k_hyp = static_cast<int>(vol.hypotheses.size());

  DepthPrior prior;
  prior.depth = Image(w, h, 1);
  prior.confidence = Image(w, h, 1);

  std::vector<double> logits(k_hyp);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < k_hyp; ++k) {
        logits[k] = -static_cast<double>(vol.cost[vol.index(u, v, k)]) / tau;
        best = std::max(best, logits[k]);
      }
      double norm = 0.0;
      for (int k = 0; k < k_hyp; ++k) {
        logits[k] = std::exp(logits[k] - best);
        norm += logits[k];
      }
      double depth = 0.0, peak = 0.0;
      for (int k = 0; k < k_hyp; ++k) {
        const double p = logits[k] / norm;
        depth += p * vol.hypotheses[k];
        peak = std::max(peak, p);
      }
      prior.depth.at(u, v) = depth;
      prior.confidence.at(u, v) = peak;
    }
  return prior;
}

namespace {

template <typename T> void write_raw(std::ostream &os, const T &value) {
  os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T> T read_raw(std::istream &is, const char *what) {
  T value;
  is.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!is)
    throw IoError(std::string("cost volume: truncated ") + what);
  return value;
}

} // namespace

void save_cost_volume(const std::string &path, const SphereCostVolume &vol) {
  vol.validate();
  // The header only stores (K, near, far), so the spacing must be the
  // canonical inverse-depth-uniform one or the file would not round-trip.
  const auto canonical = inverse_depth_hypotheses(
      static_cast<int>(vol.hypotheses.size()), vol.hypotheses.front(),
      vol.hypotheses.back());
  for (size_t i = 0; i < canonical.size(); ++i)
    if (std::abs(canonical[i] - vol.hypotheses[i]) > 1e-9 * vol.hypotheses[i])
      throw IoError("cost volume: file format requires inverse-depth-uniform "
                    "hypotheses");
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw IoError("cost volume: cannot open for writing: " + path);
  write_raw(os, kCostVolumeMagic);
  write_raw(os, static_cast<std::uint32_t>(vol.width));
  write_raw(os, static_cast<std::uint32_t>(vol.height));
  write_raw(os, static_cast<std::uint32_t>(vol.hypotheses.size()));
  write_raw(os, static_cast<float>(vol.hypotheses.front()));
  write_raw(os, static_cast<float>(vol.hypotheses.back()));
  os.write(reinterpret_cast<const char *>(vol.cost.data()),
           static_cast<std::streamsize>(vol.cost.size() * sizeof(float)));
  if (!os)
    throw IoError("cost volume: write failed: " + path);
}

SphereCostVolume load_cost_volume(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw IoError("cost volume: cannot open: " + path);
  if (read_raw<std::uint32_t>(is, "magic") != kCostVolumeMagic)
    throw IoError("cost volume: bad magic in " + path);
  SphereCostVolume vol;
  vol.width = static_cast<int>(read_raw<std::uint32_t>(is, "width"));
  vol.height = static_cast<int>(read_raw<std::uint32_t>(is, "height"));
  const auto k = read_raw<std::uint32_t>(is, "hypothesis count");
  const float near_m = read_raw<float>(is, "near");
  const float far_m = read_raw<float>(is, "far");
  if (k < 2 || near_m <= 0.0f || far_m <= near_m)
    throw IoError("cost volume: invalid header in " + path);
  auto hyp = inverse_depth_hypotheses(static_cast<int>(k), near_m, far_m);
  vol.hypotheses = std::move(hyp);
  vol.cost.resize(static_cast<size_t>(vol.width) * vol.height * k);
  is.read(reinterpret_cast<char *>(vol.cost.data()),
          static_cast<std::streamsize>(vol.cost.size() * sizeof(float)));
  if (!is)
    throw IoError("cost volume: truncated payload in " + path);
  vol.validate();
  return vol;
}

FilmMap FilmMap::identity(int channels, int cond_dim) {
  if (channels < 1 || cond_dim < 1)
    throw std::invalid_argument("FilmMap: dimensions must be positive");
  FilmMap m;
  m.gamma_weights = MatX::Zero(channels, cond_dim);
  m.gamma_bias = VecX::Ones(channels);
  m.beta_weights = MatX::Zero(channels, cond_dim);
  m.beta_bias = VecX::Zero(channels);
  return m;
}

VecX condition_vector(std::span<const Image> planes) {
  if (planes.empty())
    throw std::invalid_argument("condition_vector: no planes");
  int total = 0;
  for (const auto &p : planes)
    total += p.channels();
  VecX out(total);
  int at = 0;
  for (const auto &p : planes) {
    const long n = static_cast<long>(p.width()) * p.height();
    for (int c = 0; c < p.channels(); ++c) {
      double acc = 0.0;
      for (int v = 0; v < p.height(); ++v)
        for (int u = 0; u < p.width(); ++u)
          acc += p.at(u, v, c);
      out[at++] = acc / static_cast<double>(n);
    }
  }
  return out;
}

Image film_modulate(const Image &features, const FilmMap &map, const VecX &cond) {
  const int ch = features.channels();
  if (map.gamma_weights.rows() != ch || map.beta_weights.rows() != ch ||
      map.gamma_bias.size() != ch || map.beta_bias.size() != ch)
    throw std::invalid_argument("film_modulate: channel count mismatch");
  if (map.gamma_weights.cols() != cond.size() ||
      map.beta_weights.cols() != cond.size())
    throw std::invalid_argument("film_modulate: conditioning size mismatch");
  const VecX gamma = map.gamma_weights * cond + map.gamma_bias;
  const VecX beta = map.beta_weights * cond + map.beta_bias;
  Image out(features.width(), features.height(), ch);
  for (int v = 0; v < features.height(); ++v)
    for (int u = 0; u < features.width(); ++u)
      for (int c = 0; c < ch; ++c)
        out.at(u, v, c) = gamma[c] * features.at(u, v, c) + beta[c];
  return out;
}

} // namespace gs360
