// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/metrics.hpp"

#include "gs360/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gs360 {

KdTree3::KdTree3(std::span<const Vec3> points) {
  if (points.empty())
    throw std::invalid_argument("KdTree3: empty point set");
  std::vector<Vec3> pts(points.begin(), points.end());
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(points.size());
  root_ = build(order, pts);
}

int KdTree3::build(std::span<int> order, std::vector<Vec3> &pts) {
  if (order.empty())
    return -1;
  // Split on the axis with the widest spread for balanced pruning.
  Vec3 lo = pts[order.front()], hi = lo;
  for (int i : order) {
    lo = lo.cwiseMin(pts[i]);
    hi = hi.cwiseMax(pts[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const size_t mid = order.size() / 2;
  std::nth_element(order.begin(), order.begin() + mid, order.end(),
                   [&](int a, int b) { return pts[a][axis] < pts[b][axis]; });
  Node node;
  node.point = pts[order[mid]];
  node.axis = axis;
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(order.subspan(0, mid), pts);
  const int right = build(order.subspan(mid + 1), pts);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int node, const Vec3 &q, double &best_sq) const {
  if (node < 0)
    return;
  const Node &n = nodes_[node];
  best_sq = std::min(best_sq, (n.point - q).squaredNorm());
  const double diff = q[n.axis] - n.point[n.axis];
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, best_sq);
  if (diff * diff < best_sq) // the far half-space may still hold a closer point
    search(far, q, best_sq);
}

double KdTree3::nearest_distance(const Vec3 &q) const {
  double best_sq = std::numeric_limits<double>::infinity();
  search(root_, q, best_sq);
  return std::sqrt(best_sq);
}

namespace {

void require_same_rgb(const Image &a, const Image &b, const char *where) {
  if (!a.same_size(b))
    throw std::invalid_argument(std::string(where) + ": image sizes differ");
}

} // namespace

double psnr(const Image &a, const Image &b) {
  require_same_rgb(a, b, "psnr");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse <= 0.0)
    return kPsnrCap;
  return std::min(10.0 * std::log10(1.0 / mse), kPsnrCap);
}

double ssim(const Image &a, const Image &b, int window, double sigma, double k1,
            double k2) {
  require_same_rgb(a, b, "ssim");
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("ssim: window must be odd and >= 3");
  if (a.width() < window || a.height() < window)
    throw std::invalid_argument("ssim: image smaller than the window");

  const int r = window / 2;
  std::vector<double> kernel(window);
  double ksum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - r;
    kernel[i] = std::exp(-0.5 * x * x / (sigma * sigma));
    ksum += kernel[i];
  }
  for (double &k : kernel)
    k /= ksum;

  const int w = a.width();
  const int h = a.height();
  const int ch = a.channels();
  const double c1 = k1 * k1; // (k1 * L)^2 with L = 1
  const double c2 = k2 * k2;

  // Separable valid-region windowed moments; only full-window centers count.
  const size_t plane = static_cast<size_t>(w) * h;
  std::vector<double> ma(plane), mb(plane), maa(plane), mbb(plane), mab(plane);
  std::vector<double> ta(plane), tb(plane), taa(plane), tbb(plane), tab(plane);

  double total = 0.0;
  long count = 0;
  for (int c = 0; c < ch; ++c) {
    // Horizontal pass (all rows, valid columns only are consumed later).
    for (int v = 0; v < h; ++v)
      for (int u = r; u < w - r; ++u) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = -r; i <= r; ++i) {
          const double k = kernel[i + r];
          const double va = a.at(u + i, v, c);
          const double vb = b.at(u + i, v, c);
          sa += k * va;
          sb += k * vb;
          saa += k * va * va;
          sbb += k * vb * vb;
          sab += k * va * vb;
        }
        const size_t at = static_cast<size_t>(v) * w + u;
        ta[at] = sa;
        tb[at] = sb;
        taa[at] = saa;
        tbb[at] = sbb;
        tab[at] = sab;
      }
    // Vertical pass over the horizontal results.
    for (int v = r; v < h - r; ++v)
      for (int u = r; u < w - r; ++u) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = -r; i <= r; ++i) {
          const double k = kernel[i + r];
          const size_t at = static_cast<size_t>(v + i) * w + u;
          sa += k * ta[at];
          sb += k * tb[at];
          saa += k * taa[at];
          sbb += k * tbb[at];
          sab += k * tab[at];
        }
        const size_t at = static_cast<size_t>(v) * w + u;
        ma[at] = sa;
        mb[at] = sb;
        maa[at] = saa;
        mbb[at] = sbb;
        mab[at] = sab;
      }
    for (int v = r; v < h - r; ++v)
      for (int u = r; u < w - r; ++u) {
        const size_t at = static_cast<size_t>(v) * w + u;
        const double mu_a = ma[at];
        const double mu_b = mb[at];
        const double var_a = maa[at] - mu_a * mu_a;
        const double var_b = mbb[at] - mu_b * mu_b;
        const double cov = mab[at] - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den =
            (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        total += num / den;
        ++count;
      }
  }
  return total / static_cast<double>(count);
}

DepthMetricsResult depth_metrics(const Image &pred, const Image &gt) {
  require_same_rgb(pred, gt, "depth_metrics");
  DepthMetricsResult out;
  double sum_abs = 0.0, sum_rel = 0.0, sum_sq = 0.0;
  long hits = 0;
  for (int v = 0; v < pred.height(); ++v)
    for (int u = 0; u < pred.width(); ++u) {
      if (!depth_pixel_valid(pred, u, v) || !depth_pixel_valid(gt, u, v))
        continue;
      const double g = gt.at(u, v);
      if (g <= 0.0) {
        ++out.excluded_nonpositive_gt;
        continue;
      }
      const double p = pred.at(u, v);
      const double d = p - g;
      sum_abs += std::abs(d);
      sum_rel += std::abs(d) / g;
      sum_sq += d * d;
      if (std::max(p / g, g / p) < 1.25)
        ++hits;
      ++out.pixels;
    }
  if (out.pixels == 0)
    throw std::invalid_argument("depth_metrics: no valid pixels");
  const double n = static_cast<double>(out.pixels);
  out.abs_diff = sum_abs / n;
  out.abs_rel = sum_rel / n;
  out.rmse = std::sqrt(sum_sq / n);
  out.delta_125_pct = 100.0 * static_cast<double>(hits) / n;
  return out;
}

CloudMetricsResult cloud_metrics(std::span<const Vec3> pred,
                                 std::span<const Vec3> gt, int threads) {
  if (pred.empty() || gt.empty())
    throw std::invalid_argument("cloud_metrics: empty point set");

  auto directed_mean = [&](std::span<const Vec3> from, const KdTree3 &to) {
    const int n_threads = resolve_threads(threads);
    std::vector<double> partial(static_cast<size_t>(n_threads), 0.0);
    parallel_chunks(static_cast<long>(from.size()), n_threads,
                    [&](int chunk, long begin, long end) {
                      double acc = 0.0;
                      for (long i = begin; i < end; ++i)
                        acc += to.nearest_distance(from[i]);
                      partial[chunk] = acc;
                    });
    double acc = 0.0;
    for (double p : partial)
      acc += p;
    return acc / static_cast<double>(from.size());
  };

  const KdTree3 gt_tree(gt);
  const KdTree3 pred_tree(pred);
  CloudMetricsResult out;
  out.accuracy_m = directed_mean(pred, gt_tree);
  out.completeness_m = directed_mean(gt, pred_tree);
  out.chamfer_m = out.accuracy_m + out.completeness_m;
  return out;
}

} // namespace gs360
