// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/image.hpp"

#include <span>
#include <vector>

namespace gs360 {

/// Exact nearest-neighbor index over 3D points (median-split k-d tree,
/// branch-and-bound queries; no approximation). Queries are const and safe
/// to run concurrently.
class KdTree3 {
public:
  explicit KdTree3(std::span<const Vec3> points);

  /// Euclidean distance from q to the closest indexed point.
  double nearest_distance(const Vec3 &q) const;
  size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Vec3 point;
    int left = -1;
    int right = -1;
    int axis = 0;
  };
  int build(std::span<int> order, std::vector<Vec3> &pts);
  void search(int node, const Vec3 &q, double &best_sq) const;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Peak signal-to-noise ratio in dB over [0,1] images; identical inputs
/// report the 99 dB cap.
double psnr(const Image &a, const Image &b);
constexpr double kPsnrCap = 99.0;

/// Gaussian-windowed structural similarity (window 11, sigma 1.5 by
/// default), averaged over all full-window positions and channels. Throws
/// when either image dimension is smaller than the window.
double ssim(const Image &a, const Image &b, int window = 11, double sigma = 1.5,
            double k1 = 0.01, double k2 = 0.03);

struct DepthMetricsResult {
  double abs_diff = 0.0;      // mean |pred - gt|, meters
  double abs_rel = 0.0;       // mean |pred - gt| / gt
  double rmse = 0.0;          // meters
  double delta_125_pct = 0.0; // 100 * fraction with max(p/g, g/p) < 1.25
  long pixels = 0;            // pixels entering the means
  long excluded_nonpositive_gt = 0;
};

/// Depth-map error metrics over pixels valid in both planes; pixels whose
/// ground truth is non-positive are excluded and tallied. Throws when no
/// pixel survives.
DepthMetricsResult depth_metrics(const Image &pred, const Image &gt);

struct CloudMetricsResult {
  double accuracy_m = 0.0;     // mean pred -> nearest gt
  double completeness_m = 0.0; // mean gt -> nearest pred
  double chamfer_m = 0.0;      // accuracy + completeness
};

/// Point-cloud geometry metrics with exact nearest neighbors.
CloudMetricsResult cloud_metrics(std::span<const Vec3> pred,
                                 std::span<const Vec3> gt, int threads = 0);

} // namespace gs360
