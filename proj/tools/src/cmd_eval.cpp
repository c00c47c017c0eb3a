// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"
#include "common.hpp"

#include "gs360/gaussian.hpp"
#include "gs360/image_io.hpp"
#include "gs360/metrics.hpp"
#include "gs360/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <stdexcept>

namespace gs360::cli {

namespace {

// Invalidates rows outside a +-band_deg latitude band (depth evaluation
// restricted to mid-latitudes, away from polar distortion).
void mask_latitude_band(Image &depth, double band_deg) {
  const int h = depth.height();
  for (int v = 0; v < h; ++v) {
    const double lat_deg = 90.0 - 180.0 * (v + 0.5) / h;
    if (std::abs(lat_deg) <= band_deg)
      continue;
    for (int u = 0; u < depth.width(); ++u)
      depth.at(u, v) = PanoramaBuffer::kInvalidDepth;
  }
}

std::vector<Vec3> load_points(const std::string &path) {
  std::vector<Vec3> pts;
  if (path.size() > 3 && path.substr(path.size() - 3) == ".gs") {
    for (const auto &g : load_gaussians(path))
      pts.push_back(g.center);
  } else {
    for (const auto &s : load_cloud(path))
      pts.push_back(s.position);
  }
  return pts;
}

void emit(const nlohmann::ordered_json &j, const std::string &json_out) {
  if (json_out == "-") {
    std::cout << j.dump() << "\n";
    return;
  }
  // Aligned table on stdout; optional JSON document beside it.
  size_t width = 0;
  for (const auto &[key, value] : j.items())
    width = std::max(width, key.size());
  for (const auto &[key, value] : j.items())
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << key
              << value.get<double>() << "\n";
  if (!json_out.empty()) {
    std::ofstream os(json_out);
    if (!os)
      throw IoError("eval: cannot write " + json_out);
    os << j.dump(2) << "\n";
  }
}

} // namespace

void run_eval(const EvalArgs &args) {
  nlohmann::ordered_json j;
  if (args.mode == "image") {
    const Image pred = read_image(args.pred);
    const Image gt = read_image(args.gt);
    j["psnr_db"] = psnr(pred, gt);
    j["ssim"] = ssim(pred, gt);
  } else if (args.mode == "depth") {
    Image pred = read_pfm(args.pred);
    Image gt = read_pfm(args.gt);
    if (args.band_deg < 90.0)
      mask_latitude_band(gt, args.band_deg);
    const DepthMetricsResult m = depth_metrics(pred, gt);
    j["abs_diff_m"] = m.abs_diff;
    j["abs_rel"] = m.abs_rel;
    j["rmse_m"] = m.rmse;
    j["delta_125_pct"] = m.delta_125_pct;
  } else if (args.mode == "cloud") {
    const auto pred = load_points(args.pred);
    const auto gt = load_points(args.gt);
    const CloudMetricsResult m = cloud_metrics(pred, gt);
    j["accuracy_m"] = m.accuracy_m;
    j["completeness_m"] = m.completeness_m;
    j["chamfer_m"] = m.chamfer_m;
  } else {
    throw std::invalid_argument("eval: --mode must be image, depth, or cloud");
  }
  emit(j, args.json_out);
}

} // namespace gs360::cli
