// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/camera.hpp"
#include "gs360/gaussian.hpp"
#include "gs360/image.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gs360 {

enum class RenderMode { Reference, Tiled };

/// Depth value reported per fragment. RayLength is the Euclidean ray
/// parameter t* with t* = (n.p)/(n.r); ZScaled is the r_z * t* variant kept
/// for compatibility. Rendering and metrics use RayLength.
enum class DepthModel { RayLength, ZScaled };

struct RenderOptions {
  RenderMode mode = RenderMode::Tiled;
  int threads = 0; // 0 = hardware concurrency
  Vec3 background = Vec3::Zero();
  DepthModel depth_model = DepthModel::RayLength;
  bool keep_fragments = false;
  bool with_normals = true; // derive the normal plane from rendered depth
};

// Compositing constants shared by both render modes.
constexpr double kAlphaCull = 1.0 / 255.0;
constexpr double kAlphaCap = 0.9999;       // keeps 1/(1-alpha) finite in backward
constexpr double kStopTransmittance = 1e-4;
constexpr double kMinPlaneDot = 1e-8;      // grazing-ray rejection
constexpr double kMinCoverage = 1e-8;      // depth denominator floor

/// One splat crossing a ray: Gaussian index, ray-length depth, effective
/// opacity. `trans` is the running transmittance, filled by
/// fill_transmittance or by the renderer.
struct SplatFragment {
  int index = -1;
  double depth = 0.0;
  double alpha = 0.0;
  double trans = 1.0;
};

struct FragmentMap {
  int width = 0;
  int height = 0;
  std::vector<std::vector<SplatFragment>> pixels; // composited, sorted

  const std::vector<SplatFragment> &at(int u, int v) const {
    return pixels[static_cast<size_t>(v) * width + u];
  }
};

struct RenderResult {
  PanoramaBuffer pano;
  FragmentMap fragments; // populated when keep_fragments is set
};

/// Intersection depth of a ray (origin o, unit direction d) with the plane
/// through p of normal n: t* = n.(p-o) / n.d, optionally scaled by d_z.
/// Empty when |n.d| < 1e-8 (numerically unstable grazing intersection).
std::optional<double> intersection_depth(const Vec3 &n, const Vec3 &p,
                                         const Ray &ray,
                                         DepthModel model = DepthModel::ZScaled);

/// Effective opacity alpha * exp(-1/2 dT Sigma^-1 d) where d runs from the
/// Gaussian center to the ray/disc-plane intersection point. Returns 0 for
/// grazing rays and singular covariances (culled).
double falloff_opacity(const GaussianPrimitive &g, const Ray &ray, const Mat3 &cov);

/// Writes the running transmittance T_i into each fragment (T_1 = 1,
/// T_{i+1} = T_i * (1 - alpha_i)). Fragments must be sorted by depth.
void fill_transmittance(std::span<SplatFragment> fragments);

/// Opacity-weighted mean depth sum(d a T) / sum(a T) over the full list;
/// -1 when coverage is below 1e-8 (including the empty list).
double composite_depth(std::span<const SplatFragment> sorted);

/// Front-to-back over-composite sum(c a T) + T_rest * background.
/// colors[i] pairs with sorted[i].
Vec3 composite_rgb(std::span<const SplatFragment> sorted,
                   std::span<const Vec3> colors, const Vec3 &background);

/// Renders rgb, depth, alpha (and optionally a depth-derived normal plane)
/// panoramas. Reference mode tests every Gaussian per pixel; Tiled bins
/// Gaussians into 16x16-pixel tiles by their angular footprint. Both modes
/// produce identical fragment sets and identical output.
RenderResult render(const EquirectCamera &cam,
                    std::span<const GaussianPrimitive> scene,
                    const RenderOptions &opts = {});

/// Per-pixel normal from central differences of back-projected depths,
/// oriented toward the camera. Invalid sentinel (0,0,0) where a neighbor is
/// invalid, at the top/bottom rows, or where the cross product degenerates.
Image depth_to_normal(const EquirectCamera &cam, const Image &depth);

namespace detail {

/// Per-camera precomputed Gaussian state used by the renderer and by the
/// analytic gradient pass.
struct CameraFrameGaussian {
  // Hot head: the cone pre-reject touches only this first cache line.
  Vec3 mu_hat;    // unit direction toward the center
  double cos_cap; // cos of the support cone half-angle; -2 disables the test
  bool skip;      // opacity too low to ever pass the cull

  Vec3 mu;        // center, camera frame
  Mat3 axes;      // columns: principal axes in camera frame
  Vec3 inv_scale; // 1/s
  Vec3 scales;
  Vec3 normal;    // axes column of the minimal scale (unsigned)
  double n_dot_mu;
  double alpha;
  Vec3 color;
  int min_axis;
  double s_max;
  double q_cull;  // quadratic-form cull threshold 2*ln(255*alpha)
  double radius;  // sphere bound on the survivable support, meters
};

std::vector<CameraFrameGaussian>
to_camera_frame(const EquirectCamera &cam, std::span<const GaussianPrimitive> scene);

/// Appends surviving fragments for one pixel ray over a candidate list.
/// The cone pre-reject is a conservative shortcut used by the tiled mode;
/// disabling it (reference mode's exhaustive sweep) changes nothing but speed.
void gather_fragments(const Ray &ray, const std::vector<CameraFrameGaussian> &prepared,
                      std::span<const int> candidates,
                      std::vector<SplatFragment> &out, bool cone_prereject = true);

/// 16x16 tile binning by conservative angular bounding boxes (covers every
/// fragment that survives the opacity cull).
struct TileGrid {
  int tile = 16;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> bins;
};

TileGrid build_tile_grid(const EquirectCamera &cam,
                         const std::vector<CameraFrameGaussian> &prepared);

} // namespace detail

} // namespace gs360
