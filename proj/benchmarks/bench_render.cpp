// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0
//
// Rendering throughput: exhaustive reference sweep vs tile-binned mode over
// panorama height x Gaussian count.

#include "gs360/render.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using namespace gs360;

std::vector<GaussianPrimitive> shell_scene(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.5, 3.0);
  std::uniform_real_distribution<double> uls(std::log(0.02), std::log(0.5));
  std::uniform_real_distribution<double> ua(0.05, 0.95), uc(0.0, 1.0);
  std::vector<GaussianPrimitive> scene(n);
  for (auto &g : scene) {
    Vec3 dir(nd(rng), nd(rng), nd(rng));
    g.center = ur(rng) * dir.normalized();
    g.scales = Vec3(std::exp(uls(rng)), std::exp(uls(rng)), std::exp(uls(rng)));
    g.rotation = Quat(nd(rng), nd(rng), nd(rng), nd(rng)).normalized();
    g.opacity = ua(rng);
    g.color = Vec3(uc(rng), uc(rng), uc(rng));
  }
  return scene;
}

void run_mode(benchmark::State &state, RenderMode mode) {
  const int height = static_cast<int>(state.range(0));
  const auto scene = shell_scene(static_cast<int>(state.range(1)), 7);
  const EquirectCamera cam(2 * height, height);
  RenderOptions opts;
  opts.mode = mode;
  opts.threads = 1;
  opts.with_normals = false;
  for (auto _ : state) {
    RenderResult rr = render(cam, scene, opts);
    benchmark::DoNotOptimize(rr.pano.rgb.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * height * height);
}

void BM_RenderReference(benchmark::State &state) {
  run_mode(state, RenderMode::Reference);
}

void BM_RenderTiled(benchmark::State &state) {
  run_mode(state, RenderMode::Tiled);
}

BENCHMARK(BM_RenderReference)
    ->Args({128, 200})
    ->Args({256, 200})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderTiled)
    ->Args({128, 200})
    ->Args({256, 200})
    ->Args({512, 200})
    ->Args({256, 1000})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
