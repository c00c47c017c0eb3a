// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0
//
// Plane-sweep matching throughput over hypothesis count, plus the soft-argmin
// readout on a prebuilt volume.

#include "gs360/costvol.hpp"
#include "gs360/synth.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace gs360;

struct SweepFixture {
  std::vector<EquirectCamera> cams;
  std::vector<Image> rgbs;

  explicit SweepFixture(int height) {
    const BoxRoom room = room_a_preset(height);
    for (const auto &cam : room.cameras) {
      cams.push_back(cam);
      rgbs.push_back(render_gt(room, cam).rgb);
    }
  }
};

void BM_Sweep(benchmark::State &state) {
  static const SweepFixture fx(64);
  const int k = static_cast<int>(state.range(0));
  const auto ladder = inverse_depth_hypotheses(k, 0.3, 20.0);
  const std::vector<EquirectCamera> srcs{fx.cams[1], fx.cams[2]};
  const std::vector<Image> src_rgbs{fx.rgbs[1], fx.rgbs[2]};
  for (auto _ : state) {
    SphereCostVolume vol = sweep(fx.cams[0], fx.rgbs[0], srcs, src_rgbs, ladder, 1);
    benchmark::DoNotOptimize(vol.cost.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.rgbs[0].width() *
                          fx.rgbs[0].height() * k);
}

void BM_RegressDepth(benchmark::State &state) {
  static const SweepFixture fx(64);
  const auto ladder = inverse_depth_hypotheses(64, 0.3, 20.0);
  const std::vector<EquirectCamera> srcs{fx.cams[1], fx.cams[2]};
  const std::vector<Image> src_rgbs{fx.rgbs[1], fx.rgbs[2]};
  const SphereCostVolume vol =
      sweep(fx.cams[0], fx.rgbs[0], srcs, src_rgbs, ladder, 1);
  for (auto _ : state) {
    DepthPrior prior = regress_depth(vol, 1e-4);
    benchmark::DoNotOptimize(prior.depth.data());
  }
}

BENCHMARK(BM_Sweep)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegressDepth)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
