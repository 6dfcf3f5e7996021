#include <benchmark/benchmark.h>

#include "pushbroom/camera.hpp"
#include "pushbroom/flow.hpp"
#include "pushbroom/stitch.hpp"
#include "pushbroom/timing.hpp"

namespace {

using namespace pushbroom;

constexpr int kWidth = 512;
constexpr int kHeight = 256;

struct Fixture {
  Image a = make_test_texture(kWidth, kHeight, 7, 3);
  Image b = make_test_texture(kWidth, kHeight, 8, 3);
  FlowField f_ab = make_smooth_flow(kWidth, kHeight, 9, 5.0f);
  FlowField f_ba = make_smooth_flow(kWidth, kHeight, 10, 5.0f);
  TransitionSpec t{/*boundary=*/64, /*slice_count=*/64, /*slice_width=*/2,
                   TransitionSide::kLeft};
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_WarpBackward(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(warp_backward(f.a, f.f_ab));
  }
}
BENCHMARK(BM_WarpBackward);

void BM_BuildColumnScaledFlow(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_column_scaled_flow(f.f_ab, f.t));
  }
}
BENCHMARK(BM_BuildColumnScaledFlow);

void BM_FastHalf(benchmark::State& state) {
  const Fixture& f = fixture();
  StitchConfig cfg;
  cfg.refine = RefineMode::kNone;
  TransitionSpec t = f.t;
  t.slice_count = static_cast<int>(state.range(0));
  t.slice_width = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fast_pushbroom_half(f.a, f.b, f.f_ab, f.f_ba, t, cfg));
  }
}
BENCHMARK(BM_FastHalf)->Arg(10)->Arg(100);

void BM_NaiveHalf(benchmark::State& state) {
  const Fixture& f = fixture();
  StitchConfig cfg;
  cfg.refine = RefineMode::kNone;
  TransitionSpec t = f.t;
  t.slice_count = static_cast<int>(state.range(0));
  t.slice_width = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(naive_pushbroom_half(f.a, f.b, f.f_ab, f.f_ba, t, cfg));
  }
}
BENCHMARK(BM_NaiveHalf)->Arg(10)->Arg(100);

void BM_Reproject(benchmark::State& state) {
  const CameraRig rig = default_rig();
  const ReprojectionMap map =
      build_reprojection_map(rig.mid.intrinsics, rig.mid.pose, rig.cylinder);
  const Image frame = make_test_texture(rig.mid.intrinsics.width, rig.mid.intrinsics.height, 3, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_reprojection(frame, map));
  }
}
BENCHMARK(BM_Reproject);

}  // namespace

BENCHMARK_MAIN();
