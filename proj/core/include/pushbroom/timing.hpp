#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pushbroom/stitch.hpp"

namespace pushbroom {

/// Wall-clock milliseconds of fn, median over reps after warmup runs.
double time_median_ms(int reps, int warmup, const std::function<void()>& fn);

struct MachineInfo {
  std::string cpu_model;
  unsigned hardware_threads = 0;
};
MachineInfo machine_info();

struct PushbroomBenchRow {
  int slice_count = 0;
  double naive_ms = 0;
  double fast_ms = 0;
  double speedup = 0;
};

struct PushbroomBenchSetup {
  int width = 1000;
  int height = 600;
  int slice_width = 2;
  int reps = 5;
  int warmup = 1;
  std::uint64_t seed = 12345;
  RefineMode refine = RefineMode::kNone;
};

/// Times naive vs fast pushbroom halves on seeded synthetic images and
/// smooth random flows at the given resolution, one row per K.
std::vector<PushbroomBenchRow> run_pushbroom_benchmark(const PushbroomBenchSetup& setup,
                                                       const std::vector<int>& slice_counts);

/// Synthetic inputs shared by the benchmark and tests: a blurred-noise
/// textured image and a smooth random flow with |du|,|dv| <= magnitude.
Image make_test_texture(int width, int height, std::uint64_t seed, int channels = 3);
FlowField make_smooth_flow(int width, int height, std::uint64_t seed, float magnitude);

/// Least-squares linearity diagnostic (R^2) of y against x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pushbroom
