#include "pushbroom/timing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

namespace pushbroom {

double time_median_ms(int reps, int warmup, const std::function<void()>& fn) {
  require(reps >= 1, "time_median_ms: reps must be >= 1");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(samples.begin(), samples.end());
  const size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

MachineInfo machine_info() {
  MachineInfo info;
  info.hardware_threads = std::thread::hardware_concurrency();
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        info.cpu_model = line.substr(colon + 1);
        while (!info.cpu_model.empty() && info.cpu_model.front() == ' ') {
          info.cpu_model.erase(info.cpu_model.begin());
        }
      }
      break;
    }
  }
  if (info.cpu_model.empty()) info.cpu_model = "unknown CPU";
  return info;
}

Image make_test_texture(int width, int height, std::uint64_t seed, int channels) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image noise(width, height, channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) noise.at(x, y, c) = dist(rng);
  Image smooth = gaussian_blur(noise, 1.5);
  // Stretch toward [0.05, 0.95] so gradients stay informative after the blur.
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        smooth.at(x, y, c) = 0.05f + 0.9f * std::clamp(2.0f * (smooth.at(x, y, c) - 0.5f) + 0.5f,
                                                       0.0f, 1.0f);
      }
  return smooth;
}

FlowField make_smooth_flow(int width, int height, std::uint64_t seed, float magnitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  Image noise(width, height, 2);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 2; ++c) noise.at(x, y, c) = dist(rng);
  const Image smooth = gaussian_blur(noise, 12.0);
  float peak = 1e-9f;
  for (const float v : smooth.data()) peak = std::max(peak, std::abs(v));
  FlowField flow = FlowField::zeros(width, height);
  const float gain = magnitude / peak;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      flow.du(x, y) = gain * smooth.at(x, y, 0);
      flow.dv(x, y) = gain * smooth.at(x, y, 1);
    }
  return flow;
}

std::vector<PushbroomBenchRow> run_pushbroom_benchmark(const PushbroomBenchSetup& setup,
                                                       const std::vector<int>& slice_counts) {
  require(setup.width > 0 && setup.height > 0, "benchmark: bad resolution");
  require(!slice_counts.empty(), "benchmark: need at least one K");

  const Image I_a = make_test_texture(setup.width, setup.height, setup.seed, 3);
  const Image I_b = make_test_texture(setup.width, setup.height, setup.seed + 1, 3);
  const FlowField f_ab = make_smooth_flow(setup.width, setup.height, setup.seed + 2, 6.0f);
  const FlowField f_ba = make_smooth_flow(setup.width, setup.height, setup.seed + 3, 6.0f);

  StitchConfig cfg;
  cfg.refine = setup.refine;
  cfg.slice_width = setup.slice_width;

  std::vector<PushbroomBenchRow> rows;
  for (const int k : slice_counts) {
    TransitionSpec t;
    t.slice_count = k;
    t.slice_width = setup.slice_width;
    t.boundary = std::max(0, setup.width / 2 - k * setup.slice_width - 8);
    t.side = TransitionSide::kLeft;
    cfg.slice_count = k;

    PushbroomBenchRow row;
    row.slice_count = k;
    Image sink;
    row.naive_ms = time_median_ms(setup.reps, setup.warmup, [&]() {
      sink = naive_pushbroom_half(I_a, I_b, f_ab, f_ba, t, cfg);
    });
    row.fast_ms = time_median_ms(setup.reps, setup.warmup, [&]() {
      sink = fast_pushbroom_half(I_a, I_b, f_ab, f_ba, t, cfg);
    });
    row.speedup = row.fast_ms > 0.0 ? row.naive_ms / row.fast_ms : 0.0;
    rows.push_back(row);
  }
  return rows;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "linear_fit_r2: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return 0.0;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    const double fit = slope * x[i] + intercept;
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  if (ss_tot < 1e-12) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace pushbroom
