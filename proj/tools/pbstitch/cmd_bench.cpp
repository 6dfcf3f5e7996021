#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "common.hpp"
#include "pushbroom/errors.hpp"
#include "pushbroom/timing.hpp"

namespace pbstitch {

namespace {

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int k = std::atoi(item.c_str());
    if (k < 1) throw pushbroom::ContractError("bench: bad K value '" + item + "'");
    out.push_back(k);
  }
  if (out.empty()) throw pushbroom::ContractError("bench: empty K list");
  return out;
}

}  // namespace

int run_bench(const BenchOptions& opts) {
  namespace pb = pushbroom;
  pb::PushbroomBenchSetup setup;
  setup.width = opts.width;
  setup.height = opts.height;
  setup.slice_width = opts.slice_width;
  setup.reps = opts.reps;
  setup.seed = opts.seed;
  setup.refine =
      opts.refine == "deterministic" ? pb::RefineMode::kDeterministic : pb::RefineMode::kNone;

  const auto ks = parse_k_list(opts.slice_counts);
  const pb::MachineInfo machine = pb::machine_info();
  std::printf("# %s, %u hardware threads\n", machine.cpu_model.c_str(), machine.hardware_threads);
  std::printf("# %dx%d frames, s=%d, refine=%s, median of %d reps after 1 warmup\n", opts.width,
              opts.height, opts.slice_width, opts.refine.c_str(), opts.reps);
  std::printf("%8s %14s %14s %10s\n", "K", "naive_ms", "fast_ms", "speedup");

  const auto rows = pb::run_pushbroom_benchmark(setup, ks);
  for (const auto& row : rows) {
    std::printf("%8d %14.2f %14.2f %9.1fx\n", row.slice_count, row.naive_ms, row.fast_ms,
                row.speedup);
  }

  if (!opts.out_csv.empty()) {
    std::ofstream csv(opts.out_csv);
    csv << "K,naive_ms,fast_ms,speedup\n";
    for (const auto& row : rows) {
      csv << row.slice_count << "," << row.naive_ms << "," << row.fast_ms << "," << row.speedup
          << "\n";
    }
    if (!csv) throw pb::IoError("failed to write " + opts.out_csv);
  }
  return 0;
}

}  // namespace pbstitch
