#pragma once

#include <cstdint>
#include <string>

namespace pbstitch {

// Exit code classes; 0 is success and CLI11 usage errors map to kExitUsage.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitFormat = 4;
inline constexpr int kExitContract = 5;
inline constexpr int kExitStitch = 6;
inline constexpr int kExitInternal = 10;

struct SynthOptions {
  std::string scene_path;
  std::string rig_path;
  std::string config_path;
  std::string out_dir;
  int frames = 1;
};

struct StitchOptions {
  std::string in_dir;
  std::string rig_path;
  std::string config_path;
  std::string out_dir;
  std::string mode = "fast";         // fast | naive
  std::string flow_source = "estimate";  // estimate | files
};

struct EvalOptions {
  std::string stitched_dir;
  std::string gt_dir;
  std::string out_dir;
  std::string manifest_path;  // defaults to stitched/manifest.json when present
  double occlusion_threshold = 1.0;
  bool skip_warp_error = false;
};

struct BenchOptions {
  int width = 1000;
  int height = 600;
  int slice_width = 2;
  int reps = 5;
  std::string slice_counts = "10,25,50,100";
  std::string refine = "none";  // none | deterministic
  std::string out_csv;
  std::uint64_t seed = 12345;
};

int run_synth(const SynthOptions& opts);
int run_stitch(const StitchOptions& opts);
int run_eval(const EvalOptions& opts);
int run_bench(const BenchOptions& opts);

}  // namespace pbstitch
