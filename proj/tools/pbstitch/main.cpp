#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "common.hpp"
#include "pushbroom/errors.hpp"
#include "pushbroom/parallel.hpp"

namespace {

int default_threads_from_env() {
  const char* env = std::getenv("PBSTITCH_THREADS");
  if (!env) return 0;
  const int n = std::atoi(env);
  return n > 0 ? n : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pbstitch - wide-baseline pushbroom video stitcher"};
  app.require_subcommand(1);

  std::uint64_t seed = 12345;
  int threads = default_threads_from_env();
  app.add_option("--seed", seed, "Seed for every random choice (default 12345)");
  app.add_option("--threads", threads,
                 "Worker threads (0 = hardware default; env PBSTITCH_THREADS)");

  pbstitch::SynthOptions synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "Render a synthetic ground-truth dataset");
  cmd_synth->add_option("--scene", synth.scene_path, "Scene JSON file")->required();
  cmd_synth->add_option("--rig", synth.rig_path, "Rig calibration JSON file")->required();
  cmd_synth->add_option("--config", synth.config_path, "Stitch config JSON (K, s for panoramas)");
  cmd_synth->add_option("--frames", synth.frames, "Number of frames to render")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--out", synth.out_dir, "Output dataset directory")->required();

  pbstitch::StitchOptions stitch;
  CLI::App* cmd_stitch = app.add_subcommand("stitch", "Stitch a dataset into panoramas");
  cmd_stitch->add_option("--in", stitch.in_dir, "Input dataset directory")->required();
  cmd_stitch->add_option("--rig", stitch.rig_path, "Rig calibration JSON file")->required();
  cmd_stitch->add_option("--config", stitch.config_path, "Stitch config JSON file");
  cmd_stitch->add_option("--out", stitch.out_dir, "Output directory")->required();
  cmd_stitch->add_option("--mode", stitch.mode, "Pushbroom path: fast | naive")
      ->check(CLI::IsMember({"fast", "naive"}));
  cmd_stitch
      ->add_option("--flow-source", stitch.flow_source,
                   "estimate: run the flow estimator; files: use the dataset's flow_gt stream")
      ->check(CLI::IsMember({"estimate", "files"}));

  pbstitch::EvalOptions eval;
  CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate stitched frames against ground truth");
  cmd_eval->add_option("--stitched", eval.stitched_dir, "Directory of stitched frames")->required();
  cmd_eval->add_option("--gt", eval.gt_dir, "Directory of ground-truth panoramas")->required();
  cmd_eval->add_option("--out", eval.out_dir, "Report directory (default: stitched dir)");
  cmd_eval->add_option("--manifest", eval.manifest_path,
                       "Stitch manifest JSON (default: <stitched>/manifest.json when present)");
  cmd_eval->add_option("--occlusion-threshold", eval.occlusion_threshold,
                       "Forward-backward residual (px) above which pixels are occluded");
  cmd_eval->add_flag("--no-warp-error", eval.skip_warp_error,
                     "Skip the temporal warping error (faster)");

  pbstitch::BenchOptions bench;
  CLI::App* cmd_bench = app.add_subcommand("bench", "Time naive vs fast pushbroom interpolation");
  cmd_bench->add_option("--width", bench.width, "Frame width")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--height", bench.height, "Frame height")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--k-list", bench.slice_counts, "Comma-separated K values");
  cmd_bench->add_option("--s", bench.slice_width, "Slice width in pixels")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--reps", bench.reps, "Repetitions per timing (median reported)")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--refine", bench.refine, "Refinement mode: none | deterministic")
      ->check(CLI::IsMember({"none", "deterministic"}));
  cmd_bench->add_option("--out", bench.out_csv, "Optional CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pbstitch::kExitUsage;
  }

  pushbroom::set_thread_count(threads);
  bench.seed = seed;

  try {
    if (cmd_synth->parsed()) return pbstitch::run_synth(synth);
    if (cmd_stitch->parsed()) return pbstitch::run_stitch(stitch);
    if (cmd_eval->parsed()) return pbstitch::run_eval(eval);
    if (cmd_bench->parsed()) return pbstitch::run_bench(bench);
  } catch (const pushbroom::StitchError& e) {
    std::fprintf(stderr, "error (stitch): %s\n", e.what());
    return pbstitch::kExitStitch;
  } catch (const pushbroom::ParseError& e) {
    std::fprintf(stderr, "error (parse): %s\n", e.what());
    return pbstitch::kExitFormat;
  } catch (const pushbroom::FormatError& e) {
    std::fprintf(stderr, "error (format): %s\n", e.what());
    return pbstitch::kExitFormat;
  } catch (const pushbroom::IoError& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return pbstitch::kExitIo;
  } catch (const pushbroom::ContractError& e) {
    std::fprintf(stderr, "error (contract): %s\n", e.what());
    return pbstitch::kExitContract;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pbstitch::kExitInternal;
  }
  return pbstitch::kExitUsage;
}
