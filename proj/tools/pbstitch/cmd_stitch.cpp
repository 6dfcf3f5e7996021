#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "pushbroom/dataset.hpp"
#include "pushbroom/io.hpp"
#include "pushbroom/stitch.hpp"

namespace pbstitch {

namespace {

using nlohmann::json;
namespace pb = pushbroom;

json config_json(const pb::StitchConfig& cfg) {
  return json{
      {"K", cfg.slice_count},
      {"s", cfg.slice_width},
      {"refine", cfg.refine == pb::RefineMode::kNone ? "none" : "deterministic"},
      {"flow",
       {{"pyramid_levels", cfg.flow.pyramid_levels},
        {"scale_factor", cfg.flow.scale_factor},
        {"smoothness_alpha", cfg.flow.smoothness_alpha},
        {"iterations_per_level", cfg.flow.iterations_per_level},
        {"median_filter_radius", cfg.flow.median_filter_radius}}},
      {"transition",
       {{"allow_shrink", cfg.allow_shrink},
        {"flow_on_crops", cfg.flow_on_crops},
        {"crop_pad", cfg.crop_pad}}},
      {"visibility",
       {{"fb_tau", cfg.visibility.fb_tau},
        {"photo_beta", cfg.visibility.photo_beta},
        {"median_radius", cfg.visibility.median_radius}}},
  };
}

}  // namespace

int run_stitch(const StitchOptions& opts) {
  const pb::Dataset dataset = pb::Dataset::open(opts.in_dir);
  const pb::CameraRig rig = pb::load_rig(opts.rig_path);
  pb::StitchConfig cfg;
  if (!opts.config_path.empty()) cfg = pb::load_config(opts.config_path);
  cfg.path = opts.mode == "naive" ? pb::PushbroomPath::kNaive : pb::PushbroomPath::kFast;

  const bool use_flow_files = opts.flow_source == "files";
  if (use_flow_files && !dataset.has_flows) {
    throw pb::IoError("dataset has no flow_gt stream: " + opts.in_dir);
  }

  std::filesystem::create_directories(opts.out_dir);
  const pb::Stitcher stitcher(rig, cfg);
  if (stitcher.left_shrunk() || stitcher.right_shrunk()) {
    std::fprintf(stderr,
                 "warning: transition shrunk to fit the overlap "
                 "(left K=%d s=%d, right K=%d s=%d)\n",
                 stitcher.left_transition().slice_count, stitcher.left_transition().slice_width,
                 stitcher.right_transition().slice_count, stitcher.right_transition().slice_width);
  }

  json frames_log = json::array();
  for (int t = 0; t < dataset.frame_count; ++t) {
    const pb::Image left = pb::read_frame(dataset.layout.frame_path("left", t));
    const pb::Image mid = pb::read_frame(dataset.layout.frame_path("mid", t));
    const pb::Image right = pb::read_frame(dataset.layout.frame_path("right", t));

    pb::StitchStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    pb::Image pano;
    if (use_flow_files) {
      pb::SideFlowPair lf{pb::read_flow(dataset.layout.flow_path(t, pb::FlowKind::kLeftToMid)),
                          pb::read_flow(dataset.layout.flow_path(t, pb::FlowKind::kMidToLeft))};
      pb::SideFlowPair rf{pb::read_flow(dataset.layout.flow_path(t, pb::FlowKind::kRightToMid)),
                          pb::read_flow(dataset.layout.flow_path(t, pb::FlowKind::kMidToRight))};
      pano = stitcher.stitch_with_flows(left, mid, right, lf, rf, &stats);
    } else {
      pano = stitcher.stitch(left, mid, right, &stats);
    }
    const double total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    pb::write_frame(std::filesystem::path(opts.out_dir) / pb::DatasetLayout::frame_name(t), pano);
    std::printf("frame %06d: total %.1f ms (project %.1f, flow %.1f, pushbroom %.1f), %llu warps\n",
                t, total_ms, stats.project_ms, stats.flow_ms, stats.pushbroom_ms,
                static_cast<unsigned long long>(stats.warps));
    frames_log.push_back(json{{"index", t},
                              {"total_ms", total_ms},
                              {"project_ms", stats.project_ms},
                              {"flow_ms", stats.flow_ms},
                              {"pushbroom_ms", stats.pushbroom_ms},
                              {"warps", stats.warps}});
  }

  const auto right_cols = stitcher.right_transition_columns();
  json manifest{
      {"mode", opts.mode},
      {"flow_source", opts.flow_source},
      {"frame_count", dataset.frame_count},
      {"config", config_json(cfg)},
      {"cylinder",
       {{"width", rig.cylinder.width},
        {"height", rig.cylinder.height},
        {"horizontal_fov", rig.cylinder.horizontal_fov},
        {"vertical_extent", rig.cylinder.vertical_extent}}},
      {"transitions",
       {{"left",
         {{"begin", stitcher.left_transition().boundary},
          {"end", stitcher.left_transition().end()}}},
        {"right", {{"begin", right_cols.first}, {"end", right_cols.second}}}}},
      {"frames", frames_log},
  };
  std::ofstream manifest_out(std::filesystem::path(opts.out_dir) / "manifest.json");
  manifest_out << manifest.dump(2) << "\n";
  if (!manifest_out) throw pb::IoError("failed to write manifest.json in " + opts.out_dir);
  return 0;
}

}  // namespace pbstitch
