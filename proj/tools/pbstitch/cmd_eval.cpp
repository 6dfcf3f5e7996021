#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "pushbroom/dataset.hpp"
#include "pushbroom/io.hpp"
#include "pushbroom/metrics.hpp"

namespace pbstitch {

namespace {

using nlohmann::json;
namespace pb = pushbroom;

std::vector<pb::Image> read_sequence(const std::filesystem::path& dir) {
  std::vector<pb::Image> frames;
  for (int t = 0;; ++t) {
    const auto path = dir / pb::DatasetLayout::frame_name(t);
    if (!std::filesystem::exists(path)) break;
    frames.push_back(pb::read_frame(path));
  }
  if (frames.empty()) throw pb::IoError("no frames (000000.png ...) found in " + dir.string());
  return frames;
}

struct TransitionColumns {
  int left_begin = 0, left_end = 0, right_begin = 0, right_end = 0;
};

std::optional<TransitionColumns> read_manifest_transitions(const std::filesystem::path& path,
                                                           json* config_echo,
                                                           json* cylinder_echo) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  json m = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (m.is_discarded() || !m.contains("transitions")) {
    throw pb::ParseError("invalid stitch manifest: " + path.string());
  }
  TransitionColumns t;
  t.left_begin = m["transitions"]["left"]["begin"].get<int>();
  t.left_end = m["transitions"]["left"]["end"].get<int>();
  t.right_begin = m["transitions"]["right"]["begin"].get<int>();
  t.right_end = m["transitions"]["right"]["end"].get<int>();
  if (config_echo && m.contains("config")) *config_echo = m["config"];
  if (cylinder_echo && m.contains("cylinder")) *cylinder_echo = m["cylinder"];
  return t;
}

pb::Mask transition_mask(const pb::Mask& base, const TransitionColumns& t) {
  pb::Mask out = pb::Mask::full(base.width, base.height, false);
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      const bool in_band = (x >= t.left_begin && x < t.left_end) ||
                           (x >= t.right_begin && x < t.right_end);
      out.set(x, y, in_band && base.at(x, y));
    }
  }
  return out;
}

}  // namespace

int run_eval(const EvalOptions& opts) {
  const std::vector<pb::Image> stitched = read_sequence(opts.stitched_dir);
  const std::vector<pb::Image> gt = read_sequence(opts.gt_dir);
  if (stitched.size() != gt.size()) {
    throw pb::ContractError("frame count mismatch: stitched has " +
                            std::to_string(stitched.size()) + ", ground truth has " +
                            std::to_string(gt.size()));
  }

  const std::filesystem::path out_dir(opts.out_dir.empty() ? opts.stitched_dir : opts.out_dir);
  std::filesystem::create_directories(out_dir);

  const std::filesystem::path manifest_path =
      opts.manifest_path.empty() ? std::filesystem::path(opts.stitched_dir) / "manifest.json"
                                 : std::filesystem::path(opts.manifest_path);
  json config_echo;
  json cylinder_echo;
  pb::FlowParams warp_flow_params;
  const auto transitions = read_manifest_transitions(manifest_path, &config_echo, &cylinder_echo);
  if (!config_echo.is_null() && config_echo.contains("flow")) {
    const auto& f = config_echo["flow"];
    warp_flow_params.pyramid_levels = f.value("pyramid_levels", warp_flow_params.pyramid_levels);
    warp_flow_params.scale_factor = f.value("scale_factor", warp_flow_params.scale_factor);
    warp_flow_params.smoothness_alpha =
        f.value("smoothness_alpha", warp_flow_params.smoothness_alpha);
    warp_flow_params.iterations_per_level =
        f.value("iterations_per_level", warp_flow_params.iterations_per_level);
    warp_flow_params.median_filter_radius =
        f.value("median_filter_radius", warp_flow_params.median_filter_radius);
  }

  std::vector<double> psnr_series, ssim_series, psnr_tr_series, ssim_tr_series;
  for (size_t t = 0; t < stitched.size(); ++t) {
    const pb::Mask mask = pb::mask_and(stitched[t].mask(), gt[t].mask());
    psnr_series.push_back(pb::psnr(stitched[t], gt[t], mask));
    ssim_series.push_back(pb::ssim(stitched[t], gt[t], mask));
    if (transitions) {
      const pb::Mask tmask = transition_mask(mask, *transitions);
      psnr_tr_series.push_back(pb::psnr(stitched[t], gt[t], tmask));
      ssim_tr_series.push_back(pb::ssim(stitched[t], gt[t], tmask));
    }
  }

  pb::WarpErrorReport warp_stitched, warp_gt;
  const bool have_warp = !opts.skip_warp_error && stitched.size() >= 2;
  if (have_warp) {
    warp_stitched = pb::warp_error(stitched, warp_flow_params,
                                   static_cast<float>(opts.occlusion_threshold));
    warp_gt = pb::warp_error(gt, warp_flow_params, static_cast<float>(opts.occlusion_threshold));
  }

  // Line-oriented CSV: one row per frame; the pairwise warp error on row t
  // covers the pair (t, t+1) and is empty on the last row.
  std::ofstream csv(out_dir / "report.csv");
  csv << "frame,psnr_db,ssim";
  if (transitions) csv << ",psnr_transition_db,ssim_transition";
  csv << ",pair_warp_error\n";
  for (size_t t = 0; t < stitched.size(); ++t) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f", t, psnr_series[t], ssim_series[t]);
    csv << buf;
    if (transitions) {
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", psnr_tr_series[t], ssim_tr_series[t]);
      csv << buf;
    }
    if (have_warp && t + 1 < stitched.size()) {
      std::snprintf(buf, sizeof(buf), ",%.8g", warp_stitched.per_pair[t]);
      csv << buf;
    } else {
      csv << ",";
    }
    csv << "\n";
  }
  if (!csv) throw pb::IoError("failed to write report.csv in " + out_dir.string());

  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };

  json summary{
      {"frame_count", stitched.size()},
      {"psnr_db", {{"mean", mean(psnr_series)}, {"series", psnr_series}}},
      {"ssim", {{"mean", mean(ssim_series)}, {"series", ssim_series}}},
  };
  if (transitions) {
    summary["psnr_transition_db"] = {{"mean", mean(psnr_tr_series)}, {"series", psnr_tr_series}};
    summary["ssim_transition"] = {{"mean", mean(ssim_tr_series)}, {"series", ssim_tr_series}};
    summary["transitions"] = {{"left", {{"begin", transitions->left_begin},
                                        {"end", transitions->left_end}}},
                              {"right", {{"begin", transitions->right_begin},
                                         {"end", transitions->right_end}}}};
  }
  if (have_warp) {
    summary["e_warp_stitched"] = {{"sum", warp_stitched.sum},
                                  {"per_pair_mean", warp_stitched.per_pair_mean},
                                  {"per_pair", warp_stitched.per_pair}};
    summary["e_warp_gt"] = {{"sum", warp_gt.sum},
                            {"per_pair_mean", warp_gt.per_pair_mean},
                            {"per_pair", warp_gt.per_pair}};
    summary["e_warp_ratio_stitched_over_gt"] =
        warp_gt.per_pair_mean > 0 ? warp_stitched.per_pair_mean / warp_gt.per_pair_mean : 0.0;
    summary["occlusion_threshold_px"] = opts.occlusion_threshold;
  }
  if (!config_echo.is_null()) summary["stitch_config"] = config_echo;
  if (!cylinder_echo.is_null()) summary["cylinder"] = cylinder_echo;

  std::ofstream js(out_dir / "report.json");
  js << summary.dump(2) << "\n";
  if (!js) throw pb::IoError("failed to write report.json in " + out_dir.string());

  std::printf("frames: %zu\n", stitched.size());
  std::printf("psnr: %.2f dB   ssim: %.4f\n", mean(psnr_series), mean(ssim_series));
  if (transitions) {
    std::printf("transition psnr: %.2f dB   transition ssim: %.4f\n", mean(psnr_tr_series),
                mean(ssim_tr_series));
  }
  if (have_warp) {
    std::printf("E_warp (stitched): sum %.4f x10^-4, per-pair mean %.4f x10^-4\n",
                warp_stitched.sum * 1e4, warp_stitched.per_pair_mean * 1e4);
    std::printf("E_warp (ground truth): sum %.4f x10^-4, per-pair mean %.4f x10^-4\n",
                warp_gt.sum * 1e4, warp_gt.per_pair_mean * 1e4);
  }
  return 0;
}

}  // namespace pbstitch
