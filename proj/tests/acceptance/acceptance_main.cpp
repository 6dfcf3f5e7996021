// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Thresholds are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pushbroom/camera.hpp"
#include "pushbroom/dataset.hpp"
#include "pushbroom/flow.hpp"
#include "pushbroom/io.hpp"
#include "pushbroom/metrics.hpp"
#include "pushbroom/scene.hpp"
#include "pushbroom/stitch.hpp"
#include "pushbroom/timing.hpp"
#include "test_util.hpp"

using namespace pushbroom;

namespace {

struct CriterionResult {
  int id = 0;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

std::vector<CriterionResult> g_results;

void run_criterion(int id, const std::string& title,
                   const std::function<std::pair<bool, std::string>()>& body) {
  std::printf("criterion %2d: %s ...\n", id, title.c_str());
  std::fflush(stdout);
  CriterionResult result;
  result.id = id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto [pass, detail] = body();
    result.pass = pass;
    result.detail = detail;
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %2d: %s (%.1fs) — %s\n", id, result.pass ? "PASS" : "FAIL",
              result.seconds, result.detail.c_str());
  std::fflush(stdout);
  g_results.push_back(result);
}

SceneSpec load_asset_scene(const char* name) {
  return load_scene(std::filesystem::path(PBSTITCH_ASSETS_DIR) / "scenes" / name);
}

/// Transition-region column mask (both sides) intersected with validity.
Mask transition_mask(const Stitcher& stitcher, const Image& a, const Image& b) {
  const int w = a.width();
  const int h = a.height();
  const auto& tl = stitcher.left_transition();
  const auto [rb, re] = stitcher.right_transition_columns();
  Mask mask = Mask::full(w, h, false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool in_band = (x >= tl.boundary && x < tl.end()) || (x >= rb && x < re);
      mask.set(x, y, in_band && a.valid(x, y) && b.valid(x, y));
    }
  return mask;
}

struct QualityFixture {
  CameraRig rig;
  SceneSpec scene;
  Image left, mid, right;
  Image gt_pano;
  SideFlowPair left_flows, right_flows;

  QualityFixture(const CameraRig& r, const SceneSpec& s, int K, int slice_width, double time)
      : rig(r), scene(s) {
    left = render_view(scene, rig.left.intrinsics, rig.left.pose, time);
    mid = render_view(scene, rig.mid.intrinsics, rig.mid.pose, time);
    right = render_view(scene, rig.right.intrinsics, rig.right.pose, time);
    gt_pano = render_ground_truth_panorama(scene, rig, K, slice_width, time);
    left_flows = {analytic_flow(scene, rig.mid, rig.left, rig.cylinder, time).flow,
                  analytic_flow(scene, rig.left, rig.mid, rig.cylinder, time).flow};
    right_flows = {analytic_flow(scene, rig.mid, rig.right, rig.cylinder, time).flow,
                   analytic_flow(scene, rig.right, rig.mid, rig.cylinder, time).flow};
  }
};

double g_criterion4_psnr = 0.0;

std::pair<bool, std::string> criterion1_equivalence() {
  std::mt19937 rng(20240809);
  std::uniform_int_distribution<int> boundary_dist(0, 256 / 2 - 8 * 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Image a = make_test_texture(256, 128, 100 + trial, 3);
    const Image b = make_test_texture(256, 128, 5000 + trial, 3);
    const FlowField f_ab = make_smooth_flow(256, 128, 9000 + trial, 6.0f);
    const FlowField f_ba = make_smooth_flow(256, 128, 13000 + trial, 6.0f);
    TransitionSpec t;
    t.boundary = boundary_dist(rng);
    t.slice_count = 8;
    t.slice_width = 4;
    t.side = trial % 2 == 0 ? TransitionSide::kLeft : TransitionSide::kRight;
    StitchConfig cfg;
    cfg.slice_count = 8;
    cfg.slice_width = 4;
    cfg.refine = RefineMode::kNone;
    const Image fast = fast_pushbroom_half(a, b, f_ab, f_ba, t, cfg);
    const Image naive = naive_pushbroom_half(a, b, f_ab, f_ba, t, cfg);
    worst = std::max(worst, testutil::max_abs_diff(fast, naive, /*valid_only=*/false));
    for (int y = 0; y < fast.height(); ++y)
      for (int x = 0; x < fast.width(); ++x)
        if (fast.valid(x, y) != naive.valid(x, y)) worst = 1.0;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |fast - naive| = %.3g over 100 cases (limit 1e-6)", worst);
  return {worst <= 1e-6, buf};
}

std::pair<bool, std::string> criterion2_speedup() {
  PushbroomBenchSetup setup;
  setup.width = 1000;
  setup.height = 600;
  setup.slice_width = 2;
  setup.reps = 5;
  setup.warmup = 1;
  setup.refine = RefineMode::kNone;
  const auto rows = run_pushbroom_benchmark(setup, {100});
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "1000x600, K=100, s=2: naive %.1f ms, fast %.1f ms, speedup %.1fx (floor 10x)",
                rows[0].naive_ms, rows[0].fast_ms, rows[0].speedup);
  return {rows[0].speedup >= 10.0, buf};
}

std::pair<bool, std::string> criterion3_work_bound() {
  const Image a = make_test_texture(400, 200, 31, 3);
  const Image b = make_test_texture(400, 200, 32, 3);
  const FlowField f_ab = make_smooth_flow(400, 200, 33, 5.0f);
  const FlowField f_ba = make_smooth_flow(400, 200, 34, 5.0f);
  StitchConfig cfg;
  cfg.refine = RefineMode::kDeterministic;

  bool ok = true;
  std::string detail;
  for (const int k : {1, 8, 100}) {
    TransitionSpec t;
    t.boundary = 10;
    t.slice_count = k;
    t.slice_width = 1;
    cfg.slice_count = k;
    cfg.slice_width = 1;
    reset_warp_count();
    fast_pushbroom_half(a, b, f_ab, f_ba, t, cfg);
    const auto warps = warp_count();
    detail += "K=" + std::to_string(k) + ": " + std::to_string(warps) + " warps; ";
    ok = ok && warps == 2;
  }
  reset_warp_count();
  const CameraRig rig = default_rig();
  StitchConfig frame_cfg;
  frame_cfg.slice_count = 16;
  frame_cfg.slice_width = 2;
  const Stitcher stitcher(rig, frame_cfg);
  const Image frame = make_test_texture(900, 900, 35, 3);
  const SideFlowPair zero{FlowField::zeros(1000, 600), FlowField::zeros(1000, 600)};
  stitcher.stitch_with_flows(frame, frame, frame, zero, zero);
  const auto frame_warps = warp_count();
  detail += "full frame: " + std::to_string(frame_warps) + " warps (2 per side)";
  ok = ok && frame_warps == 4;
  return {ok, detail};
}

std::pair<bool, std::string> criterion4_analytic_quality() {
  const CameraRig rig = default_rig();
  const SceneSpec scene = load_asset_scene("two_planes.json");
  const QualityFixture fx(rig, scene, 100, 2, 0.0);

  StitchConfig cfg;
  cfg.slice_count = 100;
  cfg.slice_width = 2;
  cfg.refine = RefineMode::kDeterministic;
  const Stitcher stitcher(rig, cfg);
  const Image stitched =
      stitcher.stitch_with_flows(fx.left, fx.mid, fx.right, fx.left_flows, fx.right_flows);

  const Mask mask = transition_mask(stitcher, stitched, fx.gt_pano);
  const double p = psnr(stitched, fx.gt_pano, mask);
  const double s = ssim(stitched, fx.gt_pano, mask);
  g_criterion4_psnr = p;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "transition PSNR %.2f dB (floor 30), SSIM %.4f (floor 0.95), analytic flows", p, s);
  return {p >= 30.0 && s >= 0.95, buf};
}

std::pair<bool, std::string> criterion5_estimated_quality() {
  if (g_criterion4_psnr <= 0.0) return {false, "criterion 4 did not run"};
  const CameraRig rig = default_rig();
  const SceneSpec scene = load_asset_scene("two_planes.json");
  const QualityFixture fx(rig, scene, 100, 2, 0.0);

  StitchConfig cfg;
  cfg.slice_count = 100;
  cfg.slice_width = 2;
  cfg.refine = RefineMode::kDeterministic;
  const Stitcher stitcher(rig, cfg);
  const Image stitched = stitcher.stitch(fx.left, fx.mid, fx.right);

  const Mask mask = transition_mask(stitcher, stitched, fx.gt_pano);
  const double p = psnr(stitched, fx.gt_pano, mask);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "estimated-flow PSNR %.2f dB vs analytic %.2f dB (allowed drop 3 dB)", p,
                g_criterion4_psnr);
  return {p >= g_criterion4_psnr - 3.0, buf};
}

std::pair<bool, std::string> criterion6_temporal_stability() {
  CameraRig rig = default_rig();
  rig.cylinder.width = 640;
  rig.cylinder.height = 384;
  const SceneSpec scene = load_asset_scene("moving_box.json");

  StitchConfig cfg;
  cfg.slice_count = 100;
  cfg.slice_width = 1;  // narrower frame: keep K*s inside the overlap
  cfg.refine = RefineMode::kDeterministic;
  const Stitcher stitcher(rig, cfg);

  const int frames = 10;
  std::vector<Image> stitched;
  std::vector<Image> gt;
  for (int t = 0; t < frames; ++t) {
    const double time = t;
    const Image left = render_view(scene, rig.left.intrinsics, rig.left.pose, time);
    const Image mid = render_view(scene, rig.mid.intrinsics, rig.mid.pose, time);
    const Image right = render_view(scene, rig.right.intrinsics, rig.right.pose, time);
    stitched.push_back(stitcher.stitch(left, mid, right));
    gt.push_back(render_ground_truth_panorama(scene, rig, cfg.slice_count, cfg.slice_width, time));
  }

  FlowParams metric_flow;  // identical params for both sequences
  const WarpErrorReport e_stitched = warp_error(stitched, metric_flow, 1.0f);
  const WarpErrorReport e_gt = warp_error(gt, metric_flow, 1.0f);
  const double ratio = e_stitched.per_pair_mean / e_gt.per_pair_mean;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "E_warp per-pair mean: stitched %.3fe-4, ground truth %.3fe-4, ratio %.2f "
                "(limit 1.5)",
                e_stitched.per_pair_mean * 1e4, e_gt.per_pair_mean * 1e4, ratio);
  return {ratio <= 1.5, buf};
}

std::pair<bool, std::string> criterion7_metric_sanity() {
  const Image a = make_test_texture(96, 72, 41, 3);
  const Mask full = Mask::full(96, 72, true);
  bool ok = true;
  std::string detail;

  ok = ok && ssim(a, a, full) == 1.0;
  ok = ok && psnr(a, a, full) == kPsnrCapDb;

  const std::vector<Image> static_seq{a, a, a};
  const double e_static = warp_error(static_seq, FlowParams{}).sum;
  ok = ok && e_static <= 1e-6;

  // Masked-pixel independence.
  Image m1 = make_test_texture(64, 48, 42, 3);
  Image m2 = make_test_texture(64, 48, 43, 3);
  Mask mask = Mask::full(64, 48, true);
  for (int y = 4; y < 16; ++y)
    for (int x = 6; x < 30; ++x) mask.set(x, y, false);
  const double p_before = psnr(m1, m2, mask);
  const double s_before = ssim(m1, m2, mask);
  for (int y = 4; y < 16; ++y)
    for (int x = 6; x < 30; ++x)
      for (int c = 0; c < 3; ++c) m1.at(x, y, c) = 0.777f;
  ok = ok && psnr(m1, m2, mask) == p_before && ssim(m1, m2, mask) == s_before;

  detail = "ssim(a,a)=1, psnr cap, static E_warp " + std::to_string(e_static) +
           ", masked independence";
  return {ok, detail};
}

std::pair<bool, std::string> criterion8_flow_floor() {
  const auto [a1, b1] = testutil::translated_pair(128, 128, 4.0, 0.0, 71);
  const auto [a2, b2] = testutil::translated_pair(128, 128, 3.5, -2.25, 72);
  const double epe_int = testutil::mean_epe(estimate_flow(a1, b1, FlowParams{}), 4.0, 0.0, 16);
  const double epe_frac =
      testutil::mean_epe(estimate_flow(a2, b2, FlowParams{}), 3.5, -2.25, 16);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "mean EPE: integer shift %.3f px, fractional %.3f px (limit 0.5)",
                epe_int, epe_frac);
  return {epe_int <= 0.5 && epe_frac <= 0.5, buf};
}

std::pair<bool, std::string> criterion9_geometry() {
  bool ok = true;
  std::string detail;

  // Unproject/project round trips, both models.
  CameraIntrinsics ph;
  ph.focal = {240, 240};
  ph.principal = {159.5, 119.5};
  ph.width = 320;
  ph.height = 240;
  CameraIntrinsics fe = ph;
  fe.model = CameraModel::kEquidistantFisheye;
  fe.principal = {159.5, 159.5};
  fe.height = 320;
  fe.focal = {90, 90};
  fe.fisheye_fov = 170.0 * 3.14159265358979323846 / 180.0;
  double worst = 0.0;
  for (const CameraIntrinsics& intr : {ph, fe}) {
    for (int y = 0; y < intr.height; y += 5)
      for (int x = 0; x < intr.width; x += 5) {
        const Vec2 px{static_cast<double>(x), static_cast<double>(y)};
        const auto back = project(unproject(px, intr), intr);
        if (back) worst = std::max(worst, norm(*back - px));
      }
  }
  ok = ok && worst <= 1e-4;
  detail += "round trip " + std::to_string(worst) + " px; ";

  // Identity reprojection bit-exactness.
  Image img = make_test_texture(64, 40, 51, 3);
  ReprojectionMap identity;
  identity.width = 64;
  identity.height = 40;
  identity.source_width = 64;
  identity.source_height = 40;
  identity.source_coords.resize(2 * 64 * 40);
  identity.valid.assign(64 * 40, 1);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 64; ++x) {
      identity.source_coords[2 * identity.index(x, y)] = static_cast<float>(x);
      identity.source_coords[2 * identity.index(x, y) + 1] = static_cast<float>(y);
    }
  ok = ok && testutil::images_identical(apply_reprojection(img, identity), img);
  detail += "identity map bit-exact; ";

  // Rotational equivariance of sampled content.
  CameraIntrinsics intr;
  intr.focal = {150, 150};
  intr.principal = {127.5, 127.5};
  intr.width = 256;
  intr.height = 256;
  const CylinderSpec cyl{320, 140, 140.0 * 3.14159265358979323846 / 180.0, 0.4};
  const int shift_px = 12;
  const double dtheta = shift_px * cyl.horizontal_fov / cyl.width;
  const Image frame = make_test_texture(256, 256, 52, 3);
  const Image va =
      apply_reprojection(frame, build_reprojection_map(intr, {Mat3::identity(), {0, 0, 0}}, cyl));
  const Image vb = apply_reprojection(
      frame, build_reprojection_map(intr, {yaw_rotation(dtheta), {0, 0, 0}}, cyl));
  const double shift = testutil::estimate_column_shift(va, vb, 30);
  ok = ok && std::abs(shift - shift_px) <= 0.5;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "equivariance shift %.2f px (true %d)", shift, shift_px);
  detail += buf;
  return {ok, detail};
}

std::pair<bool, std::string> criterion10_formats() {
  testutil::TempDir tmp("acceptance_io");
  bool ok = true;

  // Flow round trip, bit-exact.
  const FlowField flow = make_smooth_flow(41, 29, 61, 4.0f);
  write_flow(tmp.path() / "f.flo", flow);
  const FlowField flow_back = read_flow(tmp.path() / "f.flo");
  ok = ok && flow_back.delta == flow.delta;

  // Frame round trip within 8-bit quantization, mask bit-exact.
  Image img = make_test_texture(47, 31, 62, 3);
  img.set_valid(3, 4, false);
  img.zero_invalid();
  write_frame(tmp.path() / "f.png", img);
  const Image img_back = read_frame(tmp.path() / "f.png");
  for (int y = 0; y < img.height() && ok; ++y)
    for (int x = 0; x < img.width() && ok; ++x) {
      ok = img_back.valid(x, y) == img.valid(x, y);
      if (!ok) break;
      for (int c = 0; c < 3; ++c) {
        if (std::abs(linear_to_srgb8(img.at(x, y, c)) - linear_to_srgb8(img_back.at(x, y, c))) > 1)
          ok = false;
      }
    }

  // Fuzzed parsers must never crash.
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> len_dist(0, 400);
  std::uniform_int_distribution<int> byte_dist(0, 255);
  int rejected = 0;
  for (int i = 0; i < 200; ++i) {
    std::string blob;
    const int n = len_dist(rng);
    for (int k = 0; k < n; ++k) blob.push_back(static_cast<char>(byte_dist(rng)));
    const auto path = tmp.path() / ("z" + std::to_string(i));
    testutil::write_file(path.string() + ".flo", blob);
    testutil::write_file(path.string() + ".png", blob);
    try {
      read_flow(path.string() + ".flo");
    } catch (const Error&) {
      ++rejected;
    }
    try {
      read_frame(path.string() + ".png");
    } catch (const Error&) {
      ++rejected;
    }
    try {
      parse_rig(blob);
    } catch (const Error&) {
      ++rejected;
    }
    try {
      parse_config(blob);
    } catch (const Error&) {
      ++rejected;
    }
  }
  ok = ok && rejected >= 790;  // essentially all 800 attempts rejected cleanly
  return {ok, "flow bit-exact, frame within quantization, " + std::to_string(rejected) +
                  "/800 fuzz inputs rejected with structured errors"};
}

}  // namespace

int main() {
  std::printf("pushbroom acceptance suite\n");
  run_criterion(1, "fast/naive oracle equivalence (refine=none)", criterion1_equivalence);
  run_criterion(2, "fast path speedup at 1000x600, K=100", criterion2_speedup);
  run_criterion(3, "work bound: 2 warps per side independent of K", criterion3_work_bound);
  run_criterion(4, "end-to-end quality with analytic flows", criterion4_analytic_quality);
  run_criterion(5, "end-to-end quality with estimated flows", criterion5_estimated_quality);
  run_criterion(6, "temporal stability on a moving-object sequence",
                criterion6_temporal_stability);
  run_criterion(7, "metric sanity", criterion7_metric_sanity);
  run_criterion(8, "flow estimator floor on global translations", criterion8_flow_floor);
  run_criterion(9, "geometry round trips and equivariance", criterion9_geometry);
  run_criterion(10, "format round trips and parser fuzzing", criterion10_formats);

  int failures = 0;
  std::printf("\nsummary:\n");
  for (const auto& r : g_results) {
    std::printf("  criterion %2d: %s\n", r.id, r.pass ? "PASS" : "FAIL");
    if (!r.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
