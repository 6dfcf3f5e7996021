#include <doctest.h>

#include <cmath>
#include <random>

#include "pushbroom/flow.hpp"
#include "pushbroom/timing.hpp"
#include "test_util.hpp"

using namespace pushbroom;

namespace {

/// Independent scalar backward-warp oracle.
Image reference_warp(const Image& img, const FlowField& flow) {
  Image out(img.width(), img.height(), img.channels(), 0.0f, false);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!flow.is_valid(x, y)) continue;
      const float sx = x + flow.du(x, y);
      const float sy = y + flow.dv(x, y);
      if (sx < 0 || sy < 0 || sx > img.width() - 1 || sy > img.height() - 1) continue;
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const float fx = sx - x0;
      const float fy = sy - y0;
      const int x1 = fx > 0 ? x0 + 1 : x0;
      const int y1 = fy > 0 ? y0 + 1 : y0;
      if (!img.valid(x0, y0) || !img.valid(x1, y0) || !img.valid(x0, y1) || !img.valid(x1, y1))
        continue;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = (1 - fx) * (1 - fy) * img.at(x0, y0, c) +
                          fx * (1 - fy) * img.at(x1, y0, c) + (1 - fx) * fy * img.at(x0, y1, c) +
                          fx * fy * img.at(x1, y1, c);
      }
      out.set_valid(x, y, true);
    }
  }
  return out;
}

FlowField constant_flow(int w, int h, float du, float dv) {
  FlowField f = FlowField::zeros(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.du(x, y) = du;
      f.dv(x, y) = dv;
    }
  return f;
}

bool flows_identical(const FlowField& a, const FlowField& b) {
  if (a.width != b.width || a.height != b.height) return false;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (a.is_valid(x, y) != b.is_valid(x, y)) return false;
      if (a.du(x, y) != b.du(x, y) || a.dv(x, y) != b.dv(x, y)) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("warp_backward: zero flow is a bit-exact identity") {
  Image img = make_test_texture(80, 60, 11, 3);
  img.set_valid(5, 5, false);
  const Image out = warp_backward(img, FlowField::zeros(80, 60));
  CHECK(testutil::images_identical(out, img));
}

TEST_CASE("warp_backward: unit horizontal flow shifts columns") {
  const Image img = make_test_texture(64, 32, 12, 1);
  const Image out = warp_backward(img, constant_flow(64, 32, 1.0f, 0.0f));
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 63; ++x) {
      CHECK(out.at(x, y, 0) == img.at(x + 1, y, 0));
      CHECK(out.valid(x, y));
    }
    CHECK_FALSE(out.valid(63, y));  // sample falls outside
  }
}

TEST_CASE("warp_backward matches the scalar reference bit-exactly") {
  const Image img = make_test_texture(96, 72, 13, 3);
  const FlowField flow = make_smooth_flow(96, 72, 14, 4.5f);
  CHECK(testutil::images_identical(warp_backward(img, flow), reference_warp(img, flow)));
}

TEST_CASE("warp_backward: resolution mismatch is a contract error") {
  const Image img = make_test_texture(32, 32, 1, 1);
  CHECK_THROWS_AS(warp_backward(img, FlowField::zeros(16, 32)), ContractError);
}

TEST_CASE("scale_flow basics") {
  FlowField f = constant_flow(8, 4, 4.0f, -8.0f);
  const FlowField zero = scale_flow(f, 0.0);
  const FlowField same = scale_flow(f, 1.0);
  const FlowField quarter = scale_flow(f, 0.25);
  CHECK(zero.du(3, 2) == 0.0f);
  CHECK(zero.dv(3, 2) == 0.0f);
  CHECK(flows_identical(same, f));
  CHECK(quarter.du(3, 2) == doctest::Approx(1.0f));
  CHECK(quarter.dv(3, 2) == doctest::Approx(-2.0f));
  CHECK_THROWS_AS(scale_flow(f, 1.5), ContractError);
}

TEST_CASE("scale_flow is multiplicative within float tolerance") {
  const FlowField f = make_smooth_flow(40, 30, 15, 7.0f);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = dist(rng);
    const double b = dist(rng);
    const FlowField once = scale_flow(f, a * b);
    const FlowField twice = scale_flow(scale_flow(f, a), b);
    for (int y = 0; y < f.height; y += 3)
      for (int x = 0; x < f.width; x += 3) {
        CHECK(once.du(x, y) == doctest::Approx(twice.du(x, y)).epsilon(1e-5));
        CHECK(once.dv(x, y) == doctest::Approx(twice.dv(x, y)).epsilon(1e-5));
      }
  }
}

TEST_CASE("estimate_flow: identical frames give an exactly zero field") {
  const Image img = make_test_texture(96, 80, 21, 3);
  const FlowField flow = estimate_flow(img, img, FlowParams{});
  CHECK(testutil::mean_flow_magnitude(flow) <= 0.05);
  CHECK(testutil::mean_flow_magnitude(flow) == 0.0);
}

TEST_CASE("estimate_flow: integer translation recovered within 0.5 px") {
  const auto [a, b] = testutil::translated_pair(128, 128, 4.0, 0.0, 31);
  const FlowField flow = estimate_flow(a, b, FlowParams{});
  CHECK(testutil::mean_epe(flow, 4.0, 0.0, 16) <= 0.5);
}

TEST_CASE("estimate_flow: fractional translation recovered within 0.5 px") {
  const auto [a, b] = testutil::translated_pair(128, 128, 3.5, -2.25, 32);
  const FlowField flow = estimate_flow(a, b, FlowParams{});
  CHECK(testutil::mean_epe(flow, 3.5, -2.25, 16) <= 0.5);
}

TEST_CASE("estimate_flow is deterministic") {
  const auto [a, b] = testutil::translated_pair(96, 96, 2.5, 1.0, 33);
  const FlowField f1 = estimate_flow(a, b, FlowParams{});
  const FlowField f2 = estimate_flow(a, b, FlowParams{});
  CHECK(flows_identical(f1, f2));
}

TEST_CASE("estimate_flow: resolution mismatch is a contract error") {
  CHECK_THROWS_AS(
      estimate_flow(Image(32, 32, 1), Image(32, 16, 1), FlowParams{}), ContractError);
}

TEST_CASE("fb_consistency: mutually inverse constant flows are fully consistent") {
  const FlowField ab = constant_flow(64, 48, 3.0f, 2.0f);
  const FlowField ba = constant_flow(64, 48, -3.0f, -2.0f);
  const Image conf = fb_consistency(ab, ba, 1.0f);
  for (int y = 8; y < 40; ++y)
    for (int x = 8; x < 56; ++x) CHECK(conf.at(x, y, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fb_consistency: a 10 px inconsistency at tau=1 gives ~zero confidence") {
  const FlowField ab = constant_flow(64, 48, 10.0f, 0.0f);
  const FlowField ba = FlowField::zeros(64, 48);
  const Image conf = fb_consistency(ab, ba, 1.0f);
  CHECK(conf.at(20, 20, 0) <= 1e-30);
}

TEST_CASE("fb_occlusion_free thresholds the residual") {
  const FlowField ab = constant_flow(32, 32, 2.0f, 0.0f);
  FlowField ba = constant_flow(32, 32, -2.0f, 0.0f);
  for (int y = 0; y < 32; ++y) ba.du(20, y) = 3.0f;  // inconsistent column
  const Mask free = fb_occlusion_free(ab, ba, 1.0f);
  CHECK(free.at(5, 16));
  CHECK_FALSE(free.at(18, 16));  // lands on the bad column after +2
}

TEST_CASE("weighted_median_filter removes impulse outliers") {
  FlowField f = constant_flow(32, 32, 2.0f, -1.0f);
  f.du(16, 16) = 50.0f;
  f.dv(16, 16) = -50.0f;
  const Image guide(32, 32, 1, 0.5f);
  const FlowField filtered = weighted_median_filter(f, guide, 2);
  CHECK(filtered.du(16, 16) == doctest::Approx(2.0f));
  CHECK(filtered.dv(16, 16) == doctest::Approx(-1.0f));
}

TEST_CASE("flip_horizontal on flows is an involution") {
  const FlowField f = make_smooth_flow(33, 17, 44, 3.0f);
  CHECK(flows_identical(flip_horizontal(flip_horizontal(f)), f));
}

TEST_CASE("warp counter counts warp_backward invocations") {
  const Image img = make_test_texture(16, 16, 50, 1);
  const FlowField f = FlowField::zeros(16, 16);
  reset_warp_count();
  warp_backward(img, f);
  warp_backward(img, f);
  CHECK(warp_count() == 2);
  reset_warp_count();
  CHECK(warp_count() == 0);
}
