#include <doctest.h>

#include <cmath>
#include <random>

#include "pushbroom/metrics.hpp"
#include "pushbroom/timing.hpp"
#include "test_util.hpp"

using namespace pushbroom;

namespace {

Image constant_image(int w, int h, float v) { return Image(w, h, 3, v); }

std::vector<Image> translating_sequence(int frames, double step) {
  const Image big = testutil::big_texture(220, 180, 77);
  std::vector<Image> seq;
  for (int t = 0; t < frames; ++t) {
    seq.push_back(testutil::crop_at(big, 30 - step * t, 30, 160, 120));
  }
  return seq;
}

}  // namespace

TEST_CASE("psnr: identical images report the 99 dB cap") {
  const Image a = make_test_texture(64, 48, 7, 3);
  CHECK(psnr(a, a, Mask::full(64, 48, true)) == kPsnrCapDb);
}

TEST_CASE("psnr: constant 0.1 difference gives 20 dB") {
  const Image a = constant_image(32, 32, 0.5f);
  const Image b = constant_image(32, 32, 0.6f);
  CHECK(psnr(a, b, Mask::full(32, 32, true)) == doctest::Approx(20.0).epsilon(1e-4));
}

TEST_CASE("psnr: inverted binary checker gives 0 dB") {
  Image a(32, 32, 3, 0.0f);
  Image b(32, 32, 3, 0.0f);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const float v = ((x + y) % 2 == 0) ? 1.0f : 0.0f;
      for (int c = 0; c < 3; ++c) {
        a.at(x, y, c) = v;
        b.at(x, y, c) = 1.0f - v;
      }
    }
  CHECK(psnr(a, b, Mask::full(32, 32, true)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("psnr: empty mask is a contract error") {
  const Image a = constant_image(8, 8, 0.5f);
  CHECK_THROWS_AS(psnr(a, a, Mask::full(8, 8, false)), ContractError);
}

TEST_CASE("psnr is symmetric") {
  const Image a = make_test_texture(48, 48, 8, 3);
  const Image b = make_test_texture(48, 48, 9, 3);
  const Mask m = Mask::full(48, 48, true);
  CHECK(psnr(a, b, m) == psnr(b, a, m));
}

TEST_CASE("ssim: identical images give exactly 1") {
  const Image a = make_test_texture(64, 64, 10, 3);
  CHECK(ssim(a, a, Mask::full(64, 64, true)) == 1.0);
}

TEST_CASE("ssim: constant images match the closed form") {
  const Image a = constant_image(48, 48, 0.5f);
  const Image b = constant_image(48, 48, 0.6f);
  const double mu1 = 0.5, mu2 = 0.6, c1 = 1e-4;
  const double expected = (2 * mu1 * mu2 + c1) / (mu1 * mu1 + mu2 * mu2 + c1);
  CHECK(ssim(a, b, Mask::full(48, 48, true)) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("ssim: independent noise images decorrelate") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image a(256, 256, 1);
  Image b(256, 256, 1);
  for (auto& v : a.data()) v = dist(rng);
  for (auto& v : b.data()) v = dist(rng);
  CHECK(std::abs(ssim(a, b, Mask::full(256, 256, true))) <= 0.1);
}

TEST_CASE("ssim is symmetric and errors on an all-masked input") {
  const Image a = make_test_texture(48, 48, 12, 3);
  const Image b = make_test_texture(48, 48, 13, 3);
  const Mask m = Mask::full(48, 48, true);
  CHECK(ssim(a, b, m) == ssim(b, a, m));
  CHECK_THROWS_AS(ssim(a, b, Mask::full(48, 48, false)), ContractError);
}

TEST_CASE("warp_error: static sequences score (near) zero") {
  const Image frame = make_test_texture(96, 72, 14, 3);
  const std::vector<Image> seq{frame, frame, frame};
  const WarpErrorReport report = warp_error(seq, FlowParams{});
  CHECK(report.per_pair.size() == 2);
  CHECK(report.sum <= 1e-6);
  CHECK(report.per_pair_mean <= 1e-6);
}

TEST_CASE("warp_error: global translation is compensated by the flow") {
  const auto seq = translating_sequence(4, 1.5);
  const WarpErrorReport report = warp_error(seq, FlowParams{});
  CHECK(report.per_pair_mean <= 5e-4);
}

TEST_CASE("warp_error: fewer than two frames is a contract error") {
  const std::vector<Image> seq{make_test_texture(32, 32, 15, 3)};
  CHECK_THROWS_AS(warp_error(seq, FlowParams{}), ContractError);
}

TEST_CASE("masked pixels never influence any metric") {
  Image a = make_test_texture(72, 56, 16, 3);
  Image b = make_test_texture(72, 56, 17, 3);
  Mask mask = Mask::full(72, 56, true);
  for (int y = 10; y < 22; ++y)
    for (int x = 30; x < 52; ++x) {
      mask.set(x, y, false);
      a.set_valid(x, y, false);
      b.set_valid(x, y, false);
    }

  const double psnr_before = psnr(a, b, mask);
  const double ssim_before = ssim(a, b, mask);
  const std::vector<Image> seq_before{a, b, a};
  const WarpErrorReport warp_before = warp_error(seq_before, FlowParams{});

  // Scribble over the masked-out region.
  Image a2 = a;
  Image b2 = b;
  for (int y = 10; y < 22; ++y)
    for (int x = 30; x < 52; ++x)
      for (int c = 0; c < 3; ++c) {
        a2.at(x, y, c) = 0.123f * static_cast<float>(c + 1);
        b2.at(x, y, c) = 0.987f - 0.1f * static_cast<float>(c);
      }

  CHECK(psnr(a2, b2, mask) == psnr_before);
  CHECK(ssim(a2, b2, mask) == ssim_before);
  const std::vector<Image> seq_after{a2, b2, a2};
  const WarpErrorReport warp_after = warp_error(seq_after, FlowParams{});
  CHECK(warp_after.per_pair == warp_before.per_pair);
}
