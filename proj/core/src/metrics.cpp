#include "pushbroom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pushbroom {

namespace {

// 11x11 Gaussian window, sigma 1.5 (the standard SSIM configuration).
constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> ssim_kernel() {
  std::vector<double> k(2 * kSsimRadius + 1);
  double sum = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    k[static_cast<size_t>(i + kSsimRadius)] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<size_t>(i + kSsimRadius)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable convolution of a double plane with the SSIM kernel; borders
/// never matter because only fully-valid windows are consumed.
std::vector<double> conv_separable(const std::vector<double>& in, int w, int h,
                                   const std::vector<double>& kernel) {
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  std::vector<double> tmp(in.size(), 0.0);
  std::vector<double> out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = std::clamp(x + i, 0, w - 1);
        acc += kernel[static_cast<size_t>(i + radius)] * in[static_cast<size_t>(y) * w + xx];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = std::clamp(y + i, 0, h - 1);
        acc += kernel[static_cast<size_t>(i + radius)] * tmp[static_cast<size_t>(yy) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b, const Mask& mask) {
  require(a.same_shape(b), "psnr: image shapes differ");
  require(mask.width == a.width() && mask.height == a.height(), "psnr: mask size mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!mask.at(x, y)) continue;
      ++n;
      for (int c = 0; c < a.channels(); ++c) {
        const double d = static_cast<double>(a.at(x, y, c)) - static_cast<double>(b.at(x, y, c));
        sum += d * d;
      }
    }
  }
  require(n > 0, "psnr: empty mask");
  const double mse = sum / (static_cast<double>(n) * a.channels());
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const Mask& mask) {
  require(a.same_shape(b), "ssim: image shapes differ");
  require(mask.width == a.width() && mask.height == a.height(), "ssim: mask size mismatch");
  const Image ga = to_gray(a);
  const Image gb = to_gray(b);
  const int w = a.width();
  const int h = a.height();

  std::vector<double> pa(static_cast<size_t>(w) * h), pb(pa.size()), paa(pa.size()),
      pbb(pa.size()), pab(pa.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<size_t>(y) * w + x;
      pa[i] = ga.at(x, y, 0);
      pb[i] = gb.at(x, y, 0);
      paa[i] = pa[i] * pa[i];
      pbb[i] = pb[i] * pb[i];
      pab[i] = pa[i] * pb[i];
    }

  const auto kernel = ssim_kernel();
  const auto mu_a = conv_separable(pa, w, h, kernel);
  const auto mu_b = conv_separable(pb, w, h, kernel);
  const auto m_aa = conv_separable(paa, w, h, kernel);
  const auto m_bb = conv_separable(pbb, w, h, kernel);
  const auto m_ab = conv_separable(pab, w, h, kernel);

  // Prefix sums of the mask decide which pixels own a fully valid window.
  std::vector<int> integral(static_cast<size_t>(w + 1) * (h + 1), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      integral[static_cast<size_t>(y + 1) * (w + 1) + (x + 1)] =
          (mask.at(x, y) ? 1 : 0) + integral[static_cast<size_t>(y) * (w + 1) + (x + 1)] +
          integral[static_cast<size_t>(y + 1) * (w + 1) + x] -
          integral[static_cast<size_t>(y) * (w + 1) + x];
    }
  auto window_full = [&](int x, int y) {
    const int x0 = x - kSsimRadius, x1 = x + kSsimRadius + 1;
    const int y0 = y - kSsimRadius, y1 = y + kSsimRadius + 1;
    if (x0 < 0 || y0 < 0 || x1 > w || y1 > h) return false;
    const int count = integral[static_cast<size_t>(y1) * (w + 1) + x1] -
                      integral[static_cast<size_t>(y0) * (w + 1) + x1] -
                      integral[static_cast<size_t>(y1) * (w + 1) + x0] +
                      integral[static_cast<size_t>(y0) * (w + 1) + x0];
    return count == (2 * kSsimRadius + 1) * (2 * kSsimRadius + 1);
  };

  double total = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!window_full(x, y)) continue;
      const std::size_t i = static_cast<size_t>(y) * w + x;
      const double var_a = m_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = m_bb[i] - mu_b[i] * mu_b[i];
      const double cov = m_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (var_a + var_b + kC2);
      total += num / den;
      ++n;
    }
  }
  require(n > 0, "ssim: no fully valid 11x11 window inside the mask");
  return total / static_cast<double>(n);
}

WarpErrorReport warp_error(const std::vector<Image>& frames, const FlowParams& flow_params,
                           float occlusion_threshold_px) {
  require(frames.size() >= 2, "warp_error: need at least 2 frames");
  for (size_t i = 1; i < frames.size(); ++i) {
    require(frames[i].same_shape(frames[0]), "warp_error: frame shapes differ");
  }

  // Canonicalize so values under invalid pixels can never leak into the
  // flow estimate or the residual.
  std::vector<Image> clean = frames;
  for (auto& f : clean) f.zero_invalid();

  WarpErrorReport report;
  for (size_t t = 0; t + 1 < clean.size(); ++t) {
    const Image& cur = clean[t];
    const Image& nxt = clean[t + 1];
    const FlowField fwd = estimate_flow(cur, nxt, flow_params);
    const FlowField bwd = estimate_flow(nxt, cur, flow_params);
    const Image warped = warp_backward(nxt, fwd);
    const Mask occl_free = fb_occlusion_free(fwd, bwd, occlusion_threshold_px);

    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < cur.height(); ++y) {
      for (int x = 0; x < cur.width(); ++x) {
        if (!cur.valid(x, y) || !warped.valid(x, y) || !occl_free.at(x, y)) continue;
        ++n;
        for (int c = 0; c < cur.channels(); ++c) {
          const double d =
              static_cast<double>(cur.at(x, y, c)) - static_cast<double>(warped.at(x, y, c));
          sum += d * d;
        }
      }
    }
    require(n > 0, "warp_error: empty valid mask for pair " + std::to_string(t));
    report.per_pair.push_back(sum / static_cast<double>(n));
  }
  for (double v : report.per_pair) report.sum += v;
  report.per_pair_mean = report.sum / static_cast<double>(report.per_pair.size());
  return report;
}

}  // namespace pushbroom
