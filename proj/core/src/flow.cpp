#include "pushbroom/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>

#include "pushbroom/parallel.hpp"

namespace pushbroom {

namespace {

std::atomic<std::uint64_t> g_warp_count{0};

constexpr float kLargeResidualSq = 1e12f;
constexpr int kJacobiSweeps = 30;
constexpr double kSourceBlurSigma = 0.8;
constexpr float kGuideSigma = 0.07f;

/// Bilinear read of a flow field; false when outside the grid or any
/// contributing pixel is invalid.
bool sample_flow(const FlowField& f, float sx, float sy, float* du, float* dv) {
  const int w = f.width;
  const int h = f.height;
  if (!(sx >= 0.0f && sy >= 0.0f && sx <= static_cast<float>(w - 1) &&
        sy <= static_cast<float>(h - 1))) {
    return false;
  }
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const float fx = sx - static_cast<float>(x0);
  const float fy = sy - static_cast<float>(y0);
  const int x1 = fx > 0.0f ? x0 + 1 : x0;
  const int y1 = fy > 0.0f ? y0 + 1 : y0;
  if (!f.is_valid(x0, y0) || !f.is_valid(x1, y0) || !f.is_valid(x0, y1) || !f.is_valid(x1, y1)) {
    return false;
  }
  const float w00 = (1 - fx) * (1 - fy);
  const float w10 = fx * (1 - fy);
  const float w01 = (1 - fx) * fy;
  const float w11 = fx * fy;
  *du = w00 * f.du(x0, y0) + w10 * f.du(x1, y0) + w01 * f.du(x0, y1) + w11 * f.du(x1, y1);
  *dv = w00 * f.dv(x0, y0) + w10 * f.dv(x1, y0) + w01 * f.dv(x0, y1) + w11 * f.dv(x1, y1);
  return true;
}

struct Pyramid {
  std::vector<Image> levels;  // grayscale, finest first
};

Pyramid build_pyramid(const Image& gray, int level_count, float scale_factor) {
  Pyramid p;
  p.levels.push_back(gaussian_blur(gray, kSourceBlurSigma));
  const double inter_level_sigma = 0.5 * std::sqrt(1.0 / (scale_factor * scale_factor) - 1.0);
  for (int l = 1; l < level_count; ++l) {
    const Image& prev = p.levels.back();
    const int w = std::max(8, static_cast<int>(std::lround(prev.width() * scale_factor)));
    const int h = std::max(8, static_cast<int>(std::lround(prev.height() * scale_factor)));
    p.levels.push_back(resize_bilinear(gaussian_blur(prev, inter_level_sigma), w, h));
  }
  return p;
}

int auto_level_count(int width, int height, float scale_factor) {
  int levels = 1;
  double dim = std::min(width, height);
  while (dim * scale_factor >= 24.0 && levels < 10) {
    dim *= scale_factor;
    ++levels;
  }
  return levels;
}

FlowField upsample_flow(const FlowField& f, int new_w, int new_h) {
  Image packed(f.width, f.height, 2);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      packed.at(x, y, 0) = f.du(x, y);
      packed.at(x, y, 1) = f.dv(x, y);
    }
  const Image resized = resize_bilinear(packed, new_w, new_h);
  FlowField out = FlowField::zeros(new_w, new_h);
  const float su = static_cast<float>(new_w) / static_cast<float>(f.width);
  const float sv = static_cast<float>(new_h) / static_cast<float>(f.height);
  for (int y = 0; y < new_h; ++y)
    for (int x = 0; x < new_w; ++x) {
      out.du(x, y) = resized.at(x, y, 0) * su;
      out.dv(x, y) = resized.at(x, y, 1) * sv;
    }
  return out;
}

/// One Horn-Schunck solve at a fixed pyramid level: the data term is
/// linearized at the current flow (used to warp b), then Jacobi sweeps
/// relax the combined data + smoothness system.
void hs_iterate(const Image& a, const Image& b, FlowField& flow, float alpha) {
  const int w = a.width();
  const int h = a.height();
  const float alpha2 = alpha * alpha;

  // Warp b toward a with the current flow.
  Image bw(w, h, 1, 0.0f, false);
  parallel_for(0, h, [&](int y) {
    float v;
    for (int x = 0; x < w; ++x) {
      const float sx = static_cast<float>(x) + flow.du(x, y);
      const float sy = static_cast<float>(y) + flow.dv(x, y);
      if (bilinear_sample(b, sx, sy, &v)) {
        bw.at(x, y, 0) = v;
        bw.set_valid(x, y, true);
      }
    }
  });

  std::vector<float> ix(static_cast<size_t>(w) * h), iy(ix.size()), it(ix.size()), cterm(ix.size());
  std::vector<std::uint8_t> dataw(ix.size());
  parallel_for(0, h, [&](int y) {
    const int ym = std::max(0, y - 1);
    const int yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1);
      const int xp = std::min(w - 1, x + 1);
      const std::size_t i = static_cast<size_t>(y) * w + x;
      const float gax = 0.5f * (a.at(xp, y, 0) - a.at(xm, y, 0));
      const float gay = 0.5f * (a.at(x, yp, 0) - a.at(x, ym, 0));
      const float gbx = 0.5f * (bw.at(xp, y, 0) - bw.at(xm, y, 0));
      const float gby = 0.5f * (bw.at(x, yp, 0) - bw.at(x, ym, 0));
      ix[i] = 0.5f * (gax + gbx);
      iy[i] = 0.5f * (gay + gby);
      it[i] = bw.at(x, y, 0) - a.at(x, y, 0);
      dataw[i] = (a.valid(x, y) && bw.valid(x, y)) ? 1 : 0;
      cterm[i] = it[i] - ix[i] * flow.du(x, y) - iy[i] * flow.dv(x, y);
    }
  });

  std::vector<float> u(ix.size()), v(ix.size()), u2(ix.size()), v2(ix.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<size_t>(y) * w + x;
      u[i] = flow.du(x, y);
      v[i] = flow.dv(x, y);
    }

  for (int sweep = 0; sweep < kJacobiSweeps; ++sweep) {
    parallel_for(0, h, [&](int y) {
      const int ym = std::max(0, y - 1);
      const int yp = std::min(h - 1, y + 1);
      for (int x = 0; x < w; ++x) {
        const int xm = std::max(0, x - 1);
        const int xp = std::min(w - 1, x + 1);
        const std::size_t i = static_cast<size_t>(y) * w + x;
        const float ubar = 0.25f * (u[static_cast<size_t>(y) * w + xm] +
                                    u[static_cast<size_t>(y) * w + xp] +
                                    u[static_cast<size_t>(ym) * w + x] +
                                    u[static_cast<size_t>(yp) * w + x]);
        const float vbar = 0.25f * (v[static_cast<size_t>(y) * w + xm] +
                                    v[static_cast<size_t>(y) * w + xp] +
                                    v[static_cast<size_t>(ym) * w + x] +
                                    v[static_cast<size_t>(yp) * w + x]);
        if (dataw[i]) {
          const float denom = alpha2 + ix[i] * ix[i] + iy[i] * iy[i];
          const float r = (ix[i] * ubar + iy[i] * vbar + cterm[i]) / denom;
          u2[i] = ubar - ix[i] * r;
          v2[i] = vbar - iy[i] * r;
        } else {
          u2[i] = ubar;
          v2[i] = vbar;
        }
      }
    });
    std::swap(u, u2);
    std::swap(v, v2);
  }

  const float limit = static_cast<float>(std::max(w, h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<size_t>(y) * w + x;
      flow.du(x, y) = std::clamp(u[i], -limit, limit);
      flow.dv(x, y) = std::clamp(v[i], -limit, limit);
    }
}

}  // namespace

FlowField FlowField::zeros(int width, int height, bool valid) {
  FlowField f;
  f.width = width;
  f.height = height;
  f.delta.assign(2 * static_cast<size_t>(width) * static_cast<size_t>(height), 0.0f);
  f.valid.assign(static_cast<size_t>(width) * static_cast<size_t>(height), valid ? 1 : 0);
  return f;
}

void FlowParams::validate() const {
  require(pyramid_levels >= 0, "flow params: pyramid_levels must be >= 0");
  require(scale_factor > 0.0f && scale_factor < 1.0f, "flow params: scale_factor must be in (0,1)");
  require(iterations_per_level >= 1, "flow params: iterations_per_level must be >= 1");
  require(smoothness_alpha > 0.0f, "flow params: smoothness_alpha must be positive");
  require(median_filter_radius >= 0, "flow params: median_filter_radius must be >= 0");
}

FlowField weighted_median_filter(const FlowField& flow, const Image& guide, int radius) {
  require(guide.width() == flow.width && guide.height() == flow.height,
          "weighted_median_filter: guide size mismatch");
  require(guide.channels() == 1, "weighted_median_filter: guide must be single channel");
  if (radius <= 0) return flow;
  FlowField out = flow;
  const int w = flow.width;
  const int h = flow.height;
  parallel_for(0, h, [&](int y) {
    std::vector<std::pair<float, float>> samples;  // (value, weight)
    samples.reserve(static_cast<size_t>((2 * radius + 1) * (2 * radius + 1)));
    for (int x = 0; x < w; ++x) {
      if (!flow.is_valid(x, y)) continue;
      const float gc = guide.at(x, y, 0);
      for (int channel = 0; channel < 2; ++channel) {
        samples.clear();
        float total = 0.0f;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -radius; dx <= radius; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w || !flow.is_valid(xx, yy)) continue;
            const float dg = guide.at(xx, yy, 0) - gc;
            const float weight = std::exp(-(dg * dg) / (2.0f * kGuideSigma * kGuideSigma)) + 1e-4f;
            const float value = channel == 0 ? flow.du(xx, yy) : flow.dv(xx, yy);
            samples.emplace_back(value, weight);
            total += weight;
          }
        }
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        float acc = 0.0f;
        float median = samples.back().first;
        for (const auto& [value, weight] : samples) {
          acc += weight;
          if (acc >= 0.5f * total) {
            median = value;
            break;
          }
        }
        (channel == 0 ? out.du(x, y) : out.dv(x, y)) = median;
      }
    }
  });
  return out;
}

FlowField estimate_flow(const Image& a, const Image& b, const FlowParams& params) {
  require(a.width() == b.width() && a.height() == b.height(),
          "estimate_flow: resolution mismatch");
  params.validate();

  const Image gray_a = to_gray(a);
  const Image gray_b = to_gray(b);
  const int levels = params.pyramid_levels > 0
                         ? params.pyramid_levels
                         : auto_level_count(a.width(), a.height(), params.scale_factor);
  const Pyramid pa = build_pyramid(gray_a, levels, params.scale_factor);
  const Pyramid pb = build_pyramid(gray_b, levels, params.scale_factor);

  FlowField flow = FlowField::zeros(pa.levels.back().width(), pa.levels.back().height());
  for (int level = levels - 1; level >= 0; --level) {
    const Image& la = pa.levels[static_cast<size_t>(level)];
    const Image& lb = pb.levels[static_cast<size_t>(level)];
    if (flow.width != la.width() || flow.height != la.height()) {
      flow = upsample_flow(flow, la.width(), la.height());
    }
    for (int iter = 0; iter < params.iterations_per_level; ++iter) {
      hs_iterate(la, lb, flow, params.smoothness_alpha);
    }
    if (params.median_filter_radius > 0) {
      flow = weighted_median_filter(flow, la, params.median_filter_radius);
    }
  }
  return flow;
}

Image warp_backward(const Image& img, const FlowField& flow) {
  require(img.width() == flow.width && img.height() == flow.height,
          "warp_backward: resolution mismatch");
  g_warp_count.fetch_add(1, std::memory_order_relaxed);
  Image out(img.width(), img.height(), img.channels(), 0.0f, false);
  parallel_for(0, img.height(), [&](int y) {
    float sample[8];
    for (int x = 0; x < img.width(); ++x) {
      if (!flow.is_valid(x, y)) continue;
      const float sx = static_cast<float>(x) + flow.du(x, y);
      const float sy = static_cast<float>(y) + flow.dv(x, y);
      if (bilinear_sample(img, sx, sy, sample)) {
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = sample[c];
        out.set_valid(x, y, true);
      }
    }
  });
  return out;
}

FlowField scale_flow(const FlowField& flow, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "scale_flow: alpha must lie in [0,1]");
  FlowField out = flow;
  const float a = static_cast<float>(alpha);
  for (auto& d : out.delta) d *= a;
  return out;
}

Image fb_residual_sq(const FlowField& f_ab, const FlowField& f_ba) {
  require(f_ab.width == f_ba.width && f_ab.height == f_ba.height,
          "fb_residual_sq: resolution mismatch");
  Image out(f_ab.width, f_ab.height, 1, kLargeResidualSq, true);
  parallel_for(0, f_ab.height, [&](int y) {
    for (int x = 0; x < f_ab.width; ++x) {
      if (!f_ab.is_valid(x, y)) continue;
      const float du = f_ab.du(x, y);
      const float dv = f_ab.dv(x, y);
      float bu, bv;
      if (!sample_flow(f_ba, static_cast<float>(x) + du, static_cast<float>(y) + dv, &bu, &bv)) {
        continue;
      }
      const float rx = du + bu;
      const float ry = dv + bv;
      out.at(x, y, 0) = rx * rx + ry * ry;
    }
  });
  return out;
}

Image fb_consistency(const FlowField& f_ab, const FlowField& f_ba, float tau) {
  require(tau > 0.0f, "fb_consistency: tau must be positive");
  Image rsq = fb_residual_sq(f_ab, f_ba);
  Image out(rsq.width(), rsq.height(), 1, 0.0f, true);
  const float inv_tau2 = 1.0f / (tau * tau);
  for (int y = 0; y < rsq.height(); ++y)
    for (int x = 0; x < rsq.width(); ++x) {
      const float c = std::exp(-rsq.at(x, y, 0) * inv_tau2);
      out.at(x, y, 0) = std::clamp(c, 0.0f, 1.0f);
    }
  return out;
}

Mask fb_occlusion_free(const FlowField& f_ab, const FlowField& f_ba, float threshold_px) {
  const Image rsq = fb_residual_sq(f_ab, f_ba);
  Mask mask = Mask::full(rsq.width(), rsq.height(), false);
  const float limit = threshold_px * threshold_px;
  for (int y = 0; y < rsq.height(); ++y)
    for (int x = 0; x < rsq.width(); ++x) mask.set(x, y, rsq.at(x, y, 0) <= limit);
  return mask;
}

FlowField flip_horizontal(const FlowField& flow) {
  FlowField out = FlowField::zeros(flow.width, flow.height);
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x) {
      const int sx = flow.width - 1 - x;
      out.du(x, y) = -flow.du(sx, y);
      out.dv(x, y) = flow.dv(sx, y);
      out.set_valid(x, y, flow.is_valid(sx, y));
    }
  return out;
}

std::uint64_t warp_count() { return g_warp_count.load(std::memory_order_relaxed); }
void reset_warp_count() { g_warp_count.store(0, std::memory_order_relaxed); }

}  // namespace pushbroom
