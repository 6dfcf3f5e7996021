#pragma once

#include <cstdint>
#include <vector>

#include "pushbroom/image.hpp"

namespace pushbroom {

/// Dense per-pixel displacement map in pixels, backward-warp convention:
/// warping image I with flow F produces out(x,y) = I(x + du, y + dv).
/// This convention is fixed project-wide.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> delta;  // (du, dv) interleaved, row-major
  std::vector<std::uint8_t> valid;

  static FlowField zeros(int width, int height, bool valid = true);

  std::size_t index(int x, int y) const {
    return static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x);
  }
  float du(int x, int y) const { return delta[2 * index(x, y)]; }
  float dv(int x, int y) const { return delta[2 * index(x, y) + 1]; }
  float& du(int x, int y) { return delta[2 * index(x, y)]; }
  float& dv(int x, int y) { return delta[2 * index(x, y) + 1]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  void set_valid(int x, int y, bool v) { valid[index(x, y)] = v ? 1 : 0; }
  bool empty() const { return delta.empty(); }
};

struct FlowParams {
  int pyramid_levels = 0;        // 0: choose so the coarsest level is ~32 px wide
  float scale_factor = 0.5f;     // per-level downscale, in (0,1)
  float smoothness_alpha = 0.05f;
  int iterations_per_level = 4;  // outer warp iterations
  int median_filter_radius = 2;

  void validate() const;
};

/// Coarse-to-fine Horn-Schunck flow between a and b: the returned field F
/// satisfies a(x) ~= b(x + F(x)), i.e. warp_backward(b, F) reconstructs a.
/// Grayscale conversion is applied internally; deterministic for fixed
/// inputs and params. Identical inputs give an exactly zero field.
FlowField estimate_flow(const Image& a, const Image& b, const FlowParams& params);

/// out(x,y) = bilinear sample of img at (x + du, y + dv). Samples falling
/// outside the image, on invalid source pixels, or at invalid flow pixels
/// produce mask-false zeros. Increments the warp invocation counter.
Image warp_backward(const Image& img, const FlowField& flow);

/// Displacements multiplied by alpha in [0, 1]; mask unchanged.
FlowField scale_flow(const FlowField& flow, double alpha);

/// Forward-backward consistency confidence in [0,1]: per pixel,
/// r = |f_ab(x) + f_ba(x + f_ab(x))| and confidence = exp(-(r/tau)^2).
/// Pixels whose round trip leaves the frame get confidence 0.
Image fb_consistency(const FlowField& f_ab, const FlowField& f_ba, float tau);

/// Squared forward-backward residual |f_ab(x) + f_ba(x + f_ab(x))|^2, with
/// a large sentinel where the round trip leaves the frame. Shared support
/// for fb_consistency, visibility, and occlusion masking.
Image fb_residual_sq(const FlowField& f_ab, const FlowField& f_ba);

/// Non-occluded pixels: forward-backward residual <= threshold_px.
Mask fb_occlusion_free(const FlowField& f_ab, const FlowField& f_ba, float threshold_px);

FlowField flip_horizontal(const FlowField& flow);

/// Edge-preserving weighted median of both flow channels; neighbor weights
/// fall off with guide-intensity difference. The guide must be a single
/// channel raster of the flow's resolution.
FlowField weighted_median_filter(const FlowField& flow, const Image& guide, int radius);

/// Number of warp_backward invocations since the last reset. Instruments
/// the pushbroom work bound; flow-estimator internals do not count.
std::uint64_t warp_count();
void reset_warp_count();

}  // namespace pushbroom
