#pragma once

#include <vector>

#include "pushbroom/flow.hpp"
#include "pushbroom/image.hpp"

namespace pushbroom {

inline constexpr double kPsnrCapDb = 99.0;

/// 10*log10(1/MSE) over masked pixels of [0,1]-range images, capped at
/// 99 dB (the cap value is reported for identical images). Throws on an
/// empty mask.
double psnr(const Image& a, const Image& b, const Mask& mask);

/// Single-scale SSIM on the luma channel: 11x11 Gaussian window with
/// sigma 1.5, C1 = 0.01^2, C2 = 0.03^2, averaged over pixels whose full
/// window is masked valid. Throws when no window is fully valid.
double ssim(const Image& a, const Image& b, const Mask& mask);

struct WarpErrorReport {
  double sum = 0.0;            // sum of per-pair means (the E_warp convention)
  double per_pair_mean = 0.0;  // sum / (T-1), scale-free across lengths
  std::vector<double> per_pair;
};

/// Temporal warping error of a sequence: for each adjacent pair, flow from
/// frame t to t+1 is estimated, frame t+1 is warped back, and the mean
/// squared pixel difference is taken over valid, non-occluded pixels
/// (forward-backward residual <= occlusion_threshold_px). Frames are
/// canonicalized (invalid pixels zeroed) so masked-out samples can never
/// influence the result.
WarpErrorReport warp_error(const std::vector<Image>& frames, const FlowParams& flow_params,
                           float occlusion_threshold_px = 1.0f);

}  // namespace pushbroom
