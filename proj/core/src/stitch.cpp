#include "pushbroom/stitch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pushbroom/parallel.hpp"

namespace pushbroom {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void check_half_inputs(const Image& I_a, const Image& I_b, const FlowField& f_ab,
                       const FlowField& f_ba, const TransitionSpec& t) {
  require(I_a.same_shape(I_b), "pushbroom: input images must share shape");
  require(f_ab.width == I_a.width() && f_ab.height == I_a.height() && f_ba.width == f_ab.width &&
              f_ba.height == f_ab.height,
          "pushbroom: flow resolution must match the frames");
  t.validate(I_a.width());
}

/// Copies column range [x0, x1) of src into dst at the same columns.
void copy_columns(Image& dst, const Image& src, int x0, int x1) {
  for (int y = 0; y < dst.height(); ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < dst.channels(); ++c) dst.at(x, y, c) = src.at(x, y, c);
      dst.set_valid(x, y, src.valid(x, y));
    }
  }
}

/// Assembles the half frame: [0,b) from the outgoing view, the transition
/// from the blended interpolation, [b+K*s, W/2) from the incoming view.
Image assemble_half(const Image& I_a, const Image& I_b, const Image& blended,
                    const TransitionSpec& t) {
  const int half = I_a.width() / 2;
  Image out(half, I_a.height(), I_a.channels(), 0.0f, false);
  copy_columns(out, I_a, 0, t.boundary);
  copy_columns(out, blended, t.boundary, t.end());
  copy_columns(out, I_b, t.end(), half);
  return out;
}

}  // namespace

void TransitionSpec::validate(int frame_width) const {
  require(boundary >= 0, "transition: boundary must be >= 0");
  require(slice_count >= 1, "transition: slice count must be >= 1");
  require(slice_width >= 1, "transition: slice width must be >= 1");
  require(end() <= frame_width / 2,
          "transition: boundary + K*s exceeds the half frame (" + std::to_string(end()) + " > " +
              std::to_string(frame_width / 2) + ")");
}

std::vector<double> alpha_schedule(int slice_count) {
  require(slice_count >= 1, "alpha_schedule: K must be >= 1");
  std::vector<double> alphas(static_cast<size_t>(slice_count));
  for (int k = 1; k <= slice_count; ++k) {
    alphas[static_cast<size_t>(k - 1)] = static_cast<double>(k) / slice_count;
  }
  alphas.back() = 1.0;
  return alphas;
}

void StitchConfig::validate() const {
  require(slice_count >= 1, "config: K must be >= 1");
  require(slice_width >= 1, "config: s must be >= 1");
  require(crop_pad >= 0, "config: crop_pad must be >= 0");
  require(visibility.fb_tau > 0.0f, "config: fb_tau must be positive");
  require(visibility.photo_beta >= 0.0f, "config: photo_beta must be >= 0");
  require(visibility.median_radius >= 0, "config: visibility median_radius must be >= 0");
  flow.validate();
}

VisibilityMap VisibilityMap::constant(int width, int height, float value) {
  VisibilityMap m;
  m.width = width;
  m.height = height;
  m.v.assign(static_cast<size_t>(width) * static_cast<size_t>(height), value);
  return m;
}

FlowField build_column_scaled_flow(const FlowField& flow, const TransitionSpec& t,
                                   bool complement) {
  t.validate(flow.width);
  const auto alphas = alpha_schedule(t.slice_count);
  FlowField out = FlowField::zeros(flow.width, flow.height);

  // Per-column slice factor; ~0 marks the identity region before the
  // transition where the field is zero regardless of the input.
  std::vector<float> factor(static_cast<size_t>(flow.width), 1.0f);
  std::vector<std::uint8_t> zero_region(static_cast<size_t>(flow.width), 0);
  for (int x = 0; x < flow.width; ++x) {
    if (x < t.boundary) {
      zero_region[static_cast<size_t>(x)] = 1;
    } else if (x < t.end()) {
      const int k = (x - t.boundary) / t.slice_width;  // 0-based slice index
      const double a = alphas[static_cast<size_t>(k)];
      factor[static_cast<size_t>(x)] = static_cast<float>(complement ? 1.0 - a : a);
    }
  }

  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      if (zero_region[static_cast<size_t>(x)]) {
        out.set_valid(x, y, true);
        continue;
      }
      const float f = factor[static_cast<size_t>(x)];
      out.du(x, y) = f * flow.du(x, y);
      out.dv(x, y) = f * flow.dv(x, y);
      out.set_valid(x, y, flow.is_valid(x, y));
    }
  }
  return out;
}

RefineResult refine_and_visibility(const FlowField& fhat_ab, const FlowField& fhat_ba,
                                   const Image& w_a, const Image& w_b, RefineMode mode,
                                   const VisibilityParams& params) {
  require(fhat_ab.width == fhat_ba.width && fhat_ab.height == fhat_ba.height,
          "refine_and_visibility: flow resolution mismatch");
  require(w_a.same_shape(w_b) && w_a.width() == fhat_ab.width && w_a.height() == fhat_ab.height,
          "refine_and_visibility: warped image resolution mismatch");

  RefineResult result;
  if (mode == RefineMode::kNone) {
    result.flow_a = fhat_ab;
    result.flow_b = fhat_ba;
    result.visibility = VisibilityMap::constant(w_a.width(), w_a.height(), 0.5f);
    return result;
  }

  result.flow_a = weighted_median_filter(fhat_ab, to_gray(w_a), params.median_radius);
  result.flow_b = weighted_median_filter(fhat_ba, to_gray(w_b), params.median_radius);

  const Image ra2 = fb_residual_sq(fhat_ab, fhat_ba);
  const Image rb2 = fb_residual_sq(fhat_ba, fhat_ab);
  const float inv_tau2 = 1.0f / (params.fb_tau * params.fb_tau);

  VisibilityMap v = VisibilityMap::constant(w_a.width(), w_a.height(), 0.5f);
  parallel_for(0, w_a.height(), [&](int y) {
    for (int x = 0; x < w_a.width(); ++x) {
      // Preference for the outgoing warp from forward-backward evidence;
      // algebraically c_a/(c_a+c_b) with c = exp(-r^2/tau^2), computed in
      // log space so large residuals cannot underflow both sides to zero.
      const float diff = std::clamp((ra2.at(x, y, 0) - rb2.at(x, y, 0)) * inv_tau2, -60.0f, 60.0f);
      const float pref = 1.0f / (1.0f + std::exp(diff));

      // Photometric agreement of the two warps; where they already agree
      // there is nothing to choose and the weight stays even.
      float agreement = 1.0f;
      if (w_a.valid(x, y) && w_b.valid(x, y)) {
        float d2 = 0.0f;
        for (int c = 0; c < w_a.channels(); ++c) {
          const float d = w_a.at(x, y, c) - w_b.at(x, y, c);
          d2 += d * d;
        }
        d2 /= static_cast<float>(w_a.channels());
        agreement = std::exp(-params.photo_beta * d2);
      }
      v.at(x, y) = std::clamp(0.5f + (pref - 0.5f) * (1.0f - agreement), 0.0f, 1.0f);
    }
  });
  result.visibility = std::move(v);
  return result;
}

Image blend_visibility(const Image& wt_a, const Image& wt_b, const VisibilityMap& v) {
  require(wt_a.same_shape(wt_b), "blend_visibility: image shapes differ");
  require(v.width == wt_a.width() && v.height == wt_a.height(),
          "blend_visibility: visibility size mismatch");
  Image out(wt_a.width(), wt_a.height(), wt_a.channels(), 0.0f, false);
  parallel_for(0, wt_a.height(), [&](int y) {
    for (int x = 0; x < wt_a.width(); ++x) {
      const bool va = wt_a.valid(x, y);
      const bool vb = wt_b.valid(x, y);
      if (!va && !vb) continue;
      float weight = v.at(x, y);
      if (!vb) weight = 1.0f;
      if (!va) weight = 0.0f;
      for (int c = 0; c < wt_a.channels(); ++c) {
        out.at(x, y, c) = weight * wt_a.at(x, y, c) + (1.0f - weight) * wt_b.at(x, y, c);
      }
      out.set_valid(x, y, true);
    }
  });
  return out;
}

Image naive_pushbroom_half(const Image& I_a, const Image& I_b, const FlowField& f_ab,
                           const FlowField& f_ba, const TransitionSpec& t,
                           const StitchConfig& cfg) {
  if (t.side == TransitionSide::kRight) {
    TransitionSpec mirrored = t;
    mirrored.side = TransitionSide::kLeft;
    return flip_horizontal(naive_pushbroom_half(flip_horizontal(I_a), flip_horizontal(I_b),
                                                flip_horizontal(f_ab), flip_horizontal(f_ba),
                                                mirrored, cfg));
  }
  check_half_inputs(I_a, I_b, f_ab, f_ba, t);

  const int half = I_a.width() / 2;
  Image out(half, I_a.height(), I_a.channels(), 0.0f, false);
  copy_columns(out, I_a, 0, t.boundary);
  copy_columns(out, I_b, t.end(), half);

  const auto alphas = alpha_schedule(t.slice_count);
  for (int k = 1; k <= t.slice_count; ++k) {
    const double alpha = alphas[static_cast<size_t>(k - 1)];
    const FlowField fa = scale_flow(f_ab, alpha);
    const FlowField fb = scale_flow(f_ba, 1.0 - alpha);
    const Image wa = warp_backward(I_a, fa);
    const Image wb = warp_backward(I_b, fb);
    const RefineResult rr = refine_and_visibility(fa, fb, wa, wb, cfg.refine, cfg.visibility);
    const Image fused = blend_visibility(wa, wb, rr.visibility);
    const int x0 = t.boundary + (k - 1) * t.slice_width;
    copy_columns(out, fused, x0, x0 + t.slice_width);
  }
  return out;
}

Image fast_pushbroom_half(const Image& I_a, const Image& I_b, const FlowField& f_ab,
                          const FlowField& f_ba, const TransitionSpec& t,
                          const StitchConfig& cfg) {
  if (t.side == TransitionSide::kRight) {
    TransitionSpec mirrored = t;
    mirrored.side = TransitionSide::kLeft;
    return flip_horizontal(fast_pushbroom_half(flip_horizontal(I_a), flip_horizontal(I_b),
                                               flip_horizontal(f_ab), flip_horizontal(f_ba),
                                               mirrored, cfg));
  }
  check_half_inputs(I_a, I_b, f_ab, f_ba, t);

  const FlowField fhat_a = build_column_scaled_flow(f_ab, t, /*complement=*/false);
  const FlowField fhat_b = build_column_scaled_flow(f_ba, t, /*complement=*/true);
  const Image wa = warp_backward(I_a, fhat_a);
  const Image wb = warp_backward(I_b, fhat_b);
  const RefineResult rr = refine_and_visibility(fhat_a, fhat_b, wa, wb, cfg.refine, cfg.visibility);
  const Image blended = blend_visibility(wa, wb, rr.visibility);
  return assemble_half(I_a, I_b, blended, t);
}

TransitionSpec compute_transition(const ReprojectionMap& center_map, int slice_count,
                                  int slice_width, TransitionSide side, bool allow_shrink,
                                  bool* shrunk) {
  const int w = center_map.width;
  const int h = center_map.height;
  const char* side_name = side == TransitionSide::kLeft ? "left" : "right";
  if (shrunk) *shrunk = false;

  // First column (in pushbroom orientation) holding any valid center pixel.
  int boundary = -1;
  for (int i = 0; i < w && boundary < 0; ++i) {
    const int x = side == TransitionSide::kLeft ? i : w - 1 - i;
    for (int y = 0; y < h; ++y) {
      if (center_map.is_valid(x, y)) {
        boundary = i;
        break;
      }
    }
  }
  if (boundary < 0) {
    throw StitchError(std::string("transition (") + side_name +
                      "): center view has no valid pixels on the cylinder");
  }

  TransitionSpec t;
  t.boundary = boundary;
  t.slice_count = slice_count;
  t.slice_width = slice_width;
  t.side = side;
  if (t.end() <= w / 2) return t;

  if (!allow_shrink) {
    throw StitchError(std::string("transition (") + side_name + "): boundary " +
                      std::to_string(boundary) + " + K*s = " + std::to_string(t.end()) +
                      " exceeds half width " + std::to_string(w / 2) +
                      " and shrinking is disabled");
  }
  int fit_count = (w / 2 - boundary) / slice_width;
  if (fit_count < 1) {
    t.slice_width = 1;
    fit_count = w / 2 - boundary;
  }
  if (fit_count < 1) {
    throw StitchError(std::string("transition (") + side_name +
                      "): no overlap columns available before the half-frame seam");
  }
  t.slice_count = std::min(slice_count, fit_count);
  if (shrunk) *shrunk = true;
  return t;
}

Stitcher::Stitcher(const CameraRig& rig, const StitchConfig& cfg) : rig_(rig), cfg_(cfg) {
  rig_.validate();
  cfg_.validate();
  map_left_ = build_reprojection_map(rig_.left.intrinsics, rig_.left.pose, rig_.cylinder);
  map_mid_ = build_reprojection_map(rig_.mid.intrinsics, rig_.mid.pose, rig_.cylinder);
  map_right_ = build_reprojection_map(rig_.right.intrinsics, rig_.right.pose, rig_.cylinder);
  t_left_ = compute_transition(map_mid_, cfg_.slice_count, cfg_.slice_width,
                               TransitionSide::kLeft, cfg_.allow_shrink, &left_shrunk_);
  t_right_ = compute_transition(map_mid_, cfg_.slice_count, cfg_.slice_width,
                                TransitionSide::kRight, cfg_.allow_shrink, &right_shrunk_);
}

std::pair<int, int> Stitcher::right_transition_columns() const {
  const int w = rig_.cylinder.width;
  return {w - t_right_.end(), w - t_right_.boundary};
}

Stitcher::ProjectedInputs Stitcher::project_inputs(const Image& left, const Image& mid,
                                                   const Image& right) const {
  ProjectedInputs out;
  out.mid = apply_reprojection(mid, map_mid_);
  out.left = apply_reprojection(left, map_left_);
  out.right = apply_reprojection(right, map_right_);

  const Mask overlap_left = mask_and(out.left.mask(), out.mid.mask());
  if (overlap_left.count() == 0) {
    throw StitchError("stitch: empty overlap between the left and center views");
  }
  const Mask overlap_right = mask_and(out.right.mask(), out.mid.mask());
  if (overlap_right.count() == 0) {
    throw StitchError("stitch: empty overlap between the right and center views");
  }

  ExposureResult left_exp = match_exposure(out.mid, out.left, overlap_left);
  out.left = std::move(left_exp.image);
  out.left_gain = left_exp.gain;
  ExposureResult right_exp = match_exposure(out.mid, out.right, overlap_right);
  out.right = std::move(right_exp.image);
  out.right_gain = right_exp.gain;
  return out;
}

SideFlowPair Stitcher::estimate_side_flows(const Image& outgoing_cyl, const Image& center_cyl,
                                           TransitionSide side) const {
  const TransitionSpec& t = side == TransitionSide::kLeft ? t_left_ : t_right_;
  if (!cfg_.flow_on_crops) {
    return {estimate_flow(center_cyl, outgoing_cyl, cfg_.flow),
            estimate_flow(outgoing_cyl, center_cyl, cfg_.flow)};
  }

  // Padded transition crop, in output coordinates.
  const int w = center_cyl.width();
  int x0, x1;
  if (side == TransitionSide::kLeft) {
    x0 = std::max(0, t.boundary - cfg_.crop_pad);
    x1 = std::min(w, t.end() + cfg_.crop_pad);
  } else {
    x0 = std::max(0, w - t.end() - cfg_.crop_pad);
    x1 = std::min(w, w - t.boundary + cfg_.crop_pad);
  }
  const int cw = x1 - x0;
  const int h = center_cyl.height();
  Image crop_out(cw, h, outgoing_cyl.channels());
  Image crop_ctr(cw, h, center_cyl.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < cw; ++x) {
      for (int c = 0; c < outgoing_cyl.channels(); ++c) {
        crop_out.at(x, y, c) = outgoing_cyl.at(x0 + x, y, c);
        crop_ctr.at(x, y, c) = center_cyl.at(x0 + x, y, c);
      }
      crop_out.set_valid(x, y, outgoing_cyl.valid(x0 + x, y));
      crop_ctr.set_valid(x, y, center_cyl.valid(x0 + x, y));
    }

  const FlowField out_crop = estimate_flow(crop_ctr, crop_out, cfg_.flow);
  const FlowField in_crop = estimate_flow(crop_out, crop_ctr, cfg_.flow);
  SideFlowPair pair{FlowField::zeros(w, h, false), FlowField::zeros(w, h, false)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < cw; ++x) {
      pair.warp_outgoing.du(x0 + x, y) = out_crop.du(x, y);
      pair.warp_outgoing.dv(x0 + x, y) = out_crop.dv(x, y);
      pair.warp_outgoing.set_valid(x0 + x, y, out_crop.is_valid(x, y));
      pair.warp_incoming.du(x0 + x, y) = in_crop.du(x, y);
      pair.warp_incoming.dv(x0 + x, y) = in_crop.dv(x, y);
      pair.warp_incoming.set_valid(x0 + x, y, in_crop.is_valid(x, y));
    }
  return pair;
}

Image Stitcher::stitch_projected(const ProjectedInputs& in, const SideFlowPair& left_flows,
                                 const SideFlowPair& right_flows, StitchStats* stats) const {
  const double t0 = now_ms();
  const std::uint64_t warps_before = warp_count();

  const auto half_fn =
      cfg_.path == PushbroomPath::kFast ? fast_pushbroom_half : naive_pushbroom_half;
  const Image half_left =
      half_fn(in.left, in.mid, left_flows.warp_outgoing, left_flows.warp_incoming, t_left_, cfg_);
  const Image half_right = half_fn(in.right, in.mid, right_flows.warp_outgoing,
                                   right_flows.warp_incoming, t_right_, cfg_);

  const int w = rig_.cylinder.width;
  const int h = rig_.cylinder.height;
  Image out(w, h, in.mid.channels(), 0.0f, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w / 2; ++x) {
      for (int c = 0; c < out.channels(); ++c) {
        out.at(x, y, c) = half_left.at(x, y, c);
        out.at(w / 2 + x, y, c) = half_right.at(x, y, c);
      }
      out.set_valid(x, y, half_left.valid(x, y));
      out.set_valid(w / 2 + x, y, half_right.valid(x, y));
    }
  }

  // Both halves must hand center-camera content to the seam untouched.
  if (t_left_.end() < w / 2 && t_right_.end() < w / 2) {
    for (int y = 0; y < h; ++y) {
      for (int c = 0; c < out.channels(); ++c) {
        if (out.at(w / 2 - 1, y, c) != in.mid.at(w / 2 - 1, y, c) ||
            out.at(w / 2, y, c) != in.mid.at(w / 2, y, c)) {
          throw StitchError("stitch: seam columns diverged from the center view");
        }
      }
    }
  }

  if (stats) {
    stats->left = t_left_;
    stats->right = t_right_;
    stats->left_shrunk = left_shrunk_;
    stats->right_shrunk = right_shrunk_;
    stats->pushbroom_ms = now_ms() - t0;
    stats->warps = warp_count() - warps_before;
  }
  return out;
}

Image Stitcher::stitch(const Image& left, const Image& mid, const Image& right,
                       StitchStats* stats) const {
  const double t0 = now_ms();
  const ProjectedInputs in = project_inputs(left, mid, right);
  const double t1 = now_ms();
  const SideFlowPair lf = estimate_side_flows(in.left, in.mid, TransitionSide::kLeft);
  const SideFlowPair rf = estimate_side_flows(in.right, in.mid, TransitionSide::kRight);
  const double t2 = now_ms();
  if (stats) {
    stats->project_ms = t1 - t0;
    stats->flow_ms = t2 - t1;
    stats->left_gain = in.left_gain;
    stats->right_gain = in.right_gain;
  }
  return stitch_projected(in, lf, rf, stats);
}

Image Stitcher::stitch_with_flows(const Image& left, const Image& mid, const Image& right,
                                  const SideFlowPair& left_flows, const SideFlowPair& right_flows,
                                  StitchStats* stats) const {
  const double t0 = now_ms();
  const ProjectedInputs in = project_inputs(left, mid, right);
  if (stats) {
    stats->project_ms = now_ms() - t0;
    stats->left_gain = in.left_gain;
    stats->right_gain = in.right_gain;
  }
  return stitch_projected(in, left_flows, right_flows, stats);
}

Image stitch_frame(const Image& left, const Image& mid, const Image& right, const CameraRig& rig,
                   const StitchConfig& cfg) {
  return Stitcher(rig, cfg).stitch(left, mid, right);
}

std::vector<Image> stitch_sequence(const std::vector<std::array<Image, 3>>& frames,
                                   const CameraRig& rig, const StitchConfig& cfg) {
  Stitcher stitcher(rig, cfg);
  std::vector<Image> out;
  out.reserve(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    try {
      out.push_back(stitcher.stitch(frames[i][0], frames[i][1], frames[i][2]));
    } catch (const Error& e) {
      throw StitchError("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pushbroom
