#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pushbroom/camera.hpp"
#include "pushbroom/flow.hpp"
#include "pushbroom/image.hpp"

namespace pushbroom {

enum class TransitionSide { kLeft, kRight };

/// One transition region on the output cylinder, expressed in pushbroom
/// orientation: the outgoing view sits at column 0 and the incoming view
/// toward the frame center. For side == kRight all columns are mirrored
/// indices (x' = W-1-x); the stitcher flips images before use so that the
/// slice arithmetic below is single-sided.
///
/// boundary is the first column with a valid incoming-view pixel; slice k
/// (1-based) occupies columns [boundary + (k-1)*s, boundary + k*s).
struct TransitionSpec {
  int boundary = 0;
  int slice_count = 100;
  int slice_width = 2;
  TransitionSide side = TransitionSide::kLeft;

  int end() const { return boundary + slice_count * slice_width; }
  void validate(int frame_width) const;
};

/// [1/K, 2/K, ..., 1]; strictly increasing, last element exactly 1.
std::vector<double> alpha_schedule(int slice_count);

enum class RefineMode { kNone, kDeterministic };
enum class PushbroomPath { kFast, kNaive };

struct VisibilityParams {
  float fb_tau = 1.0f;      // px, consistency falloff
  float photo_beta = 150.0f;  // photometric agreement falloff
  int median_radius = 2;    // weighted-median radius for flow refinement
};

struct StitchConfig {
  int slice_count = 100;  // K
  int slice_width = 2;    // s
  RefineMode refine = RefineMode::kDeterministic;
  PushbroomPath path = PushbroomPath::kFast;
  FlowParams flow;
  VisibilityParams visibility;
  bool allow_shrink = true;    // shrink K*s (with a warning) when overlap is small
  bool flow_on_crops = false;  // estimate flow on padded transition crops
  int crop_pad = 48;

  void validate() const;
};

/// Per-pixel blending weight for the outgoing view's warp, in [0,1].
struct VisibilityMap {
  int width = 0;
  int height = 0;
  std::vector<float> v;

  static VisibilityMap constant(int width, int height, float value);
  float at(int x, int y) const {
    return v[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
  float& at(int x, int y) {
    return v[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
};

/// Column-wise scaled flow: zero before the transition, alpha_k * F inside
/// slice k, F unchanged past the transition. With complement = true the
/// slice factor is (1 - alpha_k) instead, which is the field applied to
/// the incoming view.
FlowField build_column_scaled_flow(const FlowField& flow, const TransitionSpec& t,
                                   bool complement = false);

struct RefineResult {
  FlowField flow_a;
  FlowField flow_b;
  VisibilityMap visibility;
};

/// Deterministic stand-in for learned flow refinement: scaled flows are
/// smoothed with an edge-preserving weighted median, and the visibility
/// weight for the outgoing warp combines forward-backward consistency of
/// the scaled flows with a photometric agreement term on the first-pass
/// warps w_a, w_b. Where the warps agree the weight stays at 0.5; where
/// they disagree, consistency decides. RefineMode::kNone returns the
/// inputs untouched with v = 0.5 everywhere.
RefineResult refine_and_visibility(const FlowField& fhat_ab, const FlowField& fhat_ba,
                                   const Image& w_a, const Image& w_b, RefineMode mode,
                                   const VisibilityParams& params);

/// out = v * a + (1-v) * b per pixel. Where exactly one input is valid the
/// valid one wins regardless of v; both invalid gives an invalid zero.
Image blend_visibility(const Image& wt_a, const Image& wt_b, const VisibilityMap& v);

/// Direct K-warp implementation of the transition (the correctness and
/// performance oracle): for each k both full frames are warped with the
/// alpha_k-scaled flows, fused, and slice k's columns copied out. Outside
/// the transition the output copies I_a / I_b bit-exactly. Returns the
/// half frame, W/2 columns wide.
Image naive_pushbroom_half(const Image& I_a, const Image& I_b, const FlowField& f_ab,
                           const FlowField& f_ba, const TransitionSpec& t,
                           const StitchConfig& cfg);

/// Single-warp pushbroom interpolation: builds the column-scaled flow and
/// its complement, warps each image exactly once, derives visibility, and
/// blends. Matches naive_pushbroom_half bit-near when refine is kNone.
Image fast_pushbroom_half(const Image& I_a, const Image& I_b, const FlowField& f_ab,
                          const FlowField& f_ba, const TransitionSpec& t,
                          const StitchConfig& cfg);

/// Flow pair for one side of the rig, on the cylinder grid, unflipped:
/// warp_outgoing backward-warps the side view into the center view's
/// geometry; warp_incoming does the reverse.
struct SideFlowPair {
  FlowField warp_outgoing;
  FlowField warp_incoming;
};

struct StitchStats {
  TransitionSpec left;
  TransitionSpec right;
  bool left_shrunk = false;
  bool right_shrunk = false;
  std::array<double, 3> left_gain{1, 1, 1};
  std::array<double, 3> right_gain{1, 1, 1};
  double project_ms = 0;
  double flow_ms = 0;
  double pushbroom_ms = 0;
  std::uint64_t warps = 0;
};

/// Orchestrates one rig: reprojection maps and transition regions are
/// computed once and reused across frames.
class Stitcher {
 public:
  Stitcher(const CameraRig& rig, const StitchConfig& cfg);

  const CameraRig& rig() const { return rig_; }
  const StitchConfig& config() const { return cfg_; }
  const ReprojectionMap& left_map() const { return map_left_; }
  const ReprojectionMap& mid_map() const { return map_mid_; }
  const ReprojectionMap& right_map() const { return map_right_; }

  /// Transition specs in pushbroom orientation (right side in mirrored
  /// column indices).
  const TransitionSpec& left_transition() const { return t_left_; }
  const TransitionSpec& right_transition() const { return t_right_; }
  bool left_shrunk() const { return left_shrunk_; }
  bool right_shrunk() const { return right_shrunk_; }

  /// Right-side transition column range in output coordinates [first, last).
  std::pair<int, int> right_transition_columns() const;

  struct ProjectedInputs {
    Image left;
    Image mid;
    Image right;
    std::array<double, 3> left_gain{1, 1, 1};
    std::array<double, 3> right_gain{1, 1, 1};
  };

  /// Cylinder projection plus side-to-center exposure matching. Throws
  /// StitchError naming the side when a side/center overlap is empty.
  ProjectedInputs project_inputs(const Image& left, const Image& mid, const Image& right) const;

  /// Full pipeline with internally estimated flows.
  Image stitch(const Image& left, const Image& mid, const Image& right,
               StitchStats* stats = nullptr) const;

  /// Pipeline with injected flows (e.g. analytic ground truth).
  Image stitch_with_flows(const Image& left, const Image& mid, const Image& right,
                          const SideFlowPair& left_flows, const SideFlowPair& right_flows,
                          StitchStats* stats = nullptr) const;

  /// Estimates one side's flow pair on already-projected cylinder frames.
  SideFlowPair estimate_side_flows(const Image& outgoing_cyl, const Image& center_cyl,
                                   TransitionSide side) const;

 private:
  Image stitch_projected(const ProjectedInputs& in, const SideFlowPair& left_flows,
                         const SideFlowPair& right_flows, StitchStats* stats) const;

  CameraRig rig_;
  StitchConfig cfg_;
  ReprojectionMap map_left_;
  ReprojectionMap map_mid_;
  ReprojectionMap map_right_;
  TransitionSpec t_left_;
  TransitionSpec t_right_;
  bool left_shrunk_ = false;
  bool right_shrunk_ = false;
};

/// Transition region derived from the center camera's cylinder map: starts
/// at the first column holding any valid center pixel (counted from the
/// outgoing side) and extends slice_count*slice_width columns inward.
/// Shrinks to fit when allowed (shrunk set true), otherwise throws
/// StitchError naming the side.
TransitionSpec compute_transition(const ReprojectionMap& center_map, int slice_count,
                                  int slice_width, TransitionSide side, bool allow_shrink,
                                  bool* shrunk = nullptr);

Image stitch_frame(const Image& left, const Image& mid, const Image& right, const CameraRig& rig,
                   const StitchConfig& cfg);

/// Per-frame application of stitch_frame; frame t's output is independent
/// of every other frame. Errors are rethrown with the frame index.
std::vector<Image> stitch_sequence(const std::vector<std::array<Image, 3>>& frames,
                                   const CameraRig& rig, const StitchConfig& cfg);

}  // namespace pushbroom
