#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pushbroom/camera.hpp"
#include "pushbroom/flow.hpp"
#include "pushbroom/image.hpp"
#include "pushbroom/math.hpp"

namespace pushbroom {

/// Procedural texture on a primitive's local (u,v) plane, in meters.
/// Noise is seeded value noise on an integer lattice with bilinear
/// filtering; the others are analytic.
struct Texture {
  enum class Kind { kChecker, kStripes, kNoise, kSine };
  Kind kind = Kind::kChecker;
  double scale = 1.0;  // texture period in meters
  std::uint32_t seed = 0;
  Vec3 color_a{0.9, 0.9, 0.9};
  Vec3 color_b{0.1, 0.1, 0.1};

  Vec3 sample(double u, double v) const;
};

/// Textured rectangle or axis-aligned box with linear per-frame motion.
/// Planes carry a local frame (rotation columns = u axis, v axis, normal)
/// and are two-sided; boxes are axis-aligned in the rig frame.
struct Primitive {
  enum class Type { kPlane, kBox };
  Type type = Type::kPlane;
  Vec3 center;
  Mat3 rotation;        // plane orientation; identity = fronto-parallel
  Vec3 size{1, 1, 1};   // plane uses x,y extents; box all three
  Vec3 velocity;        // meters per frame
  Texture texture;

  Vec3 center_at(double time) const { return center + time * velocity; }
};

struct Background {
  enum class Type { kColor, kFarPlane };
  Type type = Type::kColor;
  Vec3 color{0.2, 0.3, 0.5};
  double depth = 100.0;  // far plane distance along +z
  Texture texture;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  Background background;
};

struct RayHit {
  bool hit = false;
  double t = 0.0;       // distance along the unit direction
  int primitive = -1;   // -1: background
  Vec3 point;
  Vec3 color;
};

/// Nearest intersection along origin + t*dir, t > epsilon. Depth ties go
/// to the lower primitive index. Background (constant color or far plane)
/// always resolves, so every ray returns a color.
RayHit raycast(const SceneSpec& scene, Vec3 origin, Vec3 dir, double time);

/// Per-pixel raycast render through a camera model (the per-pixel nearest
/// depth comparison plays the z-buffer role). Deterministic; throws
/// RenderError when the camera center is inside a box.
Image render_view(const SceneSpec& scene, const CameraIntrinsics& intr, const CameraPose& pose,
                  double time);

/// Renders the scene directly on the cylinder grid from an arbitrary rig
/// position (columns [x0, x1) only); used for ground-truth slices.
Image render_cylinder_view(const SceneSpec& scene, Vec3 origin, const CylinderSpec& cyl,
                           double time, int x0 = 0, int x1 = -1);

struct AnalyticFlowResult {
  FlowField flow;
  Mask occluded;  // true where the point seen by cam_a is hidden from cam_b
};

/// Exact correspondence field between the cylinder projections of two rig
/// cameras, via depth-based reprojection of each ray's hit point. The
/// returned flow matches estimate_flow(a_cyl, b_cyl): it backward-warps
/// cam_b's cylinder projection into cam_a's geometry. Occlusion is decided
/// by re-casting from cam_b with a depth tolerance.
AnalyticFlowResult analytic_flow(const SceneSpec& scene, const RigCamera& cam_a,
                                 const RigCamera& cam_b, const CylinderSpec& cyl, double time,
                                 double depth_tolerance = 1e-3);

/// Ground-truth pushbroom panorama: K rig positions uniformly spaced from
/// each side camera to the center camera render the transition slices
/// (slice k from position lerp(side, center, k/K)); outside the
/// transitions the panorama copies the projected side/center renders
/// bit-exactly. Transition placement matches the stitcher's.
Image render_ground_truth_panorama(const SceneSpec& scene, const CameraRig& rig, int slice_count,
                                   int slice_width, double time);

struct GroundTruthBundle {
  Image left;   // raw camera frames
  Image mid;
  Image right;
  Image panorama;  // cylinder grid
  AnalyticFlowResult warp_left_to_mid;   // = analytic_flow(mid, left)
  AnalyticFlowResult warp_mid_to_left;
  AnalyticFlowResult warp_right_to_mid;
  AnalyticFlowResult warp_mid_to_right;
};

struct BundleParams {
  int slice_count = 100;
  int slice_width = 2;
  double depth_tolerance = 1e-3;
};

GroundTruthBundle generate_bundle(const SceneSpec& scene, const CameraRig& rig,
                                  const BundleParams& params, double time);

}  // namespace pushbroom
