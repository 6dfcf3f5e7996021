#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pushbroom/image.hpp"
#include "pushbroom/math.hpp"

namespace pushbroom {

enum class CameraModel { kPinhole, kEquidistantFisheye };

/// Pinhole or equidistant-fisheye (r = f * theta) intrinsics. Pixel
/// coordinates put integer positions at sample centers; the image
/// rectangle is [0, W-1] x [0, H-1].
struct CameraIntrinsics {
  CameraModel model = CameraModel::kPinhole;
  Vec2 focal{1.0, 1.0};
  Vec2 principal{0.0, 0.0};
  int width = 0;
  int height = 0;
  double fisheye_fov = 0.0;  // full cone angle, radians; fisheye only

  void validate() const;
  bool contains(Vec2 pixel) const {
    return pixel.x >= 0.0 && pixel.x <= width - 1.0 && pixel.y >= 0.0 && pixel.y <= height - 1.0;
  }
};

/// Camera-to-rig rotation plus camera center in the rig frame (meters).
struct CameraPose {
  Mat3 rotation;
  Vec3 translation;

  void validate() const;
};

/// Output viewing cylinder, unit radius, centered at the rig origin.
/// Column x maps linearly to azimuth theta(x) = (x/W - 1/2) * horizontal_fov
/// and row y to height h(y) = (2*y/H - 1) * vertical_extent (+y down).
struct CylinderSpec {
  int width = 0;
  int height = 0;
  double horizontal_fov = 0.0;  // radians, (0, 2*pi]
  double vertical_extent = 0.0;  // half-height per unit radius

  void validate() const;
  /// Pixels per radian of azimuth.
  double azimuth_scale() const { return width / horizontal_fov; }
};

struct RigCamera {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

struct CameraRig {
  RigCamera left;
  RigCamera mid;
  RigCamera right;
  CylinderSpec cylinder;

  void validate() const;
};

/// Three pinhole cameras on a 1 m baseline, sides yawed +-37.5 degrees,
/// 1000x600 output cylinder with a 150 degree horizontal field of view.
CameraRig default_rig();

/// Unit viewing ray in the camera frame for a pixel inside the image
/// rectangle. Pinhole: perspective division. Equidistant fisheye: the
/// radial pixel distance equals focal * angle-from-axis.
Vec3 unproject(Vec2 pixel, const CameraIntrinsics& intr);

/// Projects a camera-frame direction into the image. Empty when the
/// direction is outside the camera's field of view (behind the pinhole
/// plane, or outside the fisheye cone) or lands outside the rectangle.
std::optional<Vec2> project(Vec3 direction, const CameraIntrinsics& intr);

/// Direction of the viewing ray through cylinder pixel (x, y), rig frame.
Vec3 cylinder_direction(const CylinderSpec& cyl, double x, double y);

/// Inverse of cylinder_direction; empty when the direction leaves the
/// cylinder's azimuth/height range.
std::optional<Vec2> cylinder_pixel(const CylinderSpec& cyl, Vec3 direction);

/// Fractional source coordinates per output pixel plus a validity mask.
/// valid(x,y) implies source_coords(x,y) lies inside the source rectangle.
struct ReprojectionMap {
  int width = 0;
  int height = 0;
  int source_width = 0;
  int source_height = 0;
  std::vector<float> source_coords;  // (sx, sy) interleaved, row-major
  std::vector<std::uint8_t> valid;

  std::size_t index(int x, int y) const {
    return static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x);
  }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  Vec2 source(int x, int y) const {
    const std::size_t i = 2 * index(x, y);
    return {source_coords[i], source_coords[i + 1]};
  }
};

/// Builds the map that pulls a camera image onto the viewing cylinder.
/// Each cylinder ray is cast from the rig origin and rotated into the
/// camera frame; camera translation is ignored (scene-at-infinity), so the
/// map depends on orientation only. Out-of-FOV pixels are masked, never
/// errors.
ReprojectionMap build_reprojection_map(const CameraIntrinsics& intr, const CameraPose& pose,
                                       const CylinderSpec& cyl);

/// Bilinear resampling through a reprojection map. The output carries the
/// map's mask, intersected with source validity under the sampled
/// footprint. An identity map reproduces the input bit-exactly.
Image apply_reprojection(const Image& img, const ReprojectionMap& map);

struct ExposureResult {
  Image image;
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  bool applied = false;  // false: empty overlap or zero target mean
};

/// Scales target per channel by mean(ref)/mean(target) over the overlap
/// mask (clamped to [0,1]). Returns target unchanged with applied=false
/// when the overlap is empty or a target mean is zero.
ExposureResult match_exposure(const Image& ref, const Image& target, const Mask& overlap);

}  // namespace pushbroom
