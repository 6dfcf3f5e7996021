#include "pushbroom/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pushbroom/parallel.hpp"

namespace pushbroom {

void CameraIntrinsics::validate() const {
  require(width > 0 && height > 0, "intrinsics: resolution must be positive");
  require(focal.x > 0.0 && focal.y > 0.0, "intrinsics: focal components must be positive");
  require(contains(principal), "intrinsics: principal point outside the image rectangle");
  if (model == CameraModel::kEquidistantFisheye) {
    require(fisheye_fov > 0.0 && fisheye_fov < 2.0 * std::numbers::pi,
            "intrinsics: fisheye_fov must lie in (0, 2*pi)");
  }
}

void CameraPose::validate() const {
  require(is_rotation_matrix(rotation, 1e-6),
          "pose: rotation must be orthonormal with determinant +1");
}

void CylinderSpec::validate() const {
  require(width > 0 && height > 0, "cylinder: resolution must be positive");
  require(width % 2 == 0, "cylinder: width must be even (output splits at W/2)");
  require(horizontal_fov > 0.0 && horizontal_fov <= 2.0 * std::numbers::pi,
          "cylinder: horizontal_fov must lie in (0, 2*pi]");
  require(vertical_extent > 0.0, "cylinder: vertical_extent must be positive");
}

void CameraRig::validate() const {
  left.intrinsics.validate();
  mid.intrinsics.validate();
  right.intrinsics.validate();
  left.pose.validate();
  mid.pose.validate();
  right.pose.validate();
  cylinder.validate();
}

CameraRig default_rig() {
  const double deg = std::numbers::pi / 180.0;
  CameraIntrinsics intr;
  intr.model = CameraModel::kPinhole;
  intr.focal = {450.0, 450.0};
  intr.principal = {449.5, 449.5};
  intr.width = 900;
  intr.height = 900;

  CameraRig rig;
  rig.left = {intr, {yaw_rotation(-37.5 * deg), {-0.5, 0.0, 0.0}}};
  rig.mid = {intr, {Mat3::identity(), {0.0, 0.0, 0.0}}};
  rig.right = {intr, {yaw_rotation(37.5 * deg), {0.5, 0.0, 0.0}}};
  rig.cylinder = {1000, 600, 150.0 * deg, 0.66};
  return rig;
}

Vec3 unproject(Vec2 pixel, const CameraIntrinsics& intr) {
  require(intr.contains(pixel), "unproject: pixel outside the image rectangle");
  const double mx = (pixel.x - intr.principal.x) / intr.focal.x;
  const double my = (pixel.y - intr.principal.y) / intr.focal.y;
  if (intr.model == CameraModel::kPinhole) {
    return normalized({mx, my, 1.0});
  }
  // Equidistant fisheye: normalized radial distance equals the angle from
  // the optical axis.
  const double theta = std::sqrt(mx * mx + my * my);
  if (theta < 1e-12) return {0.0, 0.0, 1.0};
  const double s = std::sin(theta) / theta;
  return {s * mx, s * my, std::cos(theta)};
}

std::optional<Vec2> project(Vec3 direction, const CameraIntrinsics& intr) {
  if (intr.model == CameraModel::kPinhole) {
    if (direction.z <= 1e-9) return std::nullopt;
    const Vec2 px{intr.principal.x + intr.focal.x * direction.x / direction.z,
                  intr.principal.y + intr.focal.y * direction.y / direction.z};
    if (!intr.contains(px)) return std::nullopt;
    return px;
  }
  const double rho = std::sqrt(direction.x * direction.x + direction.y * direction.y);
  const double theta = std::atan2(rho, direction.z);
  if (theta > 0.5 * intr.fisheye_fov) return std::nullopt;
  Vec2 px = intr.principal;
  if (rho > 1e-12) {
    px.x += intr.focal.x * theta * (direction.x / rho);
    px.y += intr.focal.y * theta * (direction.y / rho);
  }
  if (!intr.contains(px)) return std::nullopt;
  return px;
}

Vec3 cylinder_direction(const CylinderSpec& cyl, double x, double y) {
  const double theta = (x / cyl.width - 0.5) * cyl.horizontal_fov;
  const double h = (2.0 * y / cyl.height - 1.0) * cyl.vertical_extent;
  return normalized({std::sin(theta), h, std::cos(theta)});
}

std::optional<Vec2> cylinder_pixel(const CylinderSpec& cyl, Vec3 direction) {
  const double rho = std::sqrt(direction.x * direction.x + direction.z * direction.z);
  if (rho < 1e-12) return std::nullopt;
  const double theta = std::atan2(direction.x, direction.z);
  const double h = direction.y / rho;
  double x = (theta / cyl.horizontal_fov + 0.5) * cyl.width;
  double y = (h / cyl.vertical_extent + 1.0) * 0.5 * cyl.height;
  // Directions produced from edge pixels land a rounding error outside the
  // range; snap within a small tolerance instead of rejecting them.
  constexpr double kEdgeTol = 1e-6;
  if (x < -kEdgeTol || x > cyl.width - 1.0 + kEdgeTol || y < -kEdgeTol ||
      y > cyl.height - 1.0 + kEdgeTol) {
    return std::nullopt;
  }
  x = std::clamp(x, 0.0, cyl.width - 1.0);
  y = std::clamp(y, 0.0, cyl.height - 1.0);
  return Vec2{x, y};
}

ReprojectionMap build_reprojection_map(const CameraIntrinsics& intr, const CameraPose& pose,
                                       const CylinderSpec& cyl) {
  intr.validate();
  pose.validate();
  cyl.validate();

  ReprojectionMap map;
  map.width = cyl.width;
  map.height = cyl.height;
  map.source_width = intr.width;
  map.source_height = intr.height;
  map.source_coords.assign(2 * static_cast<size_t>(cyl.width) * static_cast<size_t>(cyl.height),
                           0.0f);
  map.valid.assign(static_cast<size_t>(cyl.width) * static_cast<size_t>(cyl.height), 0);

  const Mat3 rig_to_cam = pose.rotation.transposed();
  parallel_for(0, cyl.height, [&](int y) {
    for (int x = 0; x < cyl.width; ++x) {
      const Vec3 dir = cylinder_direction(cyl, x, y);
      const Vec3 cam_dir = rig_to_cam * dir;
      const auto px = project(cam_dir, intr);
      const std::size_t i = map.index(x, y);
      if (px) {
        map.source_coords[2 * i] = static_cast<float>(px->x);
        map.source_coords[2 * i + 1] = static_cast<float>(px->y);
        map.valid[i] = 1;
      }
    }
  });
  return map;
}

Image apply_reprojection(const Image& img, const ReprojectionMap& map) {
  require(img.width() == map.source_width && img.height() == map.source_height,
          "apply_reprojection: image resolution does not match the map's source");
  Image out(map.width, map.height, img.channels(), 0.0f, false);
  parallel_for(0, map.height, [&](int y) {
    float sample[8];
    for (int x = 0; x < map.width; ++x) {
      if (!map.is_valid(x, y)) continue;
      const std::size_t i = 2 * map.index(x, y);
      if (bilinear_sample(img, map.source_coords[i], map.source_coords[i + 1], sample)) {
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = sample[c];
        out.set_valid(x, y, true);
      }
    }
  });
  return out;
}

ExposureResult match_exposure(const Image& ref, const Image& target, const Mask& overlap) {
  require(ref.same_shape(target), "match_exposure: image shapes differ");
  require(overlap.width == ref.width() && overlap.height == ref.height(),
          "match_exposure: overlap mask size mismatch");
  const int ch = ref.channels();
  require(ch <= 3, "match_exposure: at most 3 channels");

  double sum_ref[3] = {0, 0, 0};
  double sum_tgt[3] = {0, 0, 0};
  std::size_t n = 0;
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      if (!overlap.at(x, y) || !ref.valid(x, y) || !target.valid(x, y)) continue;
      ++n;
      for (int c = 0; c < ch; ++c) {
        sum_ref[c] += ref.at(x, y, c);
        sum_tgt[c] += target.at(x, y, c);
      }
    }
  }

  ExposureResult result;
  result.image = target;
  if (n == 0) return result;
  for (int c = 0; c < ch; ++c) {
    if (sum_tgt[c] <= 1e-12) return result;  // zero target mean: leave unchanged
    result.gain[static_cast<size_t>(c)] = sum_ref[c] / sum_tgt[c];
  }
  result.applied = true;
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      for (int c = 0; c < ch; ++c) {
        const float v =
            result.image.at(x, y, c) * static_cast<float>(result.gain[static_cast<size_t>(c)]);
        result.image.at(x, y, c) = std::min(1.0f, std::max(0.0f, v));
      }
    }
  }
  return result;
}

}  // namespace pushbroom
