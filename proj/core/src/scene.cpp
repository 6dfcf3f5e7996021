#include "pushbroom/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pushbroom/parallel.hpp"
#include "pushbroom/stitch.hpp"

namespace pushbroom {

namespace {

constexpr double kRayEpsilon = 1e-9;
constexpr double kInfiniteDepth = 1e30;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice_value(long ix, long iy, std::uint32_t seed, int channel) {
  std::uint64_t key = static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                      static_cast<std::uint64_t>(iy) * 0x1000193ULL ^
                      (static_cast<std::uint64_t>(seed) << 32) ^
                      static_cast<std::uint64_t>(channel);
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

double value_noise(double u, double v, std::uint32_t seed, int channel) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const long iu = static_cast<long>(fu);
  const long iv = static_cast<long>(fv);
  const double tu = u - fu;
  const double tv = v - fv;
  const double v00 = lattice_value(iu, iv, seed, channel);
  const double v10 = lattice_value(iu + 1, iv, seed, channel);
  const double v01 = lattice_value(iu, iv + 1, seed, channel);
  const double v11 = lattice_value(iu + 1, iv + 1, seed, channel);
  return (1 - tu) * (1 - tv) * v00 + tu * (1 - tv) * v10 + (1 - tu) * tv * v01 + tu * tv * v11;
}

Vec3 lerp_color(Vec3 a, Vec3 b, double t) { return (1.0 - t) * b + t * a; }

struct PlaneLocal {
  Vec3 u_axis;
  Vec3 v_axis;
  Vec3 normal;
};

PlaneLocal plane_axes(const Primitive& p) {
  return {{p.rotation.at(0, 0), p.rotation.at(1, 0), p.rotation.at(2, 0)},
          {p.rotation.at(0, 1), p.rotation.at(1, 1), p.rotation.at(2, 1)},
          {p.rotation.at(0, 2), p.rotation.at(1, 2), p.rotation.at(2, 2)}};
}

bool intersect_plane(const Primitive& p, Vec3 center, Vec3 origin, Vec3 dir, double* t_out,
                     double* u_out, double* v_out) {
  const PlaneLocal ax = plane_axes(p);
  const double denom = dot(dir, ax.normal);
  if (std::abs(denom) < 1e-12) return false;
  const double t = dot(center - origin, ax.normal) / denom;
  if (t <= kRayEpsilon) return false;
  const Vec3 point = origin + t * dir - center;
  const double u = dot(point, ax.u_axis);
  const double v = dot(point, ax.v_axis);
  if (std::abs(u) > 0.5 * p.size.x || std::abs(v) > 0.5 * p.size.y) return false;
  *t_out = t;
  *u_out = u;
  *v_out = v;
  return true;
}

bool intersect_box(const Primitive& p, Vec3 center, Vec3 origin, Vec3 dir, double* t_out,
                   double* u_out, double* v_out) {
  const double half[3] = {0.5 * p.size.x, 0.5 * p.size.y, 0.5 * p.size.z};
  const double o[3] = {origin.x - center.x, origin.y - center.y, origin.z - center.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > half[a]) return false;
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = a;
    }
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  if (t_enter <= kRayEpsilon || enter_axis < 0) return false;
  const Vec3 point = origin + t_enter * dir - center;
  const double pt[3] = {point.x, point.y, point.z};
  const int ua = (enter_axis + 1) % 3;
  const int va = (enter_axis + 2) % 3;
  *t_out = t_enter;
  *u_out = pt[ua];
  *v_out = pt[va];
  return true;
}

bool point_inside_box(const Primitive& p, Vec3 center, Vec3 point) {
  const Vec3 d = point - center;
  return std::abs(d.x) < 0.5 * p.size.x && std::abs(d.y) < 0.5 * p.size.y &&
         std::abs(d.z) < 0.5 * p.size.z;
}

void check_camera_outside(const SceneSpec& scene, Vec3 origin, double time) {
  for (const auto& p : scene.primitives) {
    if (p.type == Primitive::Type::kBox && point_inside_box(p, p.center_at(time), origin)) {
      throw RenderError("render: camera center lies inside a box primitive");
    }
  }
}

}  // namespace

Vec3 Texture::sample(double u, double v) const {
  const double su = u / scale;
  const double sv = v / scale;
  switch (kind) {
    case Kind::kChecker: {
      const long pu = static_cast<long>(std::floor(su));
      const long pv = static_cast<long>(std::floor(sv));
      return ((pu + pv) & 1) == 0 ? color_a : color_b;
    }
    case Kind::kStripes: {
      const long pu = static_cast<long>(std::floor(su));
      return (pu & 1) == 0 ? color_a : color_b;
    }
    case Kind::kNoise: {
      Vec3 c;
      c.x = color_b.x + value_noise(su, sv, seed, 0) * (color_a.x - color_b.x);
      c.y = color_b.y + value_noise(su, sv, seed, 1) * (color_a.y - color_b.y);
      c.z = color_b.z + value_noise(su, sv, seed, 2) * (color_a.z - color_b.z);
      return c;
    }
    case Kind::kSine: {
      const double t =
          0.5 + 0.25 * std::sin(2.0 * 3.14159265358979323846 * su) +
          0.25 * std::sin(2.0 * 3.14159265358979323846 * sv);
      return lerp_color(color_a, color_b, t);
    }
  }
  return color_a;
}

RayHit raycast(const SceneSpec& scene, Vec3 origin, Vec3 dir, double time) {
  RayHit best;
  best.hit = true;
  best.t = kInfiniteDepth;
  best.primitive = -1;
  best.color = scene.background.color;

  if (scene.background.type == Background::Type::kFarPlane && dir.z > 1e-12) {
    const double t = (scene.background.depth - origin.z) / dir.z;
    if (t > kRayEpsilon) {
      const Vec3 point = origin + t * dir;
      best.t = t;
      best.point = point;
      best.color = scene.background.texture.sample(point.x, point.y);
    }
  }

  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& p = scene.primitives[i];
    const Vec3 center = p.center_at(time);
    double t, u, v;
    const bool hit = p.type == Primitive::Type::kPlane
                         ? intersect_plane(p, center, origin, dir, &t, &u, &v)
                         : intersect_box(p, center, origin, dir, &t, &u, &v);
    if (hit && t < best.t) {
      best.t = t;
      best.primitive = static_cast<int>(i);
      best.point = origin + t * dir;
      best.color = p.texture.sample(u, v);
    }
  }
  return best;
}

Image render_view(const SceneSpec& scene, const CameraIntrinsics& intr, const CameraPose& pose,
                  double time) {
  intr.validate();
  pose.validate();
  check_camera_outside(scene, pose.translation, time);

  Image out(intr.width, intr.height, 3);
  parallel_for(0, intr.height, [&](int y) {
    for (int x = 0; x < intr.width; ++x) {
      const Vec3 dir_cam = unproject({static_cast<double>(x), static_cast<double>(y)}, intr);
      const Vec3 dir = pose.rotation * dir_cam;
      const RayHit hit = raycast(scene, pose.translation, dir, time);
      out.at(x, y, 0) = static_cast<float>(std::clamp(hit.color.x, 0.0, 1.0));
      out.at(x, y, 1) = static_cast<float>(std::clamp(hit.color.y, 0.0, 1.0));
      out.at(x, y, 2) = static_cast<float>(std::clamp(hit.color.z, 0.0, 1.0));
    }
  });
  return out;
}

Image render_cylinder_view(const SceneSpec& scene, Vec3 origin, const CylinderSpec& cyl,
                           double time, int x0, int x1) {
  cyl.validate();
  check_camera_outside(scene, origin, time);
  if (x1 < 0) x1 = cyl.width;
  require(x0 >= 0 && x1 <= cyl.width && x0 < x1, "render_cylinder_view: bad column range");

  Image out(x1 - x0, cyl.height, 3);
  parallel_for(0, cyl.height, [&](int y) {
    for (int x = x0; x < x1; ++x) {
      const Vec3 dir = cylinder_direction(cyl, x, y);
      const RayHit hit = raycast(scene, origin, dir, time);
      out.at(x - x0, y, 0) = static_cast<float>(std::clamp(hit.color.x, 0.0, 1.0));
      out.at(x - x0, y, 1) = static_cast<float>(std::clamp(hit.color.y, 0.0, 1.0));
      out.at(x - x0, y, 2) = static_cast<float>(std::clamp(hit.color.z, 0.0, 1.0));
    }
  });
  return out;
}

AnalyticFlowResult analytic_flow(const SceneSpec& scene, const RigCamera& cam_a,
                                 const RigCamera& cam_b, const CylinderSpec& cyl, double time,
                                 double depth_tolerance) {
  cyl.validate();
  AnalyticFlowResult result;
  result.flow = FlowField::zeros(cyl.width, cyl.height, false);
  result.occluded = Mask::full(cyl.width, cyl.height, false);

  const Mat3 rig_to_a = cam_a.pose.rotation.transposed();
  const Vec3 origin_a = cam_a.pose.translation;
  const Vec3 origin_b = cam_b.pose.translation;

  parallel_for(0, cyl.height, [&](int y) {
    for (int x = 0; x < cyl.width; ++x) {
      const Vec3 dir = cylinder_direction(cyl, x, y);
      // The flow is queried on cam_a's cylinder projection; pixels outside
      // its field of view carry no correspondence.
      if (!project(rig_to_a * dir, cam_a.intrinsics)) continue;

      const RayHit hit = raycast(scene, origin_a, dir, time);
      Vec3 target_dir = dir;
      double dist_b = kInfiniteDepth;
      if (hit.t < 0.5 * kInfiniteDepth) {
        const Vec3 to_point = hit.point - origin_b;
        dist_b = norm(to_point);
        if (dist_b < 1e-12) continue;
        target_dir = (1.0 / dist_b) * to_point;
      }
      const auto pixel = cylinder_pixel(cyl, target_dir);
      if (!pixel) continue;

      result.flow.du(x, y) = static_cast<float>(pixel->x - x);
      result.flow.dv(x, y) = static_cast<float>(pixel->y - y);
      result.flow.set_valid(x, y, true);

      const RayHit hit_b = raycast(scene, origin_b, target_dir, time);
      bool occluded;
      if (dist_b >= 0.5 * kInfiniteDepth) {
        occluded = hit_b.t < 0.5 * kInfiniteDepth;
      } else {
        const double tol = std::max(depth_tolerance, depth_tolerance * dist_b);
        occluded = hit_b.t < dist_b - tol;
      }
      result.occluded.set(x, y, occluded);
    }
  });
  return result;
}

Image render_ground_truth_panorama(const SceneSpec& scene, const CameraRig& rig, int slice_count,
                                   int slice_width, double time) {
  rig.validate();
  require(slice_count >= 1, "ground truth panorama: K must be >= 1");
  require(slice_width >= 1, "ground truth panorama: s must be >= 1");
  const CylinderSpec& cyl = rig.cylinder;
  const int w = cyl.width;

  const ReprojectionMap map_left =
      build_reprojection_map(rig.left.intrinsics, rig.left.pose, cyl);
  const ReprojectionMap map_mid = build_reprojection_map(rig.mid.intrinsics, rig.mid.pose, cyl);
  const ReprojectionMap map_right =
      build_reprojection_map(rig.right.intrinsics, rig.right.pose, cyl);
  const Image left_cyl =
      apply_reprojection(render_view(scene, rig.left.intrinsics, rig.left.pose, time), map_left);
  const Image mid_cyl =
      apply_reprojection(render_view(scene, rig.mid.intrinsics, rig.mid.pose, time), map_mid);
  const Image right_cyl = apply_reprojection(
      render_view(scene, rig.right.intrinsics, rig.right.pose, time), map_right);

  const TransitionSpec t_left = compute_transition(map_mid, slice_count, slice_width,
                                                   TransitionSide::kLeft, /*allow_shrink=*/false);
  const TransitionSpec t_right = compute_transition(map_mid, slice_count, slice_width,
                                                    TransitionSide::kRight, /*allow_shrink=*/false);
  const auto alphas = alpha_schedule(slice_count);

  Image out(w, cyl.height, 3, 0.0f, false);
  auto copy_cols = [&](const Image& src, int x0, int x1) {
    for (int y = 0; y < cyl.height; ++y)
      for (int x = x0; x < x1; ++x) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(x, y, c);
        out.set_valid(x, y, src.valid(x, y));
      }
  };
  auto paste_strip = [&](const Image& strip, int x0) {
    for (int y = 0; y < cyl.height; ++y)
      for (int x = 0; x < strip.width(); ++x) {
        for (int c = 0; c < 3; ++c) out.at(x0 + x, y, c) = strip.at(x, y, c);
        out.set_valid(x0 + x, y, strip.valid(x, y));
      }
  };

  // Left half: outgoing left view, K translated-slice renders, center view.
  copy_cols(left_cyl, 0, t_left.boundary);
  for (int k = 1; k <= slice_count; ++k) {
    const double a = alphas[static_cast<size_t>(k - 1)];
    const Vec3 origin =
        rig.left.pose.translation + a * (rig.mid.pose.translation - rig.left.pose.translation);
    const int x0 = t_left.boundary + (k - 1) * slice_width;
    paste_strip(render_cylinder_view(scene, origin, cyl, time, x0, x0 + slice_width), x0);
  }
  copy_cols(mid_cyl, t_left.end(), w / 2);

  // Right half, mirrored indices.
  copy_cols(mid_cyl, w / 2, w - t_right.end());
  for (int k = 1; k <= slice_count; ++k) {
    const double a = alphas[static_cast<size_t>(k - 1)];
    const Vec3 origin =
        rig.right.pose.translation + a * (rig.mid.pose.translation - rig.right.pose.translation);
    const int x0 = w - t_right.boundary - k * slice_width;
    paste_strip(render_cylinder_view(scene, origin, cyl, time, x0, x0 + slice_width), x0);
  }
  copy_cols(right_cyl, w - t_right.boundary, w);

  return out;
}

GroundTruthBundle generate_bundle(const SceneSpec& scene, const CameraRig& rig,
                                  const BundleParams& params, double time) {
  rig.validate();
  GroundTruthBundle bundle;
  bundle.left = render_view(scene, rig.left.intrinsics, rig.left.pose, time);
  bundle.mid = render_view(scene, rig.mid.intrinsics, rig.mid.pose, time);
  bundle.right = render_view(scene, rig.right.intrinsics, rig.right.pose, time);
  bundle.panorama =
      render_ground_truth_panorama(scene, rig, params.slice_count, params.slice_width, time);
  bundle.warp_left_to_mid =
      analytic_flow(scene, rig.mid, rig.left, rig.cylinder, time, params.depth_tolerance);
  bundle.warp_mid_to_left =
      analytic_flow(scene, rig.left, rig.mid, rig.cylinder, time, params.depth_tolerance);
  bundle.warp_right_to_mid =
      analytic_flow(scene, rig.mid, rig.right, rig.cylinder, time, params.depth_tolerance);
  bundle.warp_mid_to_right =
      analytic_flow(scene, rig.right, rig.mid, rig.cylinder, time, params.depth_tolerance);
  return bundle;
}

}  // namespace pushbroom
