#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pushbroom/io.hpp"

namespace pushbroom {

namespace {

using nlohmann::json;

/// Strict view of a JSON object: every key must be consumed, unknown keys
/// are rejected with their full path.
class ObjectView {
 public:
  ObjectView(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  const json& get(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(path_ + "." + key + ": missing required field");
    seen_.insert(key);
    return *it;
  }

  const json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  double number(const std::string& key) { return as_number(get(key), key); }
  double number_or(const std::string& key, double fallback) {
    const json* j = find(key);
    return j ? as_number(*j, key) : fallback;
  }
  int integer(const std::string& key) { return as_integer(get(key), key); }
  int integer_or(const std::string& key, int fallback) {
    const json* j = find(key);
    return j ? as_integer(*j, key) : fallback;
  }
  bool boolean_or(const std::string& key, bool fallback) {
    const json* j = find(key);
    if (!j) return fallback;
    if (!j->is_boolean()) throw ParseError(path_ + "." + key + ": expected a boolean");
    return j->get<bool>();
  }
  std::string str(const std::string& key) {
    const json& j = get(key);
    if (!j.is_string()) throw ParseError(path_ + "." + key + ": expected a string");
    return j.get<std::string>();
  }
  std::string str_or(const std::string& key, const std::string& fallback) {
    const json* j = find(key);
    if (!j) return fallback;
    if (!j->is_string()) throw ParseError(path_ + "." + key + ": expected a string");
    return j->get<std::string>();
  }

  template <size_t N>
  std::array<double, N> numbers(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array() || j.size() != N) {
      throw ParseError(path_ + "." + key + ": expected an array of " + std::to_string(N) +
                       " numbers");
    }
    std::array<double, N> out{};
    for (size_t i = 0; i < N; ++i) out[i] = as_number(j[i], key + "[" + std::to_string(i) + "]");
    return out;
  }

  const std::string& path() const { return path_; }

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ParseError(path_ + "." + key + ": unknown field");
    }
  }

 private:
  double as_number(const json& j, const std::string& key) const {
    if (!j.is_number()) throw ParseError(path_ + "." + key + ": expected a number");
    return j.get<double>();
  }
  int as_integer(const json& j, const std::string& key) const {
    if (!j.is_number_integer()) throw ParseError(path_ + "." + key + ": expected an integer");
    return j.get<int>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_document(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError(origin + ": invalid JSON");
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Vec3 as_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

Mat3 parse_rotation(ObjectView& obj, const std::string& key) {
  const auto r = obj.numbers<9>(key);
  Mat3 m;
  for (size_t i = 0; i < 9; ++i) m.m[i] = r[i];
  if (!is_rotation_matrix(m, 1e-6)) {
    throw ParseError(obj.path() + "." + key +
                     ": not an orthonormal rotation with determinant +1");
  }
  return m;
}

RigCamera parse_camera(const json& j, const std::string& path) {
  ObjectView obj(j, path);
  RigCamera cam;
  const std::string model = obj.str("model");
  if (model == "pinhole") {
    cam.intrinsics.model = CameraModel::kPinhole;
  } else if (model == "equidistant_fisheye") {
    cam.intrinsics.model = CameraModel::kEquidistantFisheye;
  } else {
    throw ParseError(path + ".model: expected \"pinhole\" or \"equidistant_fisheye\"");
  }
  const auto focal = obj.numbers<2>("focal");
  cam.intrinsics.focal = {focal[0], focal[1]};
  const auto pp = obj.numbers<2>("principal_point");
  cam.intrinsics.principal = {pp[0], pp[1]};
  const auto res = obj.numbers<2>("resolution");
  cam.intrinsics.width = static_cast<int>(res[0]);
  cam.intrinsics.height = static_cast<int>(res[1]);
  if (cam.intrinsics.model == CameraModel::kEquidistantFisheye) {
    cam.intrinsics.fisheye_fov = obj.number("fisheye_fov");
  } else if (obj.find("fisheye_fov")) {
    throw ParseError(path + ".fisheye_fov: only valid for equidistant_fisheye cameras");
  }
  cam.pose.rotation = parse_rotation(obj, "rotation");
  cam.pose.translation = as_vec3(obj.numbers<3>("translation"));
  obj.finish();
  try {
    cam.intrinsics.validate();
    cam.pose.validate();
  } catch (const ContractError& e) {
    throw ParseError(path + ": " + e.what());
  }
  return cam;
}

Texture parse_texture(const json& j, const std::string& path) {
  ObjectView obj(j, path);
  Texture t;
  const std::string kind = obj.str("kind");
  if (kind == "checker") {
    t.kind = Texture::Kind::kChecker;
  } else if (kind == "stripes") {
    t.kind = Texture::Kind::kStripes;
  } else if (kind == "noise") {
    t.kind = Texture::Kind::kNoise;
  } else if (kind == "sine") {
    t.kind = Texture::Kind::kSine;
  } else {
    throw ParseError(path + ".kind: expected checker|stripes|noise|sine");
  }
  t.scale = obj.number_or("scale", 1.0);
  if (t.scale <= 0.0) throw ParseError(path + ".scale: must be positive");
  const int seed = obj.integer_or("seed", 0);
  if (seed < 0) throw ParseError(path + ".seed: must be >= 0");
  t.seed = static_cast<std::uint32_t>(seed);
  if (j.contains("color_a")) t.color_a = as_vec3(obj.numbers<3>("color_a"));
  if (j.contains("color_b")) t.color_b = as_vec3(obj.numbers<3>("color_b"));
  obj.finish();
  return t;
}

}  // namespace

CameraRig parse_rig(const std::string& json_text, const std::string& origin) {
  const json doc = parse_document(json_text, origin);
  ObjectView root(doc, origin);
  ObjectView cameras(root.get("cameras"), origin + ".cameras");
  CameraRig rig;
  rig.left = parse_camera(cameras.get("left"), origin + ".cameras.left");
  rig.mid = parse_camera(cameras.get("mid"), origin + ".cameras.mid");
  rig.right = parse_camera(cameras.get("right"), origin + ".cameras.right");
  cameras.finish();

  ObjectView cyl(root.get("cylinder"), origin + ".cylinder");
  rig.cylinder.width = cyl.integer("width");
  rig.cylinder.height = cyl.integer("height");
  rig.cylinder.horizontal_fov = cyl.number("horizontal_fov");
  rig.cylinder.vertical_extent = cyl.number("vertical_extent");
  cyl.finish();
  root.finish();

  try {
    rig.validate();
  } catch (const ContractError& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return rig;
}

SceneSpec parse_scene(const std::string& json_text, const std::string& origin) {
  const json doc = parse_document(json_text, origin);
  ObjectView root(doc, origin);
  SceneSpec scene;

  if (const json* bg = root.find("background")) {
    ObjectView obj(*bg, origin + ".background");
    const std::string type = obj.str("type");
    if (type == "color") {
      scene.background.type = Background::Type::kColor;
      if (bg->contains("color")) scene.background.color = as_vec3(obj.numbers<3>("color"));
    } else if (type == "far_plane") {
      scene.background.type = Background::Type::kFarPlane;
      scene.background.depth = obj.number("depth");
      if (scene.background.depth <= 0.0) {
        throw ParseError(origin + ".background.depth: must be positive");
      }
      scene.background.texture =
          parse_texture(obj.get("texture"), origin + ".background.texture");
    } else {
      throw ParseError(origin + ".background.type: expected color|far_plane");
    }
    obj.finish();
  }

  if (const json* prims = root.find("primitives")) {
    if (!prims->is_array()) throw ParseError(origin + ".primitives: expected an array");
    for (size_t i = 0; i < prims->size(); ++i) {
      const std::string path = origin + ".primitives[" + std::to_string(i) + "]";
      ObjectView obj((*prims)[i], path);
      Primitive p;
      const std::string type = obj.str("type");
      if (type == "plane") {
        p.type = Primitive::Type::kPlane;
        const auto size = obj.numbers<2>("size");
        p.size = {size[0], size[1], 0.0};
        if ((*prims)[i].contains("rotation")) p.rotation = parse_rotation(obj, "rotation");
      } else if (type == "box") {
        p.type = Primitive::Type::kBox;
        const auto size = obj.numbers<3>("size");
        p.size = {size[0], size[1], size[2]};
      } else {
        throw ParseError(path + ".type: expected plane|box");
      }
      if (p.size.x <= 0.0 || p.size.y <= 0.0 ||
          (p.type == Primitive::Type::kBox && p.size.z <= 0.0)) {
        throw ParseError(path + ".size: extents must be positive");
      }
      p.center = as_vec3(obj.numbers<3>("center"));
      if ((*prims)[i].contains("velocity")) p.velocity = as_vec3(obj.numbers<3>("velocity"));
      p.texture = parse_texture(obj.get("texture"), path + ".texture");
      obj.finish();
      scene.primitives.push_back(p);
    }
  }
  root.finish();
  return scene;
}

StitchConfig parse_config(const std::string& json_text, const std::string& origin) {
  const json doc = parse_document(json_text, origin);
  ObjectView root(doc, origin);
  StitchConfig cfg;
  cfg.slice_count = root.integer_or("K", cfg.slice_count);
  cfg.slice_width = root.integer_or("s", cfg.slice_width);

  const std::string refine = root.str_or("refine", "deterministic");
  if (refine == "none") {
    cfg.refine = RefineMode::kNone;
  } else if (refine == "deterministic") {
    cfg.refine = RefineMode::kDeterministic;
  } else {
    throw ParseError(origin + ".refine: expected none|deterministic");
  }

  if (const json* flow = root.find("flow")) {
    ObjectView obj(*flow, origin + ".flow");
    cfg.flow.pyramid_levels = obj.integer_or("pyramid_levels", cfg.flow.pyramid_levels);
    cfg.flow.scale_factor =
        static_cast<float>(obj.number_or("scale_factor", cfg.flow.scale_factor));
    cfg.flow.smoothness_alpha =
        static_cast<float>(obj.number_or("smoothness_alpha", cfg.flow.smoothness_alpha));
    cfg.flow.iterations_per_level =
        obj.integer_or("iterations_per_level", cfg.flow.iterations_per_level);
    cfg.flow.median_filter_radius =
        obj.integer_or("median_filter_radius", cfg.flow.median_filter_radius);
    obj.finish();
  }

  if (const json* tr = root.find("transition")) {
    ObjectView obj(*tr, origin + ".transition");
    cfg.allow_shrink = obj.boolean_or("allow_shrink", cfg.allow_shrink);
    cfg.flow_on_crops = obj.boolean_or("flow_on_crops", cfg.flow_on_crops);
    cfg.crop_pad = obj.integer_or("crop_pad", cfg.crop_pad);
    obj.finish();
  }

  if (const json* vis = root.find("visibility")) {
    ObjectView obj(*vis, origin + ".visibility");
    cfg.visibility.fb_tau = static_cast<float>(obj.number_or("fb_tau", cfg.visibility.fb_tau));
    cfg.visibility.photo_beta =
        static_cast<float>(obj.number_or("photo_beta", cfg.visibility.photo_beta));
    cfg.visibility.median_radius = obj.integer_or("median_radius", cfg.visibility.median_radius);
    obj.finish();
  }
  root.finish();

  try {
    cfg.validate();
  } catch (const ContractError& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return cfg;
}

CameraRig load_rig(const std::filesystem::path& path) {
  return parse_rig(read_text(path), path.string());
}

SceneSpec load_scene(const std::filesystem::path& path) {
  return parse_scene(read_text(path), path.string());
}

StitchConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.string());
}

}  // namespace pushbroom
