#pragma once

#include <filesystem>
#include <string>

#include "pushbroom/camera.hpp"
#include "pushbroom/flow.hpp"
#include "pushbroom/image.hpp"
#include "pushbroom/scene.hpp"
#include "pushbroom/stitch.hpp"

namespace pushbroom {

/// Frame I/O. Dispatch by extension: ".png" (lossless 8-bit, RGBA when the
/// image has any invalid pixel, alpha carrying the mask) or ".ppm" (P6,
/// debugging, mask dropped). Values convert between linear light and 8-bit
/// sRGB with the standard transfer curve.
Image read_frame(const std::filesystem::path& path);
void write_frame(const std::filesystem::path& path, const Image& img);

/// sRGB transfer helpers (8-bit quantization).
std::uint8_t linear_to_srgb8(float v);
float srgb8_to_linear(std::uint8_t v);

/// Middlebury flow layout: 4-byte magic "PIEH", int32 width, int32 height,
/// then row-major interleaved (du, dv) little-endian float32. Pixels
/// masked invalid round-trip through a 1e10 sentinel.
FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);

/// JSON documents; unknown fields are rejected with the offending path.
CameraRig load_rig(const std::filesystem::path& path);
SceneSpec load_scene(const std::filesystem::path& path);
StitchConfig load_config(const std::filesystem::path& path);

CameraRig parse_rig(const std::string& json_text, const std::string& origin = "<string>");
SceneSpec parse_scene(const std::string& json_text, const std::string& origin = "<string>");
StitchConfig parse_config(const std::string& json_text, const std::string& origin = "<string>");

}  // namespace pushbroom
