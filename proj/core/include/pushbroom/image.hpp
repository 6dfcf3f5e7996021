#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pushbroom/errors.hpp"

namespace pushbroom {

/// Per-pixel validity mask. data is row-major, one byte per pixel,
/// nonzero meaning valid.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static Mask full(int width, int height, bool valid = true) {
    Mask m;
    m.width = width;
    m.height = height;
    m.data.assign(static_cast<size_t>(width) * static_cast<size_t>(height), valid ? 1 : 0);
    return m;
  }

  bool at(int x, int y) const {
    return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)] != 0;
  }
  void set(int x, int y, bool valid) {
    data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)] =
        valid ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
  }
  bool empty() const { return width == 0 || height == 0; }
};

Mask mask_and(const Mask& a, const Mask& b);

/// Raster of linear-light intensities in [0,1] with a validity mask.
/// Interleaved channel storage: data[(y*W + x)*C + c]. Invalid pixels
/// hold zeros by convention everywhere in the pipeline.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f, bool valid = true)
      : width_(width),
        height_(height),
        channels_(channels),
        data_(static_cast<size_t>(width) * static_cast<size_t>(height) *
                  static_cast<size_t>(channels),
              fill),
        mask_(static_cast<size_t>(width) * static_cast<size_t>(height), valid ? 1 : 0) {
    require(width > 0 && height > 0 && channels > 0, "Image: dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y, int c) const { return data_[sample_index(x, y, c)]; }
  float& at(int x, int y, int c) { return data_[sample_index(x, y, c)]; }

  bool valid(int x, int y) const { return mask_[pixel_index(x, y)] != 0; }
  void set_valid(int x, int y, bool valid) { mask_[pixel_index(x, y)] = valid ? 1 : 0; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  std::span<const std::uint8_t> mask_data() const { return mask_; }
  std::span<std::uint8_t> mask_data() { return mask_; }

  std::size_t pixel_index(int x, int y) const {
    return static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x);
  }
  std::size_t sample_index(int x, int y, int c) const {
    return pixel_index(x, y) * static_cast<size_t>(channels_) + static_cast<size_t>(c);
  }

  Mask mask() const {
    Mask m;
    m.width = width_;
    m.height = height_;
    m.data = mask_;
    return m;
  }
  void set_mask(const Mask& m) {
    require(m.width == width_ && m.height == height_, "set_mask: size mismatch");
    mask_ = m.data;
  }

  /// Writes zeros into every sample whose pixel is masked invalid.
  void zero_invalid();

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
  std::vector<std::uint8_t> mask_;
};

/// Bilinear sample of all channels at fractional coordinates (sx, sy),
/// where integer coordinates are pixel centers. Returns false (and leaves
/// out untouched) when the location is outside [0,W-1]x[0,H-1] or any
/// contributing (nonzero-weight) pixel is masked invalid. Zero-weight
/// neighbors are never touched, so sampling at exact integer coordinates
/// reproduces the stored values bit-exactly.
bool bilinear_sample(const Image& img, float sx, float sy, float* out);

/// Rec.601 luma; keeps the mask. Single channel images pass through.
Image to_gray(const Image& img);

Image flip_horizontal(const Image& img);
Mask flip_horizontal(const Mask& mask);

/// Separable Gaussian blur per channel, reflect border handling. The mask
/// is carried over untouched; intended for flow/metric internals operating
/// on fully valid rasters.
Image gaussian_blur(const Image& img, double sigma);

/// Bilinear resize (align-centers convention). The resized mask is strict:
/// a pixel is valid only when every contributing source pixel was valid.
Image resize_bilinear(const Image& img, int new_width, int new_height);

}  // namespace pushbroom
