#include "pushbroom/image.hpp"

#include <algorithm>
#include <cmath>

#include "pushbroom/parallel.hpp"

namespace pushbroom {

Mask mask_and(const Mask& a, const Mask& b) {
  require(a.width == b.width && a.height == b.height, "mask_and: size mismatch");
  Mask out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = (a.data[i] && b.data[i]) ? 1 : 0;
  return out;
}

void Image::zero_invalid() {
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (!valid(x, y))
        for (int c = 0; c < channels_; ++c) at(x, y, c) = 0.0f;
}

bool bilinear_sample(const Image& img, float sx, float sy, float* out) {
  const int w = img.width();
  const int h = img.height();
  if (!(sx >= 0.0f && sy >= 0.0f && sx <= static_cast<float>(w - 1) &&
        sy <= static_cast<float>(h - 1))) {
    return false;
  }
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const float fx = sx - static_cast<float>(x0);
  const float fy = sy - static_cast<float>(y0);
  const int x1 = fx > 0.0f ? x0 + 1 : x0;
  const int y1 = fy > 0.0f ? y0 + 1 : y0;
  if (!img.valid(x0, y0) || !img.valid(x1, y0) || !img.valid(x0, y1) || !img.valid(x1, y1)) {
    return false;
  }
  const float w00 = (1.0f - fx) * (1.0f - fy);
  const float w10 = fx * (1.0f - fy);
  const float w01 = (1.0f - fx) * fy;
  const float w11 = fx * fy;
  for (int c = 0; c < img.channels(); ++c) {
    out[c] = w00 * img.at(x0, y0, c) + w10 * img.at(x1, y0, c) + w01 * img.at(x0, y1, c) +
             w11 * img.at(x1, y1, c);
  }
  return true;
}

Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  require(img.channels() == 3, "to_gray: expected 1 or 3 channels");
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(x, y, 0) =
          0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
      out.set_valid(x, y, img.valid(x, y));
    }
  }
  return out;
}

Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height(), img.channels());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = w - 1 - x;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(sx, y, c);
      out.set_valid(x, y, img.valid(sx, y));
    }
  }
  return out;
}

Mask flip_horizontal(const Mask& mask) {
  Mask out = mask;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) out.set(x, y, mask.at(mask.width - 1 - x, y));
  return out;
}

namespace {

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<size_t>(i + radius)] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();

  Image tmp(w, h, ch);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        float acc = 0.0f;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[static_cast<size_t>(i + radius)] * img.at(reflect(x + i, w), y, c);
        }
        tmp.at(x, y, c) = acc;
      }
    }
  });
  Image out(w, h, ch);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        float acc = 0.0f;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(x, reflect(y + i, h), c);
        }
        out.at(x, y, c) = acc;
      }
    }
  });
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.set_valid(x, y, img.valid(x, y));
  return out;
}

Image resize_bilinear(const Image& img, int new_width, int new_height) {
  require(new_width > 0 && new_height > 0, "resize_bilinear: bad target size");
  const int w = img.width();
  const int h = img.height();
  Image out(new_width, new_height, img.channels());
  const double sx = static_cast<double>(w) / new_width;
  const double sy = static_cast<double>(h) / new_height;
  parallel_for(0, new_height, [&](int y) {
    const double src_yf = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < new_width; ++x) {
      const double src_xf = (x + 0.5) * sx - 0.5;
      const double cx = std::clamp(src_xf, 0.0, static_cast<double>(w - 1));
      const double cy = std::clamp(src_yf, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(cx);
      const int y0 = static_cast<int>(cy);
      const float fx = static_cast<float>(cx - x0);
      const float fy = static_cast<float>(cy - y0);
      const int x1 = fx > 0.0f ? x0 + 1 : x0;
      const int y1 = fy > 0.0f ? y0 + 1 : y0;
      const bool ok =
          img.valid(x0, y0) && img.valid(x1, y0) && img.valid(x0, y1) && img.valid(x1, y1);
      for (int c = 0; c < img.channels(); ++c) {
        const float v = (1 - fx) * (1 - fy) * img.at(x0, y0, c) + fx * (1 - fy) * img.at(x1, y0, c) +
                        (1 - fx) * fy * img.at(x0, y1, c) + fx * fy * img.at(x1, y1, c);
        out.at(x, y, c) = ok ? v : 0.0f;
      }
      out.set_valid(x, y, ok);
    }
  });
  return out;
}

}  // namespace pushbroom
