#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "pushbroom/io.hpp"

namespace pushbroom {

namespace {

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void quiet_png_error(png_structp png, png_const_charp) { longjmp(png_jmpbuf(png), 1); }
void quiet_png_warning(png_structp, png_const_charp) {}

const float* srgb_decode_table() {
  static float table[256];
  static bool ready = [] {
    for (int i = 0; i < 256; ++i) {
      const double s = i / 255.0;
      table[i] = static_cast<float>(s <= 0.04045 ? s / 12.92
                                                 : std::pow((s + 0.055) / 1.055, 2.4));
    }
    return true;
  }();
  (void)ready;
  return table;
}

Image from_rgba8(const std::vector<std::uint8_t>& rgba, int w, int h) {
  const float* table = srgb_decode_table();
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = 4 * (static_cast<size_t>(y) * w + x);
      const bool valid = rgba[i + 3] >= 128;
      img.set_valid(x, y, valid);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = valid ? table[rgba[i + c]] : 0.0f;
    }
  }
  return img;
}

void to_rgb8(const Image& img, int x, int y, std::uint8_t* out) {
  if (img.channels() == 1) {
    const std::uint8_t v = linear_to_srgb8(img.at(x, y, 0));
    out[0] = out[1] = out[2] = v;
  } else {
    for (int c = 0; c < 3; ++c) out[c] = linear_to_srgb8(img.at(x, y, c));
  }
}

Image read_png(const std::filesystem::path& path) {
  FileCloser file{std::fopen(path.string().c_str(), "rb")};
  if (!file.f) throw IoError("cannot open " + path.string());

  std::uint8_t sig[8];
  if (std::fread(sig, 1, 8, file.f) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_png_error,
                                           quiet_png_warning);
  if (!png) throw IoError("libpng init failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed for " + path.string());
  }

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  int w = 0;
  int h = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG file: " + path.string());
  }

  png_init_io(png, file.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  if (w <= 0 || h <= 0 || static_cast<long long>(w) * h > (1LL << 28)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unreasonable PNG dimensions in " + path.string());
  }

  png_set_strip_16(png);
  png_set_packing(png);
  const png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  pixels.assign(4 * static_cast<size_t>(w) * static_cast<size_t>(h), 0);
  rows.resize(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = &pixels[4 * static_cast<size_t>(y) * w];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return from_rgba8(pixels, w, h);
}

void write_png(const std::filesystem::path& path, const Image& img) {
  FileCloser file{std::fopen(path.string().c_str(), "wb")};
  if (!file.f) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_png_error,
                                            quiet_png_warning);
  if (!png) throw IoError("libpng init failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed for " + path.string());
  }

  const int w = img.width();
  const int h = img.height();
  std::vector<std::uint8_t> rgba(4 * static_cast<size_t>(w) * static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t* px = &rgba[4 * (static_cast<size_t>(y) * w + x)];
      to_rgb8(img, x, y, px);
      px[3] = img.valid(x, y) ? 255 : 0;
    }
  }
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = &rgba[4 * static_cast<size_t>(y) * w];

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for " + path.string());
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_ppm(const std::filesystem::path& path) {
  FileCloser file{std::fopen(path.string().c_str(), "rb")};
  if (!file.f) throw IoError("cannot open " + path.string());

  auto next_token = [&]() -> long {
    int ch = std::fgetc(file.f);
    while (ch != EOF) {
      if (ch == '#') {
        while (ch != EOF && ch != '\n') ch = std::fgetc(file.f);
      } else if (!std::isspace(ch)) {
        break;
      }
      ch = std::fgetc(file.f);
    }
    if (ch == EOF) throw FormatError("truncated PPM header: " + path.string());
    long value = 0;
    bool any = false;
    while (ch != EOF && std::isdigit(ch)) {
      value = value * 10 + (ch - '0');
      any = true;
      if (value > 1000000) throw FormatError("unreasonable PPM header value: " + path.string());
      ch = std::fgetc(file.f);
    }
    if (!any) throw FormatError("malformed PPM header: " + path.string());
    return value;
  };

  char magic[2];
  if (std::fread(magic, 1, 2, file.f) != 2 || magic[0] != 'P' || magic[1] != '6') {
    throw FormatError("not a P6 PPM file: " + path.string());
  }
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || w * h > (1L << 28)) {
    throw FormatError("unreasonable PPM dimensions in " + path.string());
  }
  if (maxval != 255) throw FormatError("unsupported PPM maxval in " + path.string());

  std::vector<std::uint8_t> rgb(3 * static_cast<size_t>(w) * static_cast<size_t>(h));
  if (std::fread(rgb.data(), 1, rgb.size(), file.f) != rgb.size()) {
    throw FormatError("truncated PPM payload: " + path.string());
  }
  const float* table = srgb_decode_table();
  Image img(static_cast<int>(w), static_cast<int>(h), 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = table[rgb[3 * (static_cast<size_t>(y) * w + x) + c]];
      }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  FileCloser file{std::fopen(path.string().c_str(), "wb")};
  if (!file.f) throw IoError("cannot open " + path.string() + " for writing");
  std::fprintf(file.f, "P6\n%d %d\n255\n", img.width(), img.height());
  std::vector<std::uint8_t> row(3 * static_cast<size_t>(img.width()));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) to_rgb8(img, x, y, &row[3 * static_cast<size_t>(x)]);
    if (std::fwrite(row.data(), 1, row.size(), file.f) != row.size()) {
      throw IoError("short write to " + path.string());
    }
  }
}

}  // namespace

std::uint8_t linear_to_srgb8(float v) {
  const double x = std::min(1.0, std::max(0.0, static_cast<double>(v)));
  const double s = x <= 0.0031308 ? 12.92 * x : 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
  return static_cast<std::uint8_t>(std::lround(255.0 * s));
}

float srgb8_to_linear(std::uint8_t v) { return srgb_decode_table()[v]; }

Image read_frame(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm") return read_ppm(path);
  throw IoError("unsupported frame format: " + path.string());
}

void write_frame(const std::filesystem::path& path, const Image& img) {
  require(!img.empty(), "write_frame: empty image");
  require(img.channels() == 1 || img.channels() == 3,
          "write_frame: only 1- or 3-channel images");
  const auto ext = path.extension().string();
  if (ext == ".png") {
    write_png(path, img);
  } else if (ext == ".ppm") {
    write_ppm(path, img);
  } else {
    throw IoError("unsupported frame format: " + path.string());
  }
}

}  // namespace pushbroom
