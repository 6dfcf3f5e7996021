#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "pushbroom/io.hpp"

namespace pushbroom {

namespace {

static_assert(std::endian::native == std::endian::little,
              "flow file I/O assumes a little-endian host");

constexpr char kFlowMagic[4] = {'P', 'I', 'E', 'H'};
constexpr float kInvalidSentinel = 1e10f;
constexpr float kSentinelThreshold = 1e9f;

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

FlowField read_flow(const std::filesystem::path& path) {
  FileCloser file{std::fopen(path.string().c_str(), "rb")};
  if (!file.f) throw IoError("cannot open " + path.string());

  char magic[4];
  if (std::fread(magic, 1, 4, file.f) != 4 || std::memcmp(magic, kFlowMagic, 4) != 0) {
    throw FormatError("bad flow magic in " + path.string());
  }
  std::int32_t w = 0;
  std::int32_t h = 0;
  if (std::fread(&w, 4, 1, file.f) != 1 || std::fread(&h, 4, 1, file.f) != 1) {
    throw FormatError("truncated flow header in " + path.string());
  }
  if (w <= 0 || h <= 0 || static_cast<long long>(w) * h > (1LL << 27)) {
    throw FormatError("unreasonable flow dimensions in " + path.string());
  }

  std::vector<float> payload(2 * static_cast<size_t>(w) * static_cast<size_t>(h));
  if (std::fread(payload.data(), 4, payload.size(), file.f) != payload.size()) {
    throw FormatError("truncated flow payload in " + path.string());
  }

  FlowField flow = FlowField::zeros(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = 2 * flow.index(x, y);
      const float du = payload[i];
      const float dv = payload[i + 1];
      if (!(std::abs(du) < kSentinelThreshold) || !(std::abs(dv) < kSentinelThreshold)) {
        flow.set_valid(x, y, false);
        continue;
      }
      flow.du(x, y) = du;
      flow.dv(x, y) = dv;
    }
  }
  return flow;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  require(flow.width > 0 && flow.height > 0, "write_flow: empty field");
  FileCloser file{std::fopen(path.string().c_str(), "wb")};
  if (!file.f) throw IoError("cannot open " + path.string() + " for writing");

  const std::int32_t w = flow.width;
  const std::int32_t h = flow.height;
  if (std::fwrite(kFlowMagic, 1, 4, file.f) != 4 || std::fwrite(&w, 4, 1, file.f) != 1 ||
      std::fwrite(&h, 4, 1, file.f) != 1) {
    throw IoError("short write to " + path.string());
  }
  std::vector<float> payload(2 * static_cast<size_t>(w) * static_cast<size_t>(h));
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = 2 * flow.index(x, y);
      if (flow.is_valid(x, y)) {
        payload[i] = flow.du(x, y);
        payload[i + 1] = flow.dv(x, y);
      } else {
        payload[i] = kInvalidSentinel;
        payload[i + 1] = kInvalidSentinel;
      }
    }
  }
  if (std::fwrite(payload.data(), 4, payload.size(), file.f) != payload.size()) {
    throw IoError("short write to " + path.string());
  }
}

}  // namespace pushbroom
