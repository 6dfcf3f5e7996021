#include "pushbroom/dataset.hpp"

#include <array>
#include <cstdio>

#include "pushbroom/errors.hpp"
#include "pushbroom/io.hpp"

namespace pushbroom {

namespace {

const std::array<FlowKind, 4> kAllFlowKinds = {FlowKind::kLeftToMid, FlowKind::kMidToLeft,
                                               FlowKind::kRightToMid, FlowKind::kMidToRight};

int count_stream(const std::filesystem::path& dir, const std::string& suffix) {
  int count = 0;
  while (std::filesystem::exists(dir / (DatasetLayout::frame_name(count, "") + suffix))) ++count;
  return count;
}

}  // namespace

const char* flow_kind_tag(FlowKind kind) {
  switch (kind) {
    case FlowKind::kLeftToMid: return "lm";
    case FlowKind::kMidToLeft: return "ml";
    case FlowKind::kRightToMid: return "rm";
    case FlowKind::kMidToRight: return "mr";
  }
  return "??";
}

std::string DatasetLayout::frame_name(int index, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return std::string(buf) + ext;
}

std::filesystem::path DatasetLayout::frame_path(const std::string& stream, int index,
                                                const std::string& ext) const {
  return root / stream / frame_name(index, ext);
}

std::filesystem::path DatasetLayout::flow_path(int index, FlowKind kind) const {
  return root / "flow_gt" / (frame_name(index, "") + "_" + flow_kind_tag(kind) + ".flo");
}

std::filesystem::path DatasetLayout::occlusion_path(int index, FlowKind kind) const {
  return root / "occ_gt" / (frame_name(index, "") + "_" + flow_kind_tag(kind) + ".png");
}

Dataset Dataset::open(const std::filesystem::path& root) {
  Dataset ds;
  ds.layout.root = root;
  if (!std::filesystem::is_directory(root)) {
    throw IoError("dataset root does not exist: " + root.string());
  }
  for (const char* stream : {"left", "mid", "right"}) {
    if (!std::filesystem::is_directory(root / stream)) {
      throw IoError("dataset is missing the '" + std::string(stream) + "' stream in " +
                    root.string());
    }
  }
  ds.frame_count = count_stream(root / "left", ".png");
  if (ds.frame_count == 0) {
    throw IoError("dataset has no frames (expected left/000000.png) in " + root.string());
  }
  for (const char* stream : {"mid", "right"}) {
    const int n = count_stream(root / stream, ".png");
    if (n != ds.frame_count) {
      throw IoError("dataset stream '" + std::string(stream) + "' has " + std::to_string(n) +
                    " frames but 'left' has " + std::to_string(ds.frame_count));
    }
  }
  // Optional streams: an empty directory counts as absent.
  const int pano_count = std::filesystem::is_directory(root / "pano_gt")
                             ? count_stream(root / "pano_gt", ".png")
                             : 0;
  if (pano_count > 0) {
    if (pano_count != ds.frame_count) {
      throw IoError("dataset stream 'pano_gt' has " + std::to_string(pano_count) +
                    " frames but inputs have " + std::to_string(ds.frame_count));
    }
    ds.has_panorama = true;
  }
  if (std::filesystem::is_directory(root / "flow_gt") &&
      std::filesystem::exists(ds.layout.flow_path(0, FlowKind::kLeftToMid))) {
    for (int i = 0; i < ds.frame_count; ++i) {
      for (FlowKind kind : kAllFlowKinds) {
        if (!std::filesystem::exists(ds.layout.flow_path(i, kind))) {
          throw IoError("dataset flow stream is missing " + ds.layout.flow_path(i, kind).string());
        }
      }
    }
    ds.has_flows = true;
  }
  return ds;
}

Dataset Dataset::create(const std::filesystem::path& root) {
  Dataset ds;
  ds.layout.root = root;
  for (const char* dir : {"left", "mid", "right", "pano_gt", "flow_gt", "occ_gt"}) {
    std::filesystem::create_directories(root / dir);
  }
  return ds;
}

void Dataset::write_bundle(int index, const GroundTruthBundle& bundle) {
  write_frame(layout.frame_path("left", index), bundle.left);
  write_frame(layout.frame_path("mid", index), bundle.mid);
  write_frame(layout.frame_path("right", index), bundle.right);
  write_frame(layout.frame_path("pano_gt", index), bundle.panorama);

  const std::array<const AnalyticFlowResult*, 4> flows = {
      &bundle.warp_left_to_mid, &bundle.warp_mid_to_left, &bundle.warp_right_to_mid,
      &bundle.warp_mid_to_right};
  for (size_t i = 0; i < flows.size(); ++i) {
    const FlowKind kind = kAllFlowKinds[i];
    write_flow(layout.flow_path(index, kind), flows[i]->flow);
    const Mask& occ = flows[i]->occluded;
    Image occ_img(occ.width, occ.height, 1);
    for (int y = 0; y < occ.height; ++y)
      for (int x = 0; x < occ.width; ++x) occ_img.at(x, y, 0) = occ.at(x, y) ? 1.0f : 0.0f;
    write_frame(layout.occlusion_path(index, kind), occ_img);
  }
  frame_count = std::max(frame_count, index + 1);
}

}  // namespace pushbroom
