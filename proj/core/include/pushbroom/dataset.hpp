#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pushbroom/scene.hpp"

namespace pushbroom {

/// Directed flow/occlusion stream names. "lm" is the field that
/// backward-warps the left view into the mid view's geometry, and so on.
enum class FlowKind { kLeftToMid, kMidToLeft, kRightToMid, kMidToRight };
const char* flow_kind_tag(FlowKind kind);

/// On-disk dataset layout:
///   root/left, root/mid, root/right : input frames, 000000.png ...
///   root/pano_gt                    : ground-truth panoramas
///   root/flow_gt                    : 000000_lm.flo ... (4 per frame)
///   root/occ_gt                     : 000000_lm.png ... occlusion masks
/// Frame indices are contiguous from 000000 and all present streams agree
/// on the frame count.
struct DatasetLayout {
  std::filesystem::path root;

  std::filesystem::path stream_dir(const std::string& stream) const { return root / stream; }
  std::filesystem::path frame_path(const std::string& stream, int index,
                                   const std::string& ext = ".png") const;
  std::filesystem::path flow_path(int index, FlowKind kind) const;
  std::filesystem::path occlusion_path(int index, FlowKind kind) const;

  static std::string frame_name(int index, const std::string& ext = ".png");
};

struct Dataset {
  DatasetLayout layout;
  int frame_count = 0;
  bool has_panorama = false;
  bool has_flows = false;

  /// Scans and validates an existing dataset; throws IoError when a
  /// required stream is missing, indices are non-contiguous, or stream
  /// frame counts disagree.
  static Dataset open(const std::filesystem::path& root);

  /// Creates the directory structure for writing.
  static Dataset create(const std::filesystem::path& root);

  void write_bundle(int index, const GroundTruthBundle& bundle);
};

}  // namespace pushbroom
