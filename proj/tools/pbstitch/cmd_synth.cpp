#include <cstdio>

#include "common.hpp"
#include "pushbroom/dataset.hpp"
#include "pushbroom/io.hpp"

namespace pbstitch {

int run_synth(const SynthOptions& opts) {
  const pushbroom::SceneSpec scene = pushbroom::load_scene(opts.scene_path);
  const pushbroom::CameraRig rig = pushbroom::load_rig(opts.rig_path);
  pushbroom::StitchConfig cfg;
  if (!opts.config_path.empty()) cfg = pushbroom::load_config(opts.config_path);

  pushbroom::BundleParams params;
  params.slice_count = cfg.slice_count;
  params.slice_width = cfg.slice_width;

  pushbroom::Dataset dataset = pushbroom::Dataset::create(opts.out_dir);
  for (int t = 0; t < opts.frames; ++t) {
    const pushbroom::GroundTruthBundle bundle =
        pushbroom::generate_bundle(scene, rig, params, static_cast<double>(t));
    dataset.write_bundle(t, bundle);
    std::printf("frame %06d: inputs, panorama, 4 flow fields, 4 occlusion masks\n", t);
  }
  std::printf("wrote %d frame(s) to %s (K=%d, s=%d)\n", opts.frames, opts.out_dir.c_str(),
              params.slice_count, params.slice_width);
  return 0;
}

}  // namespace pbstitch
