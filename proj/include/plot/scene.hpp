#pragma once

#include <compare>
#include <map>
#include <vector>

#include "plot/core.hpp"

namespace plot {

// Metric depth per pixel, row-major float32.
struct DepthRaster {
  ImageSize size;
  std::vector<float> values;

  DepthRaster() = default;
  DepthRaster(ImageSize s, float fill)
      : size(s), values(static_cast<std::size_t>(s.width) * s.height, fill) {}

  float at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * size.width + u];
  }
  float& at(int u, int v) {
    return values[static_cast<std::size_t>(v) * size.width + u];
  }

  bool operator==(const DepthRaster&) const = default;
};

struct Detection {
  int mask_id = 0;
  InstanceMask mask;
  Box2D box;

  bool operator==(const Detection&) const = default;
};

struct Frame {
  int index = 0;
  DepthRaster depth;
  std::vector<Detection> detections;  // sorted by mask_id

  const Detection* find(int mask_id) const;
  bool operator==(const Frame&) const = default;
};

struct TrackKey {
  int source_frame = 0;
  int mask_id = 0;
  auto operator<=>(const TrackKey&) const = default;
};

// Everything the pipeline consumes for one scene: depth, detections and
// tracks for a contiguous run of frames under one camera.
struct SceneBundle {
  CameraIntrinsics intrinsics;
  ImageSize image_size;
  std::vector<Frame> frames;  // contiguous, ascending index
  // Tracked masks of one detection, one per target frame, ascending target.
  std::map<TrackKey, std::vector<TrackedMask>> tracks;

  bool has_frame(int index) const;
  const Frame& frame(int index) const;
  const TrackedMask* find_track(int source_frame, int mask_id,
                                int target_frame) const;
  std::vector<int> frame_indices() const;

  // Checks every structural invariant; throws Error(validation) naming the
  // offending frame / mask / track.
  void validate() const;
  // Sorts detections and tracks into canonical order.
  void canonicalize();

  bool operator==(const SceneBundle&) const = default;
};

}  // namespace plot
