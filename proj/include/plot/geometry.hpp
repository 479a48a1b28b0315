#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "plot/assoc.hpp"
#include "plot/core.hpp"
#include "plot/scene.hpp"

namespace plot {

// Corresponded 3D points: target[i] observes the same surface point as
// source[i], each in its own frame's camera coordinates.
struct CorrespondenceSet {
  int source_frame = 0;
  int target_frame = 0;
  std::vector<Vec3> source;
  std::vector<Vec3> target;

  std::size_t size() const { return source.size(); }
  void add(const Vec3& s, const Vec3& t) {
    source.push_back(s);
    target.push_back(t);
  }
};

// Back-projects every pixel with positive finite depth; the rest are skipped
// and counted in *skipped. Throws empty_cloud when nothing survives.
PointCloud backproject(std::span<const Pixel> pixels, const DepthRaster& depth,
                       const CameraIntrinsics& K, int frame_tag = -1,
                       std::size_t* skipped = nullptr);
PointCloud backproject(const InstanceMask& mask, const DepthRaster& depth,
                       const CameraIntrinsics& K, std::size_t* skipped = nullptr);

// Bilinear depth at a sub-pixel location. Falls back to the nearest pixel
// when the four neighbours span more than discontinuity meters or any of
// them is invalid. nullopt outside the raster or on invalid depth.
std::optional<double> sample_depth(const DepthRaster& depth, double u, double v,
                                   double discontinuity = 1.0);

// Visible tracked points whose endpoints both have valid depth. With a
// target mask, points landing (rounded) off the mask are dropped too; near
// silhouette edges they would otherwise pick up background depth.
CorrespondenceSet extract_correspondences(const TrackedMask& tm,
                                          const DepthRaster& depth_src,
                                          const DepthRaster& depth_tgt,
                                          const CameraIntrinsics& K,
                                          const InstanceMask* target_mask = nullptr);

struct Registration {
  SimilarityTransform transform;
  double rms = 0.0;  // meters, over the pairs used in the final fit
  std::size_t used = 0;
};

// Closed-form least-squares similarity (or rigid, when estimate_scale is
// false) mapping source onto target, with reflection guard.
Registration procrustes(const CorrespondenceSet& c, bool estimate_scale = true);

struct RegistrationConfig {
  std::size_t min_correspondences = 10;
  bool rigid_only = false;
  bool trimming = true;
  double trim_factor = 3.0;
  // Residuals below this never count as outliers; keeps exact data intact.
  double trim_floor = 1e-3;
};

// procrustes with the minimum-size gate and one round of residual trimming.
Registration register_pair(const CorrespondenceSet& c, const RegistrationConfig& cfg);

// Fitted transforms between frames of one tracklet, keyed (source, target).
struct PairwiseRegistrations {
  std::vector<int> frames;
  std::map<std::pair<int, int>, Registration> fits;

  const Registration* find(int source, int target) const;
};

// Correspondences between two tracklet frames, gathered from the tracks of
// either frame's detection into the other.
CorrespondenceSet tracklet_correspondences(const ObjectTracklet& t, int source,
                                           int target, const SceneBundle& scene);

PairwiseRegistrations register_tracklet(const ObjectTracklet& t,
                                        const SceneBundle& scene,
                                        const RegistrationConfig& cfg);

// Frame minimizing the summed RMS of registrations into it, among the
// frames with the most successful incoming registrations. Sums within
// tie_tolerance are ties, broken by larger detected mask, then lower index.
// nullopt when no registration succeeded.
std::optional<int> select_target_frame(const ObjectTracklet& t,
                                       const PairwiseRegistrations& regs,
                                       double tie_tolerance = 1e-9);

struct Completion {
  PointCloud cloud;  // target-frame camera coordinates, tagged by source frame
  int target_frame = 0;
  std::vector<int> skipped_frames;
};

// Union of every entry's back-projected mask mapped into target_frame.
Completion complete_pseudolidar(const ObjectTracklet& t, const SceneBundle& scene,
                                const PairwiseRegistrations& regs, int target_frame);

}  // namespace plot
