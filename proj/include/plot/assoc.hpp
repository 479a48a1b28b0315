#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plot/core.hpp"
#include "plot/scene.hpp"

namespace plot {

struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  // (tracked, detected), ascending tracked
  std::vector<int> unmatched_tracked;
  std::vector<int> unmatched_detected;
};

// Max-total-IoU one-to-one assignment over a tracked x detected IoU matrix;
// assigned pairs below min_iou are demoted to unmatched.
MatchResult match_by_iou(const Eigen::MatrixXd& iou, double min_iou);

// Builds the IoU matrix from pixel sets (tracked masks rasterized on the
// detections' frame) and solves it with match_by_iou.
MatchResult match_masks(std::span<const std::vector<Pixel>> tracked,
                        std::span<const InstanceMask> detected, double min_iou);

enum class EntryOrigin { detected, supplemented };

struct TrackletEntry {
  int frame = 0;
  InstanceMask mask;
  Box2D box;
  EntryOrigin origin = EntryOrigin::detected;
  int mask_id = -1;      // detection id; -1 when supplemented
  int donor_frame = -1;  // frame whose tracked mask filled this entry

  bool detected() const { return origin == EntryOrigin::detected; }
};

// One physical object's observations across the frame window.
struct ObjectTracklet {
  int object_id = 0;
  std::string class_label;
  std::vector<TrackletEntry> entries;  // ascending frame, at most one per frame

  const TrackletEntry* entry_at(int frame) const;
  int detected_count() const;
  double max_confidence() const;
};

struct AssocConfig {
  double min_iou = 0.3;  // tau_match
  int min_observations = 2;
  double min_confidence = 0.5;
  // Confidence assigned to supplemented labels relative to their donor.
  double supplement_confidence_factor = 0.9;
};

// Pairwise Hungarian matching between every ordered pair of window frames,
// merged with a frame-exclusive union-find: pairs are merged in descending
// IoU order, and a merge that would put two detections of the same frame
// into one object is refused.
std::vector<ObjectTracklet> build_tracklets(const SceneBundle& scene,
                                            std::span<const int> window,
                                            const AssocConfig& cfg);

// Drops weak tracklets (fewer than min_observations detections and no
// detection reaching min_confidence) and fills frames without a detection
// from the tracked mask of the donor frame with the highest visible fraction.
std::vector<ObjectTracklet> improve_labels(std::vector<ObjectTracklet> tracklets,
                                           const SceneBundle& scene,
                                           std::span<const int> window,
                                           const AssocConfig& cfg);

// Confidence-weighted vote over detected entries. Ties go to the class
// holding the single most confident detection, then to the
// lexicographically smallest label.
std::string resolve_class(const ObjectTracklet& tracklet);

}  // namespace plot
