#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plot/core.hpp"

namespace plot {

enum class DepthRange { near, mid, far };
inline constexpr std::array<DepthRange, 3> kDepthRanges = {DepthRange::near, DepthRange::mid,
                                                           DepthRange::far};
const char* to_string(DepthRange r);
// Near (0, 10], Mid (10, 30], Far (30, inf), by ground-truth depth.
DepthRange depth_range_of(double z);

struct TpMatch {
  std::vector<std::pair<int, int>> pairs;  // (pred, gt) indices into the inputs
  std::vector<int> false_positives;
  std::vector<int> false_negatives;
};

// Greedy matching in descending prediction score: each prediction takes the
// unmatched same-class ground truth with the highest 2D IoU, accepted when
// IoU >= iou_threshold. Boxes without a 2D box never match.
TpMatch match_tp(std::span<const Box3D> preds, std::span<const Box3D> gts,
                 double iou_threshold = 0.5);

// BEV center distance.
double ate(const Box3D& pred, const Box3D& gt);
// 1 - IoU of the two boxes after aligning centers and yaw.
double ase(const Box3D& pred, const Box3D& gt);
// |yaw difference| wrapped to [0, pi]; mod_pi folds further to [0, pi/2].
double aoe(const Box3D& pred, const Box3D& gt, bool mod_pi = false);

// IoU of the two yawed footprints in the x-z plane.
double bev_iou_rotated(const Box3D& a, const Box3D& b);
// BEV intersection times vertical overlap over the union of volumes.
double iou_3d(const Box3D& a, const Box3D& b);

// COCO-style AP over 2D IoU thresholds 0.50:0.05:0.95 with 101-point
// interpolation, for one class.
double ap2d(std::span<const Box3D> preds, std::span<const Box3D> gts);
// AP at a single 2D IoU threshold (101-point interpolation).
double ap2d_at(std::span<const Box3D> preds, std::span<const Box3D> gts, double threshold);

enum class ApMode { bev, three_d };
// 40-recall-position AP with 3D or BEV IoU matching, for one class.
double ap_kitti(std::span<const Box3D> preds, std::span<const Box3D> gts,
                double iou_threshold, ApMode mode);

struct RangeStats {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int gt = 0;
  double ate = 0.0;  // means over true positives; 0 when tp == 0
  double ase = 0.0;
  double aoe = 0.0;
  double ap2d = 0.0;
};

struct ClassReport {
  std::map<DepthRange, RangeStats> ranges;
  RangeStats overall;
  double ap3d = 0.0;
  double apbev = 0.0;
};

struct EvalOptions {
  bool mod_pi = false;
  double tp_iou = 0.5;
  double ap3d_iou = 0.5;
  bool with_ap3d = true;
};

// Frames are evaluated independently and aggregated; the key is any frame id.
struct FramePair {
  std::vector<Box3D> preds;
  std::vector<Box3D> gts;
};

struct EvalReport {
  std::map<std::string, ClassReport> classes;  // keyed by lower-case class
};

EvalReport evaluate(std::span<const FramePair> frames, const EvalOptions& opts = {});

std::string report_to_json(const EvalReport& report, int indent = 2);
// Aligned text table: AP2D, AOE, ATE, ASE, each over Near / Mid / Far.
std::string report_to_table(const EvalReport& report);

}  // namespace plot
