#pragma once

#include <Eigen/Core>

#include <string>

#include "plot/core.hpp"

namespace plot {

struct ClipConfig {
  int num_bins = 64;            // N_b
  double upper_fraction = 0.6;  // tau

  void validate() const;
};

struct ClipResult {
  PointCloud cloud;
  int densest_bin = 0;  // j*
  int upper_bin = 0;    // j-bar
  double lower_depth = 0.0;
  double upper_depth = 0.0;
};

// j-bar = floor(j* + tau * (N_b - j*)).
int clip_upper_bin(int densest_bin, double upper_fraction, int num_bins);

// Histogram depths into num_bins uniform bins over [min z, max z], take the
// most populated bin as the lower bound and keep bins j* through j-bar:
//   edge[j*] <= z <= edge[j-bar + 1],  edge[j] = min z + j * bin width,
// with the last edge at max z. The densest bin always survives. A zero depth
// range keeps every point.
ClipResult depth_clip(const PointCloud& cloud, const ClipConfig& cfg);

struct Orientation {
  double yaw = 0.0;  // [0, pi); KITTI ry of the major BEV axis
  Eigen::Vector2d major_axis = Eigen::Vector2d::UnitX();  // (x, z)
  double major_variance = 0.0;
  double minor_variance = 0.0;
  bool ambiguous = false;  // eigenvalues closer than ambiguity_ratio
};

// PCA of the (x, z) coordinates. The major axis is taken as the length
// direction. Throws zero_spread when the BEV footprint is a single point.
Orientation estimate_orientation(const PointCloud& cloud, double ambiguity_ratio = 0.05);

struct VerticalExtent {
  double top = 0.0;     // smallest y (camera y points down)
  double bottom = 0.0;  // largest y
  double height() const { return bottom - top; }
};

// Extrema of the points inside the 2nd..98th percentile band of y, widened
// by a tenth of its width on each side: sparse outliers are dropped while
// the true extent of a dense surface is kept.
VerticalExtent robust_vertical_extent(const PointCloud& cloud);

struct Dimensions {
  double width = 0.0;
  double height = 0.0;
  double length = 0.0;
  double scale = 1.0;  // H / H_prior, 1 when no prior was used
  bool from_prior = true;
};

// H from the robust vertical extent; W and L are the prior's scaled by
// H / H_prior. Without a prior the raw BEV extents along the yaw axes are
// used instead.
Dimensions estimate_dimensions(const PointCloud& cloud, double yaw,
                               const DimensionPrior* prior);

// Mean of the cloud, refined per horizontal box axis: when the camera sees
// one face of that axis, the face is anchored at the observed extremum and
// the center placed half a dimension behind it; when the camera sits between
// the faces the observed midpoint is used. Vertical center is the midpoint
// of the robust vertical extent. The result stays within half a dimension
// of the mean along every box axis.
Vec3 estimate_center(const PointCloud& cloud, double yaw, const Dimensions& dims);

struct BoxEstimateConfig {
  ClipConfig clip;
  double ambiguity_ratio = 0.05;
};

struct BoxEstimate {
  Box3D box;
  ClipResult clip;
  Orientation orientation;
  Dimensions dims;
};

// clip -> orientation -> dimensions -> center. An ambiguous orientation
// points the length axis along the viewing ray through the cloud mean.
BoxEstimate estimate_box(const PointCloud& completed, const std::string& class_label,
                         double score, const DimensionPrior* prior,
                         const BoxEstimateConfig& cfg);

}  // namespace plot
