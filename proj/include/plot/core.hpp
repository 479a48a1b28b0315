#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plot/error.hpp"

namespace plot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Pinhole intrinsics. Pixel (u, v) has its center at continuous image
// coordinate (u, v); the optical axis passes through (cx, cy).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;

  Vec3 backproject(double u, double v, double depth) const {
    return {(u - cx) * depth / fx, (v - cy) * depth / fy, depth};
  }
  Eigen::Vector2d project(const Vec3& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }

  bool operator==(const CameraIntrinsics&) const = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  bool contains(int u, int v) const {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
  bool operator==(const ImageSize&) const = default;
};

// Integer pixel coordinate. Ordered row-major (v first) so that sorted pixel
// lists enumerate the raster in memory order.
struct Pixel {
  int u = 0;
  int v = 0;

  bool operator==(const Pixel&) const = default;
  std::strong_ordering operator<=>(const Pixel& o) const {
    if (auto c = v <=> o.v; c != 0) return c;
    return u <=> o.u;
  }
};

// Sorts and deduplicates.
std::vector<Pixel> normalize_pixels(std::vector<Pixel> pixels);

// Axis-aligned image box stored as center + size, in pixels.
class Box2D {
 public:
  Box2D(double u_c, double v_c, double w, double h);

  static Box2D from_corners(double u_min, double v_min, double u_max,
                            double v_max);

  double u_c() const { return u_c_; }
  double v_c() const { return v_c_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double u_min() const { return u_c_ - 0.5 * w_; }
  double v_min() const { return v_c_ - 0.5 * h_; }
  double u_max() const { return u_c_ + 0.5 * w_; }
  double v_max() const { return v_c_ + 0.5 * h_; }
  double area() const { return w_ * h_; }

  bool operator==(const Box2D&) const = default;

 private:
  double u_c_;
  double v_c_;
  double w_;
  double h_;
};

// A detector's instance mask on one frame. Pixels are kept sorted and unique.
class InstanceMask {
 public:
  InstanceMask(int frame_index, std::vector<Pixel> pixels, ImageSize size,
               double confidence, std::string class_label);

  int frame_index() const { return frame_index_; }
  std::span<const Pixel> pixels() const { return pixels_; }
  std::size_t area() const { return pixels_.size(); }
  ImageSize image_size() const { return size_; }
  double confidence() const { return confidence_; }
  const std::string& class_label() const { return class_label_; }
  bool contains(Pixel p) const;

  bool operator==(const InstanceMask&) const = default;

 private:
  int frame_index_;
  std::vector<Pixel> pixels_;
  ImageSize size_;
  double confidence_;
  std::string class_label_;
};

// IoU of two sorted, deduplicated pixel sets. Throws degenerate_input when
// both are empty.
double mask_iou(std::span<const Pixel> a, std::span<const Pixel> b);
double mask_iou(const InstanceMask& a, const InstanceMask& b);

double box2d_iou(const Box2D& a, const Box2D& b);

// Box spanning the pixel extrema, with inclusive extents: a single pixel
// yields a 1x1 box centered on it.
Box2D box_from_mask(std::span<const Pixel> pixels);
Box2D box_from_mask(const InstanceMask& mask);

struct TrackPoint {
  Pixel source;
  double u = 0.0;  // sub-pixel location in the target frame
  double v = 0.0;
  bool visible = false;

  bool operator==(const TrackPoint&) const = default;
};

// A mask from source_frame propagated into target_frame by a point tracker.
struct TrackedMask {
  int source_frame = 0;
  int target_frame = 0;
  std::vector<TrackPoint> points;

  void validate() const;
  // Visible target locations rounded to the nearest pixel, clipped to the
  // image, sorted and deduplicated.
  std::vector<Pixel> rasterize(ImageSize size) const;
  double visible_fraction() const;

  bool operator==(const TrackedMask&) const = default;
};

// Camera-frame points in meters. source_frames is either empty or parallel
// to points.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> source_frames;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void append(const PointCloud& other);
  Vec3 mean() const;
};

// x -> scale * rotation * x + translation
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  PointCloud apply(const PointCloud& cloud) const;
  SimilarityTransform inverse() const;
  bool is_valid(double tol = 1e-9) const;
};

// (a * b)(x) == a(b(x))
SimilarityTransform operator*(const SimilarityTransform& a,
                              const SimilarityTransform& b);

// Rotation about the camera y axis (KITTI ry convention): the local x axis
// maps to (cos yaw, 0, -sin yaw).
Mat3 rot_y(double yaw);

// Wraps into (-pi, pi].
double normalize_angle(double angle);

// Internally the center is the geometric middle of the box; KITTI's
// bottom-center convention is applied only at the file boundary.
struct Box3D {
  std::string class_label;
  Vec3 center = Vec3::Zero();
  double width = 0.0;   // W, along the local z axis
  double height = 0.0;  // H, along y
  double length = 0.0;  // L, along the local x axis
  double yaw = 0.0;
  double score = 0.0;
  std::optional<Box2D> box2d;

  void validate() const;
  double volume() const { return width * height * length; }
};

struct DimensionPrior {
  std::string class_label;
  double height = 0.0;
  double width = 0.0;
  double length = 0.0;

  void validate() const;
  bool operator==(const DimensionPrior&) const = default;
};

}  // namespace plot
