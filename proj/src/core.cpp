#include "plot/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plot {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::insufficient_correspondences: return "insufficient_correspondences";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::empty_cloud: return "empty_cloud";
    case Errc::zero_spread: return "zero_spread";
    case Errc::missing_prior: return "missing_prior";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::validation: return "validation";
  }
  return "unknown";
}

void CameraIntrinsics::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
        std::isfinite(cy))) {
    throw Error(Errc::validation, "intrinsics contain non-finite values");
  }
  if (fx <= 0.0 || fy <= 0.0) {
    throw Error(Errc::validation, "focal lengths must be positive");
  }
}

std::vector<Pixel> normalize_pixels(std::vector<Pixel> pixels) {
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  return pixels;
}

Box2D::Box2D(double u_c, double v_c, double w, double h)
    : u_c_(u_c), v_c_(v_c), w_(w), h_(h) {
  if (!(std::isfinite(u_c) && std::isfinite(v_c))) {
    throw Error(Errc::validation, "box center must be finite");
  }
  if (!(w > 0.0 && h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) {
    throw Error(Errc::validation, "box width and height must be positive");
  }
}

Box2D Box2D::from_corners(double u_min, double v_min, double u_max,
                          double v_max) {
  return Box2D(0.5 * (u_min + u_max), 0.5 * (v_min + v_max), u_max - u_min,
               v_max - v_min);
}

InstanceMask::InstanceMask(int frame_index, std::vector<Pixel> pixels,
                           ImageSize size, double confidence,
                           std::string class_label)
    : frame_index_(frame_index),
      pixels_(normalize_pixels(std::move(pixels))),
      size_(size),
      confidence_(confidence),
      class_label_(std::move(class_label)) {
  if (pixels_.empty()) {
    throw Error(Errc::validation, "instance mask has no pixels");
  }
  for (const Pixel& p : pixels_) {
    if (!size_.contains(p.u, p.v)) {
      std::ostringstream msg;
      msg << "mask pixel (" << p.u << "," << p.v << ") outside "
          << size_.width << "x" << size_.height << " image";
      throw Error(Errc::validation, msg.str());
    }
  }
  if (!(confidence_ >= 0.0 && confidence_ <= 1.0)) {
    throw Error(Errc::validation, "mask confidence outside [0,1]");
  }
}

bool InstanceMask::contains(Pixel p) const {
  return std::binary_search(pixels_.begin(), pixels_.end(), p);
}

double mask_iou(std::span<const Pixel> a, std::span<const Pixel> b) {
  if (a.empty() && b.empty()) {
    throw Error(Errc::degenerate_input, "mask_iou: both masks are empty");
  }
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_iou(const InstanceMask& a, const InstanceMask& b) {
  if (a.image_size() != b.image_size()) {
    throw Error(Errc::invalid_argument, "mask_iou: image sizes differ");
  }
  return mask_iou(a.pixels(), b.pixels());
}

double box2d_iou(const Box2D& a, const Box2D& b) {
  const double iw =
      std::min(a.u_max(), b.u_max()) - std::max(a.u_min(), b.u_min());
  const double ih =
      std::min(a.v_max(), b.v_max()) - std::max(a.v_min(), b.v_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

Box2D box_from_mask(std::span<const Pixel> pixels) {
  if (pixels.empty()) {
    throw Error(Errc::degenerate_input, "box_from_mask: empty mask");
  }
  int u_min = pixels.front().u, u_max = u_min;
  int v_min = pixels.front().v, v_max = v_min;
  for (const Pixel& p : pixels) {
    u_min = std::min(u_min, p.u);
    u_max = std::max(u_max, p.u);
    v_min = std::min(v_min, p.v);
    v_max = std::max(v_max, p.v);
  }
  return Box2D(0.5 * (u_min + u_max), 0.5 * (v_min + v_max),
               u_max - u_min + 1.0, v_max - v_min + 1.0);
}

Box2D box_from_mask(const InstanceMask& mask) {
  return box_from_mask(mask.pixels());
}

void TrackedMask::validate() const {
  for (const TrackPoint& p : points) {
    if (p.visible && !(std::isfinite(p.u) && std::isfinite(p.v))) {
      throw Error(Errc::validation,
                  "visible track point has non-finite target coordinates");
    }
  }
}

std::vector<Pixel> TrackedMask::rasterize(ImageSize size) const {
  std::vector<Pixel> out;
  out.reserve(points.size());
  for (const TrackPoint& p : points) {
    if (!p.visible) continue;
    const int u = static_cast<int>(std::lround(p.u));
    const int v = static_cast<int>(std::lround(p.v));
    if (size.contains(u, v)) out.push_back({u, v});
  }
  return normalize_pixels(std::move(out));
}

double TrackedMask::visible_fraction() const {
  if (points.empty()) return 0.0;
  const auto n = std::count_if(points.begin(), points.end(),
                               [](const TrackPoint& p) { return p.visible; });
  return static_cast<double>(n) / static_cast<double>(points.size());
}

void PointCloud::append(const PointCloud& other) {
  const bool tagged = source_frames.size() == points.size() &&
                      other.source_frames.size() == other.points.size();
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (tagged) {
    source_frames.insert(source_frames.end(), other.source_frames.begin(),
                         other.source_frames.end());
  } else {
    source_frames.clear();
  }
}

Vec3 PointCloud::mean() const {
  if (points.empty()) {
    throw Error(Errc::empty_cloud, "mean of an empty point cloud");
  }
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

PointCloud SimilarityTransform::apply(const PointCloud& cloud) const {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(apply(p));
  out.source_frames = cloud.source_frames;
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

bool SimilarityTransform::is_valid(double tol) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  if (!translation.allFinite() || !rotation.allFinite()) return false;
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

SimilarityTransform operator*(const SimilarityTransform& a,
                              const SimilarityTransform& b) {
  SimilarityTransform out;
  out.scale = a.scale * b.scale;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return out;
}

Mat3 rot_y(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r << c, 0.0, s,  //
      0.0, 1.0, 0.0,  //
      -s, 0.0, c;
  return r;
}

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

void Box3D::validate() const {
  if (!(width > 0.0 && height > 0.0 && length > 0.0)) {
    throw Error(Errc::validation, "box dimensions must be positive");
  }
  if (!center.allFinite() || !std::isfinite(yaw)) {
    throw Error(Errc::validation, "box pose must be finite");
  }
}

void DimensionPrior::validate() const {
  if (!(height > 0.0 && width > 0.0 && length > 0.0)) {
    throw Error(Errc::validation,
                "prior for '" + class_label + "' must have positive dimensions");
  }
}

}  // namespace plot
