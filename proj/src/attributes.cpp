#include "plot/attributes.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace plot {

namespace {

// Folds an axis angle into [0, pi).
double fold_axis(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

// Linear-interpolated percentile of sorted values, q in [0, 1].
double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void ClipConfig::validate() const {
  if (num_bins < 2) throw Error(Errc::validation, "clip: num_bins must be >= 2");
  if (!(upper_fraction > 0.0 && upper_fraction <= 1.0)) {
    throw Error(Errc::validation, "clip: upper_fraction must be in (0, 1]");
  }
}

int clip_upper_bin(int densest_bin, double upper_fraction, int num_bins) {
  return static_cast<int>(
      std::floor(densest_bin + upper_fraction * (num_bins - densest_bin)));
}

ClipResult depth_clip(const PointCloud& cloud, const ClipConfig& cfg) {
  cfg.validate();
  if (cloud.empty()) throw Error(Errc::empty_cloud, "depth_clip: empty input cloud");
  double z_min = cloud.points.front().z(), z_max = z_min;
  for (const Vec3& p : cloud.points) {
    z_min = std::min(z_min, p.z());
    z_max = std::max(z_max, p.z());
  }
  ClipResult out;
  if (!(z_max > z_min)) {
    out.cloud = cloud;
    out.upper_bin = clip_upper_bin(0, cfg.upper_fraction, cfg.num_bins);
    out.lower_depth = out.upper_depth = z_min;
    return out;
  }
  const double width = (z_max - z_min) / cfg.num_bins;
  auto bin_of = [&](double z) {
    const int j = static_cast<int>((z - z_min) / width);
    return std::clamp(j, 0, cfg.num_bins - 1);
  };
  std::vector<std::size_t> counts(static_cast<std::size_t>(cfg.num_bins), 0);
  for (const Vec3& p : cloud.points) ++counts[static_cast<std::size_t>(bin_of(p.z()))];
  out.densest_bin = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                     counts.begin());
  out.upper_bin = clip_upper_bin(out.densest_bin, cfg.upper_fraction, cfg.num_bins);
  out.lower_depth = z_min + out.densest_bin * width;
  out.upper_depth = out.upper_bin + 1 >= cfg.num_bins ? z_max
                                                       : z_min + (out.upper_bin + 1) * width;

  const bool tagged = cloud.source_frames.size() == cloud.size();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    // Bin membership is decided by bin_of so edge rounding matches the
    // histogram.
    const int j = bin_of(cloud.points[i].z());
    if (j >= out.densest_bin && j <= out.upper_bin) {
      out.cloud.points.push_back(cloud.points[i]);
      if (tagged) out.cloud.source_frames.push_back(cloud.source_frames[i]);
    }
  }
  return out;
}

Orientation estimate_orientation(const PointCloud& cloud, double ambiguity_ratio) {
  if (cloud.size() < 2) {
    throw Error(Errc::zero_spread, "estimate_orientation: need at least 2 points");
  }
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const Vec3& p : cloud.points) mean += Eigen::Vector2d(p.x(), p.z());
  mean /= static_cast<double>(cloud.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec3& p : cloud.points) {
    const Eigen::Vector2d d = Eigen::Vector2d(p.x(), p.z()) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(cloud.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  Orientation out;
  out.minor_variance = eig.eigenvalues()(0);
  out.major_variance = eig.eigenvalues()(1);
  if (!(out.major_variance > 1e-18)) {
    throw Error(Errc::zero_spread, "estimate_orientation: points coincide in BEV");
  }
  out.major_axis = eig.eigenvectors().col(1);
  out.yaw = fold_axis(std::atan2(-out.major_axis.y(), out.major_axis.x()));
  out.ambiguous =
      (out.major_variance - out.minor_variance) < ambiguity_ratio * out.major_variance;
  return out;
}

VerticalExtent robust_vertical_extent(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(Errc::empty_cloud, "vertical extent of empty cloud");
  std::vector<double> ys;
  ys.reserve(cloud.size());
  for (const Vec3& p : cloud.points) ys.push_back(p.y());
  std::sort(ys.begin(), ys.end());
  const double lo = percentile(ys, 0.02);
  const double hi = percentile(ys, 0.98);
  const double margin = 0.1 * (hi - lo);
  auto first = std::lower_bound(ys.begin(), ys.end(), lo - margin);
  auto last = std::upper_bound(ys.begin(), ys.end(), hi + margin);
  return {*first, *std::prev(last)};
}

Dimensions estimate_dimensions(const PointCloud& cloud, double yaw,
                               const DimensionPrior* prior) {
  const VerticalExtent ext = robust_vertical_extent(cloud);
  Dimensions d;
  d.height = ext.height();
  if (prior != nullptr) {
    prior->validate();
    if (!(d.height > 0.0)) {
      // Flat observation: nothing to scale by.
      d.height = prior->height;
    }
    d.scale = d.height / prior->height;
    d.width = d.scale * prior->width;
    d.length = d.scale * prior->length;
    return d;
  }
  d.from_prior = false;
  d.scale = 1.0;
  const Eigen::Vector2d len_axis(std::cos(yaw), -std::sin(yaw));
  const Eigen::Vector2d wid_axis(std::sin(yaw), std::cos(yaw));
  double lmin = 1e300, lmax = -1e300, wmin = 1e300, wmax = -1e300;
  for (const Vec3& p : cloud.points) {
    const Eigen::Vector2d q(p.x(), p.z());
    lmin = std::min(lmin, q.dot(len_axis));
    lmax = std::max(lmax, q.dot(len_axis));
    wmin = std::min(wmin, q.dot(wid_axis));
    wmax = std::max(wmax, q.dot(wid_axis));
  }
  // A degenerate extent still has to produce a valid box.
  constexpr double kMinExtent = 1e-3;
  d.length = std::max(lmax - lmin, kMinExtent);
  d.width = std::max(wmax - wmin, kMinExtent);
  d.height = std::max(d.height, kMinExtent);
  return d;
}

Vec3 estimate_center(const PointCloud& cloud, double yaw, const Dimensions& dims) {
  const Vec3 mean = cloud.mean();
  const Eigen::Vector2d len_axis(std::cos(yaw), -std::sin(yaw));
  const Eigen::Vector2d wid_axis(std::sin(yaw), std::cos(yaw));

  auto refine_axis = [&](const Eigen::Vector2d& axis, double half) {
    double lo = 1e300, hi = -1e300;
    for (const Vec3& p : cloud.points) {
      const double s = axis.dot(Eigen::Vector2d(p.x(), p.z()));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const double camera = 0.0;  // the camera sits at the origin
    double c;
    if (camera < lo) {
      c = lo + half;
    } else if (camera > hi) {
      c = hi - half;
    } else {
      c = 0.5 * (lo + hi);
    }
    const double m = axis.dot(Eigen::Vector2d(mean.x(), mean.z()));
    return std::clamp(c, m - half, m + half);
  };

  const double c_len = refine_axis(len_axis, 0.5 * dims.length);
  const double c_wid = refine_axis(wid_axis, 0.5 * dims.width);
  const VerticalExtent ext = robust_vertical_extent(cloud);
  const double c_y = std::clamp(0.5 * (ext.top + ext.bottom), mean.y() - 0.5 * dims.height,
                                mean.y() + 0.5 * dims.height);
  const Eigen::Vector2d bev = c_len * len_axis + c_wid * wid_axis;
  return {bev.x(), c_y, bev.y()};
}

BoxEstimate estimate_box(const PointCloud& completed, const std::string& class_label,
                         double score, const DimensionPrior* prior,
                         const BoxEstimateConfig& cfg) {
  BoxEstimate out;
  out.clip = depth_clip(completed, cfg.clip);
  if (out.clip.cloud.empty()) {
    throw Error(Errc::empty_cloud, "depth_clip removed every point");
  }
  const PointCloud& pts = out.clip.cloud;
  try {
    out.orientation = estimate_orientation(pts, cfg.ambiguity_ratio);
  } catch (const Error& e) {
    if (e.code() != Errc::zero_spread) throw;
    out.orientation.ambiguous = true;
  }
  double yaw = out.orientation.yaw;
  if (out.orientation.ambiguous) {
    const Vec3 m = pts.mean();
    yaw = fold_axis(std::atan2(-m.z(), m.x()));
  }
  out.dims = estimate_dimensions(pts, yaw, prior);
  out.box.class_label = class_label;
  out.box.yaw = yaw;
  out.box.width = out.dims.width;
  out.box.height = out.dims.height;
  out.box.length = out.dims.length;
  out.box.center = estimate_center(pts, yaw, out.dims);
  out.box.score = score;
  out.box.validate();
  return out;
}

}  // namespace plot
