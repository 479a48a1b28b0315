#include "plot/geometry.hpp"

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace plot {

namespace {

bool valid_depth(double z) { return std::isfinite(z) && z > 0.0; }

}  // namespace

PointCloud backproject(std::span<const Pixel> pixels, const DepthRaster& depth,
                       const CameraIntrinsics& K, int frame_tag, std::size_t* skipped) {
  PointCloud cloud;
  cloud.points.reserve(pixels.size());
  std::size_t dropped = 0;
  for (const Pixel& p : pixels) {
    if (!depth.size.contains(p.u, p.v)) {
      ++dropped;
      continue;
    }
    const double z = depth.at(p.u, p.v);
    if (!valid_depth(z)) {
      ++dropped;
      continue;
    }
    cloud.points.push_back(K.backproject(p.u, p.v, z));
  }
  if (frame_tag >= 0) cloud.source_frames.assign(cloud.points.size(), frame_tag);
  if (skipped) *skipped = dropped;
  if (cloud.empty()) {
    throw Error(Errc::empty_cloud, "backproject: no pixel with valid depth");
  }
  return cloud;
}

PointCloud backproject(const InstanceMask& mask, const DepthRaster& depth,
                       const CameraIntrinsics& K, std::size_t* skipped) {
  return backproject(mask.pixels(), depth, K, mask.frame_index(), skipped);
}

std::optional<double> sample_depth(const DepthRaster& depth, double u, double v,
                                   double discontinuity) {
  const int w = depth.size.width, h = depth.size.height;
  if (!(u >= 0.0 && v >= 0.0 && u <= w - 1 && v <= h - 1)) return std::nullopt;
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const int u1 = std::min(u0 + 1, w - 1);
  const int v1 = std::min(v0 + 1, h - 1);
  const double du = u - u0, dv = v - v0;
  const double d00 = depth.at(u0, v0), d10 = depth.at(u1, v0);
  const double d01 = depth.at(u0, v1), d11 = depth.at(u1, v1);

  const bool all_valid =
      valid_depth(d00) && valid_depth(d10) && valid_depth(d01) && valid_depth(d11);
  const double lo = std::min({d00, d10, d01, d11});
  const double hi = std::max({d00, d10, d01, d11});
  if (!all_valid || hi - lo > discontinuity) {
    const int un = static_cast<int>(std::lround(u));
    const int vn = static_cast<int>(std::lround(v));
    const double z = depth.at(un, vn);
    if (!valid_depth(z)) return std::nullopt;
    return z;
  }
  return (1.0 - du) * (1.0 - dv) * d00 + du * (1.0 - dv) * d10 +
         (1.0 - du) * dv * d01 + du * dv * d11;
}

CorrespondenceSet extract_correspondences(const TrackedMask& tm,
                                          const DepthRaster& depth_src,
                                          const DepthRaster& depth_tgt,
                                          const CameraIntrinsics& K,
                                          const InstanceMask* target_mask) {
  CorrespondenceSet c;
  c.source_frame = tm.source_frame;
  c.target_frame = tm.target_frame;
  for (const TrackPoint& p : tm.points) {
    if (!p.visible) continue;
    if (!depth_src.size.contains(p.source.u, p.source.v)) continue;
    const double zs = depth_src.at(p.source.u, p.source.v);
    if (!valid_depth(zs)) continue;
    if (target_mask != nullptr &&
        !target_mask->contains({static_cast<int>(std::lround(p.u)),
                                static_cast<int>(std::lround(p.v))})) {
      continue;
    }
    const auto zt = sample_depth(depth_tgt, p.u, p.v);
    if (!zt) continue;
    c.add(K.backproject(p.source.u, p.source.v, zs), K.backproject(p.u, p.v, *zt));
  }
  return c;
}

Registration procrustes(const CorrespondenceSet& c, bool estimate_scale) {
  const std::size_t n = c.size();
  if (n < 3 || c.target.size() != n) {
    throw Error(Errc::insufficient_correspondences,
                "procrustes: need at least 3 correspondences, got " + std::to_string(n));
  }
  Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += c.source[i];
    mu_t += c.target[i];
  }
  mu_s /= static_cast<double>(n);
  mu_t /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  Mat3 scatter_s = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ds = c.source[i] - mu_s;
    const Vec3 dt = c.target[i] - mu_t;
    cov += dt * ds.transpose();
    scatter_s += ds * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= static_cast<double>(n);
  scatter_s /= static_cast<double>(n);
  var_s /= static_cast<double>(n);

  const Eigen::SelfAdjointEigenSolver<Mat3> spread(scatter_s);
  const Vec3 ev = spread.eigenvalues();  // ascending
  if (!(ev(2) > 1e-24) || ev(1) <= 1e-12 * ev(2)) {
    throw Error(Errc::rank_deficient,
                "procrustes: source points are coincident or collinear");
  }

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  Vec3 sign = Vec3::Ones();
  if (U.determinant() * V.determinant() < 0.0) sign(2) = -1.0;

  Registration out;
  out.transform.rotation = U * sign.asDiagonal() * V.transpose();
  if (estimate_scale) {
    const double trace = svd.singularValues().dot(sign);
    if (!(trace > 0.0)) {
      throw Error(Errc::rank_deficient, "procrustes: target points are degenerate");
    }
    out.transform.scale = trace / var_s;
  }
  out.transform.translation =
      mu_t - out.transform.scale * (out.transform.rotation * mu_s);

  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (c.target[i] - out.transform.apply(c.source[i])).squaredNorm();
  }
  out.rms = std::sqrt(sq / static_cast<double>(n));
  out.used = n;
  return out;
}

Registration register_pair(const CorrespondenceSet& c, const RegistrationConfig& cfg) {
  if (c.size() < std::max<std::size_t>(cfg.min_correspondences, 3)) {
    throw Error(Errc::insufficient_correspondences,
                "register_pair: " + std::to_string(c.size()) +
                    " correspondences, need " + std::to_string(cfg.min_correspondences));
  }
  const bool scale = !cfg.rigid_only;
  Registration fit = procrustes(c, scale);
  if (!cfg.trimming) return fit;

  std::vector<double> residuals(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    residuals[i] = (c.target[i] - fit.transform.apply(c.source[i])).norm();
  }
  std::vector<double> sorted = residuals;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double threshold = std::max(cfg.trim_factor * *mid, cfg.trim_floor);

  CorrespondenceSet kept;
  kept.source_frame = c.source_frame;
  kept.target_frame = c.target_frame;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (residuals[i] <= threshold) kept.add(c.source[i], c.target[i]);
  }
  if (kept.size() == c.size() || kept.size() < 3) return fit;
  try {
    return procrustes(kept, scale);
  } catch (const Error&) {
    return fit;
  }
}

const Registration* PairwiseRegistrations::find(int source, int target) const {
  auto it = fits.find({source, target});
  return it == fits.end() ? nullptr : &it->second;
}

CorrespondenceSet tracklet_correspondences(const ObjectTracklet& t, int source,
                                           int target, const SceneBundle& scene) {
  CorrespondenceSet out;
  out.source_frame = source;
  out.target_frame = target;
  const TrackletEntry* es = t.entry_at(source);
  const TrackletEntry* et = t.entry_at(target);
  if (es == nullptr || et == nullptr) return out;
  const DepthRaster& ds = scene.frame(source).depth;
  const DepthRaster& dt = scene.frame(target).depth;
  if (es->detected()) {
    if (const TrackedMask* tm = scene.find_track(source, es->mask_id, target)) {
      const CorrespondenceSet fwd = 
          extract_correspondences(*tm, ds, dt, scene.intrinsics, &et->mask);
      for (std::size_t i = 0; i < fwd.size(); ++i) out.add(fwd.source[i], fwd.target[i]);
    }
  }
  if (et->detected()) {
    if (const TrackedMask* tm = scene.find_track(target, et->mask_id, source)) {
      const CorrespondenceSet bwd = 
          extract_correspondences(*tm, dt, ds, scene.intrinsics, &es->mask);
      for (std::size_t i = 0; i < bwd.size(); ++i) out.add(bwd.target[i], bwd.source[i]);
    }
  }
  return out;
}

PairwiseRegistrations register_tracklet(const ObjectTracklet& t,
                                        const SceneBundle& scene,
                                        const RegistrationConfig& cfg) {
  PairwiseRegistrations regs;
  for (const TrackletEntry& e : t.entries) regs.frames.push_back(e.frame);
  for (int a : regs.frames) {
    for (int b : regs.frames) {
      if (a == b) continue;
      const CorrespondenceSet c = tracklet_correspondences(t, a, b, scene);
      try {
        regs.fits.emplace(std::make_pair(a, b), register_pair(c, cfg));
      } catch (const Error&) {
        // A failed pair simply contributes no transform.
      }
    }
  }
  return regs;
}

std::optional<int> select_target_frame(const ObjectTracklet& t,
                                       const PairwiseRegistrations& regs,
                                       double tie_tolerance) {
  struct Candidate {
    int frame;
    int incoming = 0;
    double residual = 0.0;
    std::size_t pixels = 0;
  };
  std::vector<Candidate> cands;
  for (int f : regs.frames) {
    Candidate c{f};
    for (int s : regs.frames) {
      if (const Registration* r = regs.find(s, f)) {
        ++c.incoming;
        c.residual += r->rms;
      }
    }
    const TrackletEntry* e = t.entry_at(f);
    if (e != nullptr && e->detected()) c.pixels = e->mask.area();
    cands.push_back(c);
  }
  int most = 0;
  for (const Candidate& c : cands) most = std::max(most, c.incoming);
  if (most == 0) return std::nullopt;
  std::erase_if(cands, [&](const Candidate& c) { return c.incoming != most; });

  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& c : cands) best = std::min(best, c.residual);
  const Candidate* pick = nullptr;
  for (const Candidate& c : cands) {
    if (c.residual > best + tie_tolerance) continue;
    if (pick == nullptr || c.pixels > pick->pixels) pick = &c;
  }
  return pick->frame;
}

Completion complete_pseudolidar(const ObjectTracklet& t, const SceneBundle& scene,
                                const PairwiseRegistrations& regs, int target_frame) {
  Completion out;
  out.target_frame = target_frame;
  out.cloud.source_frames.clear();
  for (const TrackletEntry& e : t.entries) {
    PointCloud part;
    try {
      part = backproject(e.mask.pixels(), scene.frame(e.frame).depth, scene.intrinsics,
                         e.frame);
    } catch (const Error&) {
      out.skipped_frames.push_back(e.frame);
      continue;
    }
    if (e.frame == target_frame) {
      out.cloud.append(part);
      continue;
    }
    const Registration* r = regs.find(e.frame, target_frame);
    if (r == nullptr) {
      out.skipped_frames.push_back(e.frame);
      continue;
    }
    out.cloud.append(r->transform.apply(part));
  }
  if (out.cloud.empty()) {
    throw Error(Errc::empty_cloud, "complete_pseudolidar: no frame contributed points");
  }
  return out;
}

}  // namespace plot
