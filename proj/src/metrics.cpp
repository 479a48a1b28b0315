#include "plot/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <tuple>

#include <json.hpp>

namespace plot {

const char* to_string(DepthRange r) {
  switch (r) {
    case DepthRange::near: return "near";
    case DepthRange::mid: return "mid";
    case DepthRange::far: return "far";
  }
  return "?";
}

DepthRange depth_range_of(double z) {
  if (z <= 10.0) return DepthRange::near;
  if (z <= 30.0) return DepthRange::mid;
  return DepthRange::far;
}

namespace {

using IouFn = std::function<double(const Box3D&, const Box3D&)>;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double iou_2d_of(const Box3D& a, const Box3D& b) {
  if (!a.box2d || !b.box2d) return 0.0;
  return box2d_iou(*a.box2d, *b.box2d);
}

// Score-descending order that does not depend on input order.
std::vector<int> ranking(std::span<const Box3D> preds) {
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    const Box3D& b = preds[static_cast<std::size_t>(i)];
    const double u = b.box2d ? b.box2d->u_min() : 0.0;
    const double v = b.box2d ? b.box2d->v_min() : 0.0;
    return std::make_tuple(-b.score, u, v, b.center.x(), b.center.y(), b.center.z(), b.yaw,
                           b.length, b.width, b.height);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key(a) < key(b); });
  return order;
}

TpMatch greedy_match(std::span<const Box3D> preds, std::span<const Box3D> gts,
                     double threshold, const IouFn& iou) {
  TpMatch out;
  std::vector<char> used(gts.size(), 0);
  for (int p : ranking(preds)) {
    const Box3D& pb = preds[static_cast<std::size_t>(p)];
    const std::string cls = lower(pb.class_label);
    int best = -1;
    double best_iou = threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || lower(gts[g].class_label) != cls) continue;
      const double v = iou(pb, gts[g]);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = 1;
      out.pairs.emplace_back(p, best);
    } else {
      out.false_positives.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!used[g]) out.false_negatives.push_back(static_cast<int>(g));
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  std::sort(out.false_positives.begin(), out.false_positives.end());
  return out;
}

struct ScoredDet {
  double score;
  bool tp;
};

// Frames are matched independently; detections are then ranked together.
void collect(std::span<const FramePair> frames, double threshold, const IouFn& iou,
             std::vector<ScoredDet>& dets, int& num_gt) {
  for (const FramePair& f : frames) {
    num_gt += static_cast<int>(f.gts.size());
    const TpMatch m = greedy_match(f.preds, f.gts, threshold, iou);
    for (const auto& [p, g] : m.pairs) {
      dets.push_back({f.preds[static_cast<std::size_t>(p)].score, true});
    }
    for (int p : m.false_positives) {
      dets.push_back({f.preds[static_cast<std::size_t>(p)].score, false});
    }
  }
}

// Precision/recall after each ranked detection, precision made monotone.
void pr_curve(std::vector<ScoredDet> dets, int num_gt, std::vector<double>& recall,
              std::vector<double>& precision) {
  std::stable_sort(dets.begin(), dets.end(), [](const ScoredDet& a, const ScoredDet& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tp > b.tp;
  });
  int tp = 0, fp = 0;
  for (const ScoredDet& d : dets) {
    (d.tp ? tp : fp) += 1;
    recall.push_back(static_cast<double>(tp) / num_gt);
    precision.push_back(static_cast<double>(tp) / (tp + fp));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
}

double interpolated_ap(const std::vector<ScoredDet>& dets, int num_gt, int first, int last,
                       int denom) {
  if (num_gt == 0) return 0.0;
  std::vector<double> recall, precision;
  pr_curve(dets, num_gt, recall, precision);
  double sum = 0.0;
  for (int i = first; i <= last; ++i) {
    const double r = static_cast<double>(i) / denom;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / (last - first + 1);
}

double coco_ap(std::span<const FramePair> frames, double threshold) {
  std::vector<ScoredDet> dets;
  int num_gt = 0;
  collect(frames, threshold, iou_2d_of, dets, num_gt);
  return interpolated_ap(dets, num_gt, 0, 100, 100);
}

double coco_ap_mean(std::span<const FramePair> frames) {
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) sum += coco_ap(frames, 0.5 + 0.05 * k);
  return sum / 10.0;
}

double r40_ap(std::span<const FramePair> frames, double threshold, ApMode mode) {
  std::vector<ScoredDet> dets;
  int num_gt = 0;
  const IouFn fn = mode == ApMode::bev ? IouFn(bev_iou_rotated) : IouFn(iou_3d);
  collect(frames, threshold, fn, dets, num_gt);
  return interpolated_ap(dets, num_gt, 1, 40, 40);
}

using Polygon = std::vector<Eigen::Vector2d>;

Polygon footprint(const Box3D& b) {
  const Eigen::Vector2d c(b.center.x(), b.center.z());
  const Eigen::Vector2d l = 0.5 * b.length * Eigen::Vector2d(std::cos(b.yaw), -std::sin(b.yaw));
  const Eigen::Vector2d w = 0.5 * b.width * Eigen::Vector2d(std::sin(b.yaw), std::cos(b.yaw));
  Polygon p = {c + l + w, c - l + w, c - l - w, c + l - w};
  return p;
}

double signed_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % p.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Sutherland-Hodgman: clip subject against a convex counter-clockwise clip.
Polygon clip_convex(Polygon subject, const Polygon& clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Eigen::Vector2d a = clip[i];
    const Eigen::Vector2d b = clip[(i + 1) % clip.size()];
    const Eigen::Vector2d edge = b - a;
    auto side = [&](const Eigen::Vector2d& p) { return cross(edge, p - a); };
    Polygon out;
    for (std::size_t k = 0; k < subject.size(); ++k) {
      const Eigen::Vector2d& cur = subject[k];
      const Eigen::Vector2d& nxt = subject[(k + 1) % subject.size()];
      const double sc = side(cur), sn = side(nxt);
      if (sc >= 0.0) out.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        out.push_back(cur + t * (nxt - cur));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

Polygon ccw(Polygon p) {
  if (signed_area(p) < 0.0) std::reverse(p.begin(), p.end());
  return p;
}

double bev_intersection(const Box3D& a, const Box3D& b) {
  const Polygon inter = clip_convex(ccw(footprint(a)), ccw(footprint(b)));
  if (inter.size() < 3) return 0.0;
  return std::abs(signed_area(inter));
}

}  // namespace

TpMatch match_tp(std::span<const Box3D> preds, std::span<const Box3D> gts,
                 double iou_threshold) {
  return greedy_match(preds, gts, iou_threshold, iou_2d_of);
}

double ate(const Box3D& pred, const Box3D& gt) {
  return std::hypot(pred.center.x() - gt.center.x(), pred.center.z() - gt.center.z());
}

double ase(const Box3D& pred, const Box3D& gt) {
  const double inter = std::min(pred.width, gt.width) * std::min(pred.height, gt.height) *
                       std::min(pred.length, gt.length);
  const double uni = pred.volume() + gt.volume() - inter;
  return 1.0 - inter / uni;
}

double aoe(const Box3D& pred, const Box3D& gt, bool mod_pi) {
  const double d = std::abs(normalize_angle(pred.yaw - gt.yaw));
  return mod_pi ? std::min(d, kPi - d) : d;
}

double bev_iou_rotated(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection(a, b);
  const double uni = a.length * a.width + b.length * b.width - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double top = std::max(a.center.y() - 0.5 * a.height, b.center.y() - 0.5 * b.height);
  const double bottom =
      std::min(a.center.y() + 0.5 * a.height, b.center.y() + 0.5 * b.height);
  const double overlap = std::max(0.0, bottom - top);
  const double inter = bev_intersection(a, b) * overlap;
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double ap2d_at(std::span<const Box3D> preds, std::span<const Box3D> gts, double threshold) {
  const FramePair f{{preds.begin(), preds.end()}, {gts.begin(), gts.end()}};
  return coco_ap(std::span<const FramePair>(&f, 1), threshold);
}

double ap2d(std::span<const Box3D> preds, std::span<const Box3D> gts) {
  const FramePair f{{preds.begin(), preds.end()}, {gts.begin(), gts.end()}};
  return coco_ap_mean(std::span<const FramePair>(&f, 1));
}

double ap_kitti(std::span<const Box3D> preds, std::span<const Box3D> gts,
                double iou_threshold, ApMode mode) {
  const FramePair f{{preds.begin(), preds.end()}, {gts.begin(), gts.end()}};
  return r40_ap(std::span<const FramePair>(&f, 1), iou_threshold, mode);
}

EvalReport evaluate(std::span<const FramePair> frames, const EvalOptions& opts) {
  // Split every frame by class first; each class is evaluated on its own.
  std::map<std::string, std::vector<FramePair>> by_class;
  for (const FramePair& f : frames) {
    std::map<std::string, FramePair> split;
    for (const Box3D& p : f.preds) split[lower(p.class_label)].preds.push_back(p);
    for (const Box3D& g : f.gts) split[lower(g.class_label)].gts.push_back(g);
    for (auto& [cls, fp] : split) by_class[cls].push_back(std::move(fp));
  }

  EvalReport report;
  for (const auto& [cls, class_frames] : by_class) {
    ClassReport cr;
    std::map<DepthRange, std::vector<FramePair>> ranged;
    for (DepthRange r : kDepthRanges) {
      cr.ranges[r];
      ranged[r].resize(class_frames.size());
    }
    auto accumulate = [&](RangeStats& s, const Box3D& p, const Box3D& g) {
      ++s.tp;
      s.ate += ate(p, g);
      s.ase += ase(p, g);
      s.aoe += aoe(p, g, opts.mod_pi);
    };
    for (std::size_t fi = 0; fi < class_frames.size(); ++fi) {
      const FramePair& f = class_frames[fi];
      const TpMatch m = match_tp(f.preds, f.gts, opts.tp_iou);
      for (const auto& [p, g] : m.pairs) {
        const Box3D& pb = f.preds[static_cast<std::size_t>(p)];
        const Box3D& gb = f.gts[static_cast<std::size_t>(g)];
        accumulate(cr.ranges[depth_range_of(gb.center.z())], pb, gb);
        accumulate(cr.overall, pb, gb);
      }
      for (int g : m.false_negatives) {
        ++cr.ranges[depth_range_of(f.gts[static_cast<std::size_t>(g)].center.z())].fn;
        ++cr.overall.fn;
      }
      for (const Box3D& g : f.gts) {
        ++cr.ranges[depth_range_of(g.center.z())].gt;
        ++cr.overall.gt;
        ranged[depth_range_of(g.center.z())][fi].gts.push_back(g);
      }
      // A prediction belongs to the range of the ground truth it overlaps
      // most in 2D, or to its own depth when it overlaps none.
      for (std::size_t p = 0; p < f.preds.size(); ++p) {
        const Box3D& pb = f.preds[p];
        double best = 0.0;
        double z = pb.center.z();
        for (const Box3D& g : f.gts) {
          const double v = iou_2d_of(pb, g);
          if (v > best) {
            best = v;
            z = g.center.z();
          }
        }
        ranged[depth_range_of(z)][fi].preds.push_back(pb);
      }
      for (int p : m.false_positives) {
        const Box3D& pb = f.preds[static_cast<std::size_t>(p)];
        double best = 0.0;
        double z = pb.center.z();
        for (const Box3D& g : f.gts) {
          const double v = iou_2d_of(pb, g);
          if (v > best) {
            best = v;
            z = g.center.z();
          }
        }
        ++cr.ranges[depth_range_of(z)].fp;
        ++cr.overall.fp;
      }
    }
    auto finish = [](RangeStats& s) {
      if (s.tp > 0) {
        s.ate /= s.tp;
        s.ase /= s.tp;
        s.aoe /= s.tp;
      }
    };
    for (DepthRange r : kDepthRanges) {
      RangeStats& s = cr.ranges[r];
      finish(s);
      s.ap2d = s.gt > 0 ? coco_ap_mean(ranged[r]) : 0.0;
    }
    finish(cr.overall);
    cr.overall.ap2d = cr.overall.gt > 0 ? coco_ap_mean(class_frames) : 0.0;
    if (opts.with_ap3d && cr.overall.gt > 0) {
      cr.ap3d = r40_ap(class_frames, opts.ap3d_iou, ApMode::three_d);
      cr.apbev = r40_ap(class_frames, opts.ap3d_iou, ApMode::bev);
    }
    report.classes.emplace(cls, std::move(cr));
  }
  return report;
}

std::string report_to_json(const EvalReport& report, int indent) {
  using nlohmann::json;
  auto stats = [](const RangeStats& s) {
    return json{{"tp", s.tp},   {"fp", s.fp},   {"fn", s.fn},   {"gt", s.gt},
                {"ate", s.ate}, {"ase", s.ase}, {"aoe", s.aoe}, {"ap2d", s.ap2d}};
  };
  json classes = json::object();
  for (const auto& [cls, cr] : report.classes) {
    json jc = {{"overall", stats(cr.overall)}, {"ap3d_r40", cr.ap3d}, {"apbev_r40", cr.apbev}};
    for (const auto& [r, s] : cr.ranges) jc[to_string(r)] = stats(s);
    classes[cls] = std::move(jc);
  }
  return json{{"classes", std::move(classes)}}.dump(indent) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s | %-23s | %-23s | %-23s | %-23s | %s\n", "Class",
                "AP2D (%) Near/Mid/Far", "AOE (rad) Near/Mid/Far", "ATE (m) Near/Mid/Far",
                "ASE (1-IoU) Near/Mid/Far", "TP Near/Mid/Far");
  out += buf;
  out += std::string(130, '-') + "\n";
  auto cell = [](const RangeStats& s, double v, const char* fmt) {
    char c[16];
    if (s.gt == 0 && s.tp == 0) return std::string("      -");
    std::snprintf(c, sizeof(c), fmt, v);
    return std::string(c);
  };
  for (const auto& [cls, cr] : report.classes) {
    const RangeStats& n = cr.ranges.at(DepthRange::near);
    const RangeStats& m = cr.ranges.at(DepthRange::mid);
    const RangeStats& f = cr.ranges.at(DepthRange::far);
    auto group = [&](auto field, const char* fmt, double mult, bool need_tp) {
      std::string g;
      for (const RangeStats* s : {&n, &m, &f}) {
        if (need_tp && s->tp == 0) {
          g += "      -";
        } else {
          g += cell(*s, field(*s) * mult, fmt);
        }
        g += " ";
      }
      return g;
    };
    std::snprintf(
        buf, sizeof(buf), "%-12s | %-23s | %-23s | %-23s | %-23s | %d/%d/%d\n", cls.c_str(),
        group([](const RangeStats& s) { return s.ap2d; }, "%7.2f", 100.0, false).c_str(),
        group([](const RangeStats& s) { return s.aoe; }, "%7.3f", 1.0, true).c_str(),
        group([](const RangeStats& s) { return s.ate; }, "%7.3f", 1.0, true).c_str(),
        group([](const RangeStats& s) { return s.ase; }, "%7.3f", 1.0, true).c_str(), n.tp,
        m.tp, f.tp);
    out += buf;
  }
  return out;
}

}  // namespace plot
