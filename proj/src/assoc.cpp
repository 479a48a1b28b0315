#include "plot/assoc.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "plot/hungarian.hpp"

namespace plot {

MatchResult match_by_iou(const Eigen::MatrixXd& iou, double min_iou) {
  MatchResult out;
  const int n = static_cast<int>(iou.rows());
  const int m = static_cast<int>(iou.cols());
  std::vector<char> det_used(static_cast<std::size_t>(m), 0);
  const std::vector<int> assignment = solve_assignment_max(iou);
  for (int i = 0; i < n; ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    if (j >= 0 && iou(i, j) >= min_iou) {
      out.pairs.emplace_back(i, j);
      det_used[static_cast<std::size_t>(j)] = 1;
    } else {
      out.unmatched_tracked.push_back(i);
    }
  }
  for (int j = 0; j < m; ++j) {
    if (!det_used[static_cast<std::size_t>(j)]) out.unmatched_detected.push_back(j);
  }
  return out;
}

MatchResult match_masks(std::span<const std::vector<Pixel>> tracked,
                        std::span<const InstanceMask> detected, double min_iou) {
  Eigen::MatrixXd iou(static_cast<Eigen::Index>(tracked.size()),
                      static_cast<Eigen::Index>(detected.size()));
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    for (std::size_t j = 0; j < detected.size(); ++j) {
      iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          mask_iou(tracked[i], detected[j].pixels());
    }
  }
  return match_by_iou(iou, min_iou);
}

const TrackletEntry* ObjectTracklet::entry_at(int frame) const {
  for (const TrackletEntry& e : entries) {
    if (e.frame == frame) return &e;
  }
  return nullptr;
}

int ObjectTracklet::detected_count() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [](const TrackletEntry& e) { return e.detected(); }));
}

double ObjectTracklet::max_confidence() const {
  double best = 0.0;
  for (const TrackletEntry& e : entries) {
    if (e.detected()) best = std::max(best, e.mask.confidence());
  }
  return best;
}

namespace {

struct Node {
  int frame;
  std::size_t det;  // index into frame.detections
};

struct Edge {
  double iou;
  int a;
  int b;
};

// Union-find whose components carry the set of frames they cover.
class FrameExclusiveSets {
 public:
  FrameExclusiveSets(const std::vector<Node>& nodes)
      : parent_(nodes.size()), frames_(nodes.size()) {
    std::iota(parent_.begin(), parent_.end(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) frames_[i].insert(nodes[i].frame);
  }

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  bool unite(int a, int b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return true;
    auto& fa = frames_[static_cast<std::size_t>(ra)];
    auto& fb = frames_[static_cast<std::size_t>(rb)];
    for (int f : fb) {
      if (fa.count(f)) return false;
    }
    if (ra > rb) std::swap(ra, rb);  // keep the smaller id as root
    parent_[static_cast<std::size_t>(rb)] = ra;
    auto& keep = frames_[static_cast<std::size_t>(ra)];
    auto& drop = frames_[static_cast<std::size_t>(rb)];
    keep.insert(drop.begin(), drop.end());
    drop.clear();
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<std::set<int>> frames_;
};

TrackletEntry detected_entry(const Frame& f, const Detection& d) {
  return TrackletEntry{f.index, d.mask, d.box, EntryOrigin::detected, d.mask_id, -1};
}

}  // namespace

std::vector<ObjectTracklet> build_tracklets(const SceneBundle& scene,
                                            std::span<const int> window,
                                            const AssocConfig& cfg) {
  std::vector<Node> nodes;
  std::map<int, int> first_node;  // frame -> first node index
  for (int f : window) {
    const Frame& frame = scene.frame(f);
    first_node[f] = static_cast<int>(nodes.size());
    for (std::size_t k = 0; k < frame.detections.size(); ++k) nodes.push_back({f, k});
  }

  std::vector<Edge> edges;
  for (int src : window) {
    const Frame& sf = scene.frame(src);
    if (sf.detections.empty()) continue;
    for (int dst : window) {
      if (dst == src) continue;
      const Frame& df = scene.frame(dst);
      if (df.detections.empty()) continue;
      std::vector<std::vector<Pixel>> tracked;
      tracked.reserve(sf.detections.size());
      for (const Detection& d : sf.detections) {
        const TrackedMask* tm = scene.find_track(src, d.mask_id, dst);
        tracked.push_back(tm ? tm->rasterize(scene.image_size) : std::vector<Pixel>{});
      }
      std::vector<InstanceMask> detected;
      detected.reserve(df.detections.size());
      for (const Detection& d : df.detections) detected.push_back(d.mask);
      const MatchResult match = match_masks(tracked, detected, cfg.min_iou);
      for (const auto& [i, j] : match.pairs) {
        edges.push_back({mask_iou(tracked[static_cast<std::size_t>(i)],
                                  detected[static_cast<std::size_t>(j)].pixels()),
                         first_node[src] + i, first_node[dst] + j});
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  FrameExclusiveSets sets(nodes);
  for (const Edge& e : edges) sets.unite(e.a, e.b);

  std::map<int, std::vector<int>> components;  // root -> nodes, ascending
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    components[sets.find(i)].push_back(i);
  }

  std::vector<ObjectTracklet> out;
  for (const auto& [root, members] : components) {
    ObjectTracklet t;
    t.object_id = static_cast<int>(out.size());
    for (int idx : members) {
      const Node& n = nodes[static_cast<std::size_t>(idx)];
      const Frame& f = scene.frame(n.frame);
      t.entries.push_back(detected_entry(f, f.detections[n.det]));
    }
    std::sort(t.entries.begin(), t.entries.end(),
              [](const TrackletEntry& a, const TrackletEntry& b) { return a.frame < b.frame; });
    t.class_label = resolve_class(t);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ObjectTracklet> improve_labels(std::vector<ObjectTracklet> tracklets,
                                           const SceneBundle& scene,
                                           std::span<const int> window,
                                           const AssocConfig& cfg) {
  std::erase_if(tracklets, [&](const ObjectTracklet& t) {
    return t.detected_count() < cfg.min_observations &&
           t.max_confidence() < cfg.min_confidence;
  });

  for (ObjectTracklet& t : tracklets) {
    std::vector<TrackletEntry> added;
    for (int f : window) {
      if (t.entry_at(f) != nullptr) continue;
      const TrackletEntry* donor = nullptr;
      const TrackedMask* donor_track = nullptr;
      double best_fraction = -1.0;
      for (const TrackletEntry& e : t.entries) {
        if (!e.detected()) continue;
        const TrackedMask* tm = scene.find_track(e.frame, e.mask_id, f);
        if (tm == nullptr) continue;
        const double fraction = tm->visible_fraction();
        const bool better =
            fraction > best_fraction ||
            (fraction == best_fraction && e.mask.confidence() > donor->mask.confidence());
        if (better) {
          best_fraction = fraction;
          donor = &e;
          donor_track = tm;
        }
      }
      if (donor == nullptr) continue;
      std::vector<Pixel> pixels = donor_track->rasterize(scene.image_size);
      if (pixels.empty()) continue;
      const Box2D box = box_from_mask(pixels);
      InstanceMask mask(f, std::move(pixels), scene.image_size,
                        donor->mask.confidence() * cfg.supplement_confidence_factor,
                        donor->mask.class_label());
      added.push_back(TrackletEntry{f, std::move(mask), box, EntryOrigin::supplemented,
                                    -1, donor->frame});
    }
    for (TrackletEntry& e : added) t.entries.push_back(std::move(e));
    std::sort(t.entries.begin(), t.entries.end(),
              [](const TrackletEntry& a, const TrackletEntry& b) { return a.frame < b.frame; });
  }
  return tracklets;
}

std::string resolve_class(const ObjectTracklet& tracklet) {
  struct Vote {
    double total = 0.0;
    double best = 0.0;
  };
  std::map<std::string, Vote> votes;
  for (const TrackletEntry& e : tracklet.entries) {
    if (!e.detected()) continue;
    Vote& v = votes[e.mask.class_label()];
    v.total += e.mask.confidence();
    v.best = std::max(v.best, e.mask.confidence());
  }
  if (votes.empty()) {
    throw Error(Errc::invalid_argument, "resolve_class: tracklet has no detections");
  }
  constexpr double eps = 1e-12;
  auto winner = votes.begin();
  for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
    const Vote& a = it->second;
    const Vote& b = winner->second;
    if (a.total > b.total + eps ||
        (std::abs(a.total - b.total) <= eps && a.best > b.best + eps)) {
      winner = it;
    }
  }
  return winner->first;
}

}  // namespace plot
