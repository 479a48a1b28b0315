#include "plot/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace plot {

const Detection* Frame::find(int mask_id) const {
  auto it = std::lower_bound(
      detections.begin(), detections.end(), mask_id,
      [](const Detection& d, int id) { return d.mask_id < id; });
  if (it != detections.end() && it->mask_id == mask_id) return &*it;
  return nullptr;
}

bool SceneBundle::has_frame(int index) const {
  if (frames.empty()) return false;
  const int offset = index - frames.front().index;
  return offset >= 0 && offset < static_cast<int>(frames.size());
}

const Frame& SceneBundle::frame(int index) const {
  if (!has_frame(index)) {
    throw Error(Errc::invalid_argument,
                "frame " + std::to_string(index) + " not in scene");
  }
  return frames[static_cast<std::size_t>(index - frames.front().index)];
}

const TrackedMask* SceneBundle::find_track(int source_frame, int mask_id,
                                           int target_frame) const {
  auto it = tracks.find(TrackKey{source_frame, mask_id});
  if (it == tracks.end()) return nullptr;
  for (const TrackedMask& tm : it->second) {
    if (tm.target_frame == target_frame) return &tm;
  }
  return nullptr;
}

std::vector<int> SceneBundle::frame_indices() const {
  std::vector<int> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) out.push_back(f.index);
  return out;
}

void SceneBundle::canonicalize() {
  std::sort(frames.begin(), frames.end(),
            [](const Frame& a, const Frame& b) { return a.index < b.index; });
  for (Frame& f : frames) {
    std::sort(f.detections.begin(), f.detections.end(),
              [](const Detection& a, const Detection& b) {
                return a.mask_id < b.mask_id;
              });
  }
  for (auto& [key, list] : tracks) {
    std::sort(list.begin(), list.end(),
              [](const TrackedMask& a, const TrackedMask& b) {
                return a.target_frame < b.target_frame;
              });
  }
}

void SceneBundle::validate() const {
  intrinsics.validate();
  if (frames.empty()) throw Error(Errc::validation, "scene has no frames");
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw Error(Errc::validation, "scene image size must be positive");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    const std::string where = "frame " + std::to_string(f.index);
    if (f.index != frames.front().index + static_cast<int>(i)) {
      throw Error(Errc::validation, "frame indices are not contiguous at " + where);
    }
    if (f.depth.size != image_size ||
        f.depth.values.size() !=
            static_cast<std::size_t>(image_size.width) * image_size.height) {
      throw Error(Errc::validation, where + ": depth raster dimension mismatch");
    }
    std::set<int> ids;
    for (const Detection& d : f.detections) {
      if (!ids.insert(d.mask_id).second) {
        throw Error(Errc::validation,
                    where + ": duplicate mask id " + std::to_string(d.mask_id));
      }
      if (d.mask.frame_index() != f.index) {
        throw Error(Errc::validation, where + ": mask " +
                                          std::to_string(d.mask_id) +
                                          " tagged with another frame");
      }
      if (d.mask.image_size() != image_size) {
        throw Error(Errc::validation, where + ": mask " +
                                          std::to_string(d.mask_id) +
                                          " image size mismatch");
      }
    }
  }
  for (const auto& [key, list] : tracks) {
    std::ostringstream where;
    where << "track (source frame " << key.source_frame << ", mask id "
          << key.mask_id << ")";
    if (!has_frame(key.source_frame) ||
        frame(key.source_frame).find(key.mask_id) == nullptr) {
      throw Error(Errc::validation,
                  where.str() + " references nonexistent mask id " +
                      std::to_string(key.mask_id));
    }
    std::set<int> targets;
    for (const TrackedMask& tm : list) {
      if (tm.source_frame != key.source_frame) {
        throw Error(Errc::validation, where.str() + ": source frame mismatch");
      }
      if (!has_frame(tm.target_frame) || tm.target_frame == key.source_frame) {
        throw Error(Errc::validation,
                    where.str() + ": invalid target frame " +
                        std::to_string(tm.target_frame));
      }
      if (!targets.insert(tm.target_frame).second) {
        throw Error(Errc::validation, where.str() + ": duplicate target frame " +
                                          std::to_string(tm.target_frame));
      }
      for (const TrackPoint& p : tm.points) {
        if (!image_size.contains(p.source.u, p.source.v)) {
          throw Error(Errc::validation,
                      where.str() + ": source pixel outside image");
        }
      }
      try {
        tm.validate();
      } catch (const Error& e) {
        throw Error(Errc::validation, where.str() + ": " + e.what());
      }
    }
  }
}

}  // namespace plot
