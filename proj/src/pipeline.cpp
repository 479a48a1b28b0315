#include "plot/pipeline.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace plot {

using nlohmann::json;

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::validation, "config: " + what); };
  if (window < 1) fail("window must be >= 1");
  if (target_frame && *target_frame < 0) fail("target_frame must be >= 0");
  if (!(tau_match >= 0.0 && tau_match <= 1.0)) fail("tau_match must be in [0, 1]");
  if (n_min < 1) fail("n_min must be >= 1");
  if (!(c_min >= 0.0 && c_min <= 1.0)) fail("c_min must be in [0, 1]");
  if (!(supplement_factor >= 0.0 && supplement_factor <= 1.0)) {
    fail("supplement_factor must be in [0, 1]");
  }
  if (!(ambiguity_ratio >= 0.0 && ambiguity_ratio < 1.0)) {
    fail("ambiguity_ratio must be in [0, 1)");
  }
  if (min_correspondences < 3) fail("min_correspondences must be >= 3");
  box().clip.validate();
}

AssocConfig PipelineConfig::assoc() const {
  AssocConfig a;
  a.min_iou = tau_match;
  a.min_observations = n_min;
  a.min_confidence = c_min;
  a.supplement_confidence_factor = supplement_factor;
  return a;
}

RegistrationConfig PipelineConfig::registration() const {
  RegistrationConfig r;
  r.min_correspondences = static_cast<std::size_t>(min_correspondences);
  r.rigid_only = rigid_only;
  r.trimming = trimming;
  return r;
}

BoxEstimateConfig PipelineConfig::box() const {
  BoxEstimateConfig b;
  b.clip.num_bins = clip_bins;
  b.clip.upper_fraction = clip_tau;
  b.ambiguity_ratio = ambiguity_ratio;
  return b;
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, origin + ": " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::validation, origin + ": expected a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "window") c.window = v.get<int>();
      else if (key == "target_frame") {
        if (v.is_null()) c.target_frame.reset();
        else c.target_frame = v.get<int>();
      }
      else if (key == "all_frames") c.all_frames = v.get<bool>();
      else if (key == "tau_match") c.tau_match = v.get<double>();
      else if (key == "n_min") c.n_min = v.get<int>();
      else if (key == "c_min") c.c_min = v.get<double>();
      else if (key == "supplement_factor") c.supplement_factor = v.get<double>();
      else if (key == "clip_bins") c.clip_bins = v.get<int>();
      else if (key == "clip_tau") c.clip_tau = v.get<double>();
      else if (key == "ambiguity_ratio") c.ambiguity_ratio = v.get<double>();
      else if (key == "rigid_only") c.rigid_only = v.get<bool>();
      else if (key == "trimming") c.trimming = v.get<bool>();
      else if (key == "min_correspondences") c.min_correspondences = v.get<int>();
      else if (key == "priors") c.priors = v.get<std::string>();
      else if (key == "mod_pi") c.mod_pi = v.get<bool>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(Errc::validation, origin + ": unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::validation, origin + ": " + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

std::string config_to_json(const PipelineConfig& c) {
  json j = {{"window", c.window},
            {"target_frame", c.target_frame ? json(*c.target_frame) : json(nullptr)},
            {"all_frames", c.all_frames},
            {"tau_match", c.tau_match},
            {"n_min", c.n_min},
            {"c_min", c.c_min},
            {"supplement_factor", c.supplement_factor},
            {"clip_bins", c.clip_bins},
            {"clip_tau", c.clip_tau},
            {"ambiguity_ratio", c.ambiguity_ratio},
            {"rigid_only", c.rigid_only},
            {"trimming", c.trimming},
            {"min_correspondences", c.min_correspondences},
            {"priors", c.priors},
            {"mod_pi", c.mod_pi},
            {"seed", c.seed}};
  return j.dump(2) + "\n";
}

std::vector<int> window_for(const SceneBundle& scene, int output_frame, int window) {
  const std::vector<int> frames = scene.frame_indices();
  if (frames.empty()) return {};
  const int first = frames.front(), last = frames.back();
  const int n = std::min<int>(window, static_cast<int>(frames.size()));
  int start = output_frame - (n - 1) / 2;
  start = std::clamp(start, first, last - n + 1);
  std::vector<int> out;
  for (int f = start; f < start + n; ++f) out.push_back(f);
  return out;
}

int default_output_frame(const SceneBundle& scene) {
  const std::vector<int> frames = scene.frame_indices();
  if (frames.empty()) throw Error(Errc::validation, "scene has no frames");
  return frames.front() + (static_cast<int>(frames.size()) - 1) / 2;
}

FrameLabels label_frame(const SceneBundle& scene, const PipelineConfig& cfg,
                        const PriorTable& priors, int output_frame) {
  if (!scene.has_frame(output_frame)) {
    throw Error(Errc::validation,
                "target frame " + std::to_string(output_frame) + " is not in the scene");
  }
  FrameLabels out;
  out.frame = output_frame;
  out.window = window_for(scene, output_frame, cfg.window);
  const AssocConfig assoc = cfg.assoc();
  const RegistrationConfig reg = cfg.registration();
  const BoxEstimateConfig boxcfg = cfg.box();

  std::vector<ObjectTracklet> raw = build_tracklets(scene, out.window, assoc);
  out.stats.tracklets = raw.size();
  std::vector<ObjectTracklet> tracklets = improve_labels(std::move(raw), scene, out.window, assoc);
  out.stats.removed = out.stats.tracklets - tracklets.size();
  for (const ObjectTracklet& t : tracklets) {
    out.stats.supplemented += t.entries.size() - static_cast<std::size_t>(t.detected_count());
  }

  for (const ObjectTracklet& t : tracklets) {
    const TrackletEntry* entry = t.entry_at(output_frame);
    if (entry == nullptr) continue;
    const std::string context = "tracklet " + std::to_string(t.object_id);
    try {
      PairwiseRegistrations regs;
      if (t.entries.size() > 1) {
        regs = register_tracklet(t, scene, reg);
      } else {
        for (const TrackletEntry& e : t.entries) regs.frames.push_back(e.frame);
      }
      const std::size_t pairs = t.entries.size() * (t.entries.size() - 1);
      out.stats.registrations += regs.fits.size();
      out.stats.skipped_registrations += pairs - regs.fits.size();

      const std::optional<int> tg = select_target_frame(t, regs);
      Completion comp;
      int host = output_frame;
      if (!tg) {
        ++out.stats.fallbacks;
        comp = complete_pseudolidar(t, scene, regs, output_frame);
      } else if (*tg == output_frame) {
        comp = complete_pseudolidar(t, scene, regs, output_frame);
      } else if (const Registration* to_out = regs.find(*tg, output_frame)) {
        host = *tg;
        comp = complete_pseudolidar(t, scene, regs, *tg);
        std::vector<int> tags = comp.cloud.source_frames;
        comp.cloud = to_out->transform.apply(comp.cloud);
        comp.cloud.source_frames = std::move(tags);
      } else {
        comp = complete_pseudolidar(t, scene, regs, output_frame);
      }

      const std::string cls = resolve_class(t);
      const DimensionPrior* prior = priors.find(cls);
      if (prior == nullptr) {
        out.warnings.push_back(context + ": no prior for class '" + cls +
                               "', using raw extents");
      }
      BoxEstimate est = estimate_box(comp.cloud, cls, entry->mask.confidence(), prior, boxcfg);
      est.box.box2d = entry->box;

      ObjectLabel label;
      label.box = std::move(est.box);
      label.tracklet = t.object_id;
      label.output_frame = output_frame;
      label.target_frame = host;
      label.points = comp.cloud.size();
      label.frames_used =
          std::set<int>(comp.cloud.source_frames.begin(), comp.cloud.source_frames.end())
              .size();
      out.labels.push_back(std::move(label));
    } catch (const Error& e) {
      ++out.stats.failed;
      out.warnings.push_back(context + ": " + e.what());
    }
  }
  return out;
}

std::vector<FrameLabels> run_pipeline(const SceneBundle& scene, const PipelineConfig& cfg,
                                      const PriorTable& priors) {
  cfg.validate();
  std::vector<FrameLabels> out;
  if (cfg.all_frames) {
    for (int f : scene.frame_indices()) out.push_back(label_frame(scene, cfg, priors, f));
  } else {
    const int f = cfg.target_frame ? *cfg.target_frame : default_output_frame(scene);
    out.push_back(label_frame(scene, cfg, priors, f));
  }
  return out;
}

}  // namespace plot
