#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plot/assoc.hpp"
#include "plot/attributes.hpp"
#include "plot/geometry.hpp"
#include "plot/ingest.hpp"
#include "plot/scene.hpp"

namespace plot {

struct PipelineConfig {
  int window = 10;
  std::optional<int> target_frame;  // default: middle frame of the scene
  bool all_frames = false;          // label every frame, not only the target
  double tau_match = 0.3;
  int n_min = 2;
  double c_min = 0.5;
  double supplement_factor = 0.9;
  int clip_bins = 64;
  double clip_tau = 0.6;
  double ambiguity_ratio = 0.05;
  bool rigid_only = false;
  bool trimming = true;
  int min_correspondences = 10;
  std::string priors;  // path; empty selects the built-in table
  bool mod_pi = false;
  std::uint64_t seed = 0;

  void validate() const;
  AssocConfig assoc() const;
  RegistrationConfig registration() const;
  BoxEstimateConfig box() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Every key is optional; unknown keys are errors.
PipelineConfig parse_config(const std::string& text, const std::string& origin);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

// Frames used to label `output_frame`: `window` consecutive frames centered
// on it, shifted to stay inside the scene.
std::vector<int> window_for(const SceneBundle& scene, int output_frame, int window);
// Target frame when none is configured: the middle frame of the scene.
int default_output_frame(const SceneBundle& scene);

struct ObjectLabel {
  Box3D box;
  int tracklet = 0;
  int output_frame = 0;
  int target_frame = 0;  // frame hosting the completed cloud
  std::size_t points = 0;
  std::size_t frames_used = 0;
};

struct StageStats {
  std::size_t tracklets = 0;
  std::size_t removed = 0;
  std::size_t supplemented = 0;
  std::size_t registrations = 0;
  std::size_t skipped_registrations = 0;
  std::size_t fallbacks = 0;  // objects labeled from the output frame alone
  std::size_t failed = 0;
};

struct FrameLabels {
  int frame = 0;
  std::vector<int> window;
  std::vector<ObjectLabel> labels;
  StageStats stats;
  std::vector<std::string> warnings;
};

FrameLabels label_frame(const SceneBundle& scene, const PipelineConfig& cfg,
                        const PriorTable& priors, int output_frame);

// Labels the configured target frame, or every frame when all_frames is set.
std::vector<FrameLabels> run_pipeline(const SceneBundle& scene, const PipelineConfig& cfg,
                                      const PriorTable& priors);

}  // namespace plot
