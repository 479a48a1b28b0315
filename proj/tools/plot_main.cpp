#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plot/ingest.hpp"
#include "plot/metrics.hpp"
#include "plot/oracle.hpp"
#include "plot/pipeline.hpp"
#include "plot/viz.hpp"

namespace fs = std::filesystem;

namespace {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

Level log_level() {
  const char* env = std::getenv("PLOT_LOG_LEVEL");
  if (env == nullptr) return Level::info;
  const std::string s = env;
  if (s == "debug") return Level::debug;
  if (s == "warn") return Level::warn;
  if (s == "error") return Level::error;
  if (s == "off" || s == "quiet") return Level::off;
  return Level::info;
}

// key=value lines on stderr
void log(Level lvl, const std::string& fields) {
  static const Level threshold = log_level();
  if (lvl < threshold) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "level=" << names[static_cast<int>(lvl)] << ' ' << fields << '\n';
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

int exit_code_for(plot::Errc code) {
  switch (code) {
    case plot::Errc::io:
    case plot::Errc::parse:
    case plot::Errc::validation:
    case plot::Errc::invalid_argument:
      return 2;
    default:
      return 3;
  }
}

std::string frame_file(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.txt", frame);
  return buf;
}

struct LabelArgs {
  std::string scene;
  std::string out;
  std::string config;
  std::string priors;
  std::optional<int> window;
  std::optional<int> target;
  bool single = false;
  bool all = false;
};

int cmd_label(const LabelArgs& a) {
  plot::PipelineConfig cfg;
  if (!a.config.empty()) cfg = plot::load_config(a.config);
  if (a.window) cfg.window = *a.window;
  if (a.single) cfg.window = 1;
  if (a.target) cfg.target_frame = *a.target;
  if (a.all) cfg.all_frames = true;
  if (!a.priors.empty()) cfg.priors = a.priors;
  cfg.validate();

  const plot::PriorTable priors =
      cfg.priors.empty() ? plot::PriorTable::defaults() : plot::load_priors(cfg.priors, true);
  const plot::SceneBundle scene = plot::load_scene(a.scene);
  std::size_t detections = 0;
  for (const plot::Frame& f : scene.frames) detections += f.detections.size();
  log(Level::info, "stage=ingest scene=" + quote(a.scene) +
                       " frames=" + std::to_string(scene.frames.size()) +
                       " detections=" + std::to_string(detections) +
                       " tracks=" + std::to_string(scene.tracks.size()));

  const std::vector<plot::FrameLabels> results = plot::run_pipeline(scene, cfg, priors);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw plot::Error(plot::Errc::io, a.out + ": " + ec.message());

  std::size_t total = 0;
  for (const plot::FrameLabels& r : results) {
    const std::string f = "frame=" + std::to_string(r.frame);
    log(Level::info, "stage=assoc " + f + " window=" + std::to_string(r.window.front()) + ".." +
                         std::to_string(r.window.back()) +
                         " tracklets=" + std::to_string(r.stats.tracklets) +
                         " removed=" + std::to_string(r.stats.removed) +
                         " supplemented=" + std::to_string(r.stats.supplemented));
    log(Level::info, "stage=geometry " + f +
                         " registrations=" + std::to_string(r.stats.registrations) +
                         " skipped_registrations=" +
                         std::to_string(r.stats.skipped_registrations) +
                         " fallbacks=" + std::to_string(r.stats.fallbacks));
    for (const std::string& w : r.warnings) log(Level::warn, f + " msg=" + quote(w));
    for (const plot::ObjectLabel& l : r.labels) {
      log(Level::debug, "stage=attributes " + f + " tracklet=" + std::to_string(l.tracklet) +
                            " host_frame=" + std::to_string(l.target_frame) +
                            " points=" + std::to_string(l.points) +
                            " frames_used=" + std::to_string(l.frames_used));
    }
    log(Level::info, "stage=attributes " + f + " labels=" + std::to_string(r.labels.size()) +
                         " failed=" + std::to_string(r.stats.failed));
    std::vector<plot::Box3D> boxes;
    for (const plot::ObjectLabel& l : r.labels) boxes.push_back(l.box);
    plot::write_kitti_labels(boxes, fs::path(a.out) / frame_file(r.frame));
    total += boxes.size();
  }
  if (total == 0) {
    log(Level::warn, "stage=output msg=\"no objects labeled\"");
    return 1;
  }
  log(Level::info, "stage=output dir=" + quote(a.out) + " labels=" + std::to_string(total));
  return 0;
}

std::set<std::string> label_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw plot::Error(plot::Errc::io, dir + ": not a directory");
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") {
      names.insert(e.path().filename().string());
    }
  }
  return names;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& report,
             bool mod_pi) {
  const std::set<std::string> preds = label_files(pred_dir);
  const std::set<std::string> gts = label_files(gt_dir);
  std::vector<plot::FramePair> frames;
  for (const std::string& name : gts) {
    if (!preds.count(name)) {
      log(Level::warn, "stage=eval msg=\"no prediction file\" file=" + quote(name));
      continue;
    }
    plot::FramePair fp;
    fp.preds = plot::read_kitti_labels(fs::path(pred_dir) / name);
    fp.gts = plot::read_kitti_labels(fs::path(gt_dir) / name);
    frames.push_back(std::move(fp));
  }
  for (const std::string& name : preds) {
    if (!gts.count(name)) {
      log(Level::warn, "stage=eval msg=\"no ground-truth file\" file=" + quote(name));
    }
  }
  plot::EvalOptions opts;
  opts.mod_pi = mod_pi;
  const plot::EvalReport r = plot::evaluate(frames, opts);
  plot::write_text_file(report, plot::report_to_json(r));
  std::cout << plot::report_to_table(r);
  log(Level::info, "stage=eval frames=" + std::to_string(frames.size()) +
                       " classes=" + std::to_string(r.classes.size()) +
                       " report=" + quote(report));
  return 0;
}

int cmd_synth(const std::string& spec, const std::string& out,
              const std::optional<std::uint64_t>& seed) {
  plot::SyntheticScene s = plot::load_scene_spec(spec);
  if (seed) s.seed = *seed;
  const plot::SyntheticOutput o = plot::synthesize(s);
  plot::emit_scene(o, out);
  log(Level::info, "stage=synth spec=" + quote(spec) + " frames=" +
                       std::to_string(s.num_frames()) + " objects=" +
                       std::to_string(s.objects.size()) + " dropped=" +
                       std::to_string(o.dropped.size()) + " out=" + quote(out));
  return 0;
}

int cmd_viz(const std::string& labels, const std::string& truth, const std::string& out) {
  const std::vector<plot::Box3D> preds = plot::read_kitti_labels(labels);
  std::vector<plot::Box3D> gts;
  if (!truth.empty()) gts = plot::read_kitti_labels(truth);
  plot::write_text_file(out, plot::render_bev_svg(preds, gts));
  log(Level::info, "stage=viz predictions=" + std::to_string(preds.size()) +
                       " truth=" + std::to_string(gts.size()) + " out=" + quote(out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-labels for monocular 3D object detection from video"};
  app.require_subcommand(1);

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Generate KITTI labels for a scene directory");
  label->add_option("scene", la.scene, "Scene directory")->required();
  label->add_option("out", la.out, "Output label directory")->required();
  label->add_option("--config", la.config, "Pipeline config (JSON)");
  label->add_option("--priors", la.priors, "Prior size table");
  label->add_option("--window", la.window, "Number of frames used per label");
  label->add_option("--target-frame", la.target, "Frame to label");
  label->add_flag("--single-frame", la.single, "Use the target frame alone");
  label->add_flag("--all-frames", la.all, "Label every frame");

  std::string pred_dir, gt_dir, report;
  bool mod_pi = false;
  auto* eval = app.add_subcommand("eval", "Evaluate predicted labels against ground truth");
  eval->add_option("pred", pred_dir, "Prediction label directory")->required();
  eval->add_option("gt", gt_dir, "Ground-truth label directory")->required();
  eval->add_option("report", report, "Output JSON report")->required();
  eval->add_flag("--mod-pi", mod_pi, "Fold orientation errors to [0, pi/2]");

  std::string spec, synth_out;
  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Emit a synthetic scene from a spec file");
  synth->add_option("spec", spec, "Scene spec (JSON)")->required();
  synth->add_option("out", synth_out, "Output scene directory")->required();
  synth->add_option("--seed", seed, "Override the spec's seed");

  std::string viz_labels, viz_truth, viz_out;
  auto* viz = app.add_subcommand("viz", "Bird's-eye-view SVG of a label file");
  viz->add_option("labels", viz_labels, "KITTI label file")->required();
  viz->add_option("out", viz_out, "Output SVG")->required();
  viz->add_option("--truth", viz_truth, "Ground-truth label file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*label) return cmd_label(la);
    if (*eval) return cmd_eval(pred_dir, gt_dir, report, mod_pi);
    if (*synth) return cmd_synth(spec, synth_out, seed);
    if (*viz) return cmd_viz(viz_labels, viz_truth, viz_out);
  } catch (const plot::Error& e) {
    log(Level::error, std::string("code=") + plot::to_string(e.code()) + " msg=" + quote(e.what()));
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log(Level::error, "code=internal msg=" + quote(e.what()));
    return 3;
  }
  return 3;
}
