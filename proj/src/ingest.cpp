#include "plot/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace plot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kDepthMagic = {'P', 'L', 'D', 'P'};
constexpr std::uint32_t kDepthVersion = 1;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF),
                         static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF),
                         static_cast<char>((v >> 24) & 0xFF)};
  os.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d%s", index, ext);
  return buf;
}

std::string track_name(int frame, int mask_id) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%06d_%04d.json", frame, mask_id);
  return buf;
}

json read_json(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

// Wraps JSON access errors with the file they came from.
template <typename Fn>
auto with_context(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

// ---------------------------------------------------------------- depth ---

DepthRaster read_depth(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kDepthMagic.data(), 4) != 0) {
    throw Error(Errc::parse, path.string() + ": not a depth raster (bad magic)");
  }
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(b + 4);
  if (version != kDepthVersion) {
    throw Error(Errc::parse, path.string() + ": unsupported depth version " +
                                 std::to_string(version));
  }
  DepthRaster depth;
  depth.size = {static_cast<int>(get_u32(b + 8)), static_cast<int>(get_u32(b + 12))};
  const std::size_t n = static_cast<std::size_t>(depth.size.width) * depth.size.height;
  if (bytes.size() != 16 + 4 * n) {
    throw Error(Errc::parse, path.string() + ": payload size does not match " +
                                 std::to_string(depth.size.width) + "x" +
                                 std::to_string(depth.size.height));
  }
  depth.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t raw = get_u32(b + 16 + 4 * i);
    std::memcpy(&depth.values[i], &raw, 4);
  }
  return depth;
}

void write_depth(const DepthRaster& depth, const fs::path& path) {
  std::ostringstream os(std::ios::binary);
  os.write(kDepthMagic.data(), 4);
  put_u32(os, kDepthVersion);
  put_u32(os, static_cast<std::uint32_t>(depth.size.width));
  put_u32(os, static_cast<std::uint32_t>(depth.size.height));
  for (float v : depth.values) {
    std::uint32_t raw;
    std::memcpy(&raw, &v, 4);
    put_u32(os, raw);
  }
  write_text_file(path, os.str());
}

// ------------------------------------------------------------------ RLE ---

std::vector<int> encode_rle(std::span<const Pixel> pixels, ImageSize size) {
  std::vector<int> counts;
  long long cursor = 0;  // next raster index not yet covered by a run
  long long run_start = -1, run_end = -1;
  auto flush = [&] {
    if (run_start < 0) return;
    counts.push_back(static_cast<int>(run_start - cursor));
    counts.push_back(static_cast<int>(run_end - run_start));
    cursor = run_end;
  };
  for (const Pixel& p : pixels) {
    const long long idx = static_cast<long long>(p.v) * size.width + p.u;
    if (idx == run_end) {
      ++run_end;
    } else {
      flush();
      run_start = idx;
      run_end = idx + 1;
    }
  }
  flush();
  return counts;
}

std::vector<Pixel> decode_rle(std::span<const int> counts, ImageSize size) {
  std::vector<Pixel> pixels;
  long long cursor = 0;
  const long long total = static_cast<long long>(size.width) * size.height;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw Error(Errc::parse, "negative RLE count");
    if (i % 2 == 1) {
      if (cursor + counts[i] > total) {
        throw Error(Errc::parse, "RLE runs past the end of the raster");
      }
      for (long long k = 0; k < counts[i]; ++k) {
        const long long idx = cursor + k;
        pixels.push_back({static_cast<int>(idx % size.width),
                          static_cast<int>(idx / size.width)});
      }
    }
    cursor += counts[i];
  }
  return pixels;
}

// ---------------------------------------------------------------- scene ---

SceneBundle load_scene(const fs::path& dir) {
  SceneBundle scene;
  const fs::path intr_path = dir / "intrinsics.json";
  if (!fs::exists(intr_path)) {
    throw Error(Errc::io, "missing intrinsics file " + intr_path.string());
  }
  with_context(intr_path, [&] {
    const json j = read_json(intr_path);
    scene.intrinsics = {j.at("fx").get<double>(), j.at("fy").get<double>(),
                        j.at("cx").get<double>(), j.at("cy").get<double>()};
    scene.intrinsics.validate();
  });

  const fs::path frames_dir = dir / "frames";
  if (!fs::is_directory(frames_dir)) {
    throw Error(Errc::io, "missing frames directory " + frames_dir.string());
  }
  static const std::regex depth_re(R"((\d{6})\.depth)");
  static const std::regex mask_re(R"((\d{6})\.json)");
  static const std::regex track_re(R"((\d{6})_(\d{4})\.json)");

  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, depth_re)) continue;
    Frame f;
    f.index = std::stoi(m[1].str());
    f.depth = read_depth(entry.path());
    scene.frames.push_back(std::move(f));
  }
  if (scene.frames.empty()) {
    throw Error(Errc::io, "no depth rasters in " + frames_dir.string());
  }
  std::sort(scene.frames.begin(), scene.frames.end(),
            [](const Frame& a, const Frame& b) { return a.index < b.index; });
  scene.image_size = scene.frames.front().depth.size;
  for (const Frame& f : scene.frames) {
    if (f.depth.size != scene.image_size) {
      throw Error(Errc::validation,
                  (frames_dir / frame_name(f.index, ".depth")).string() +
                      ": dimension mismatch with first frame");
    }
  }

  const fs::path masks_dir = dir / "masks";
  if (fs::is_directory(masks_dir)) {
    for (const auto& entry : fs::directory_iterator(masks_dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (!std::regex_match(name, m, mask_re)) continue;
      const int index = std::stoi(m[1].str());
      if (!scene.has_frame(index)) {
        throw Error(Errc::validation,
                    entry.path().string() + ": mask file for frame " +
                        std::to_string(index) + " without a depth raster");
      }
      Frame& f = scene.frames[static_cast<std::size_t>(index - scene.frames.front().index)];
      with_context(entry.path(), [&] {
        const json j = read_json(entry.path());
        for (const json& jm : j.at("masks")) {
          const auto counts = jm.at("rle").get<std::vector<int>>();
          const auto box = jm.at("box").get<std::vector<double>>();
          if (box.size() != 4) throw Error(Errc::parse, "box must have 4 values");
          const int mask_id = jm.at("mask_id").get<int>();
          try {
            f.detections.push_back(Detection{
                mask_id,
                InstanceMask(index, decode_rle(counts, scene.image_size),
                             scene.image_size, jm.at("confidence").get<double>(),
                             jm.at("class").get<std::string>()),
                Box2D(box[0], box[1], box[2], box[3])});
          } catch (const Error& e) {
            throw Error(e.code(), "mask " + std::to_string(mask_id) + ": " + e.what());
          }
        }
      });
    }
  }

  const fs::path tracks_dir = dir / "tracks";
  if (fs::is_directory(tracks_dir)) {
    for (const auto& entry : fs::directory_iterator(tracks_dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (!std::regex_match(name, m, track_re)) continue;
      with_context(entry.path(), [&] {
        const json j = read_json(entry.path());
        TrackKey key{j.at("source_frame").get<int>(), j.at("mask_id").get<int>()};
        if (key.source_frame != std::stoi(m[1].str()) ||
            key.mask_id != std::stoi(m[2].str())) {
          throw Error(Errc::validation, "header does not match file name");
        }
        const json& src = j.at("source_pixels");
        std::vector<TrackedMask> list;
        for (const json& jt : j.at("targets")) {
          TrackedMask tm;
          tm.source_frame = key.source_frame;
          tm.target_frame = jt.at("target_frame").get<int>();
          const json& pts = jt.at("points");
          const json& vis = jt.at("visible");
          if (pts.size() != src.size() || vis.size() != src.size()) {
            throw Error(Errc::parse, "target frame " +
                                         std::to_string(tm.target_frame) +
                                         ": array lengths differ from source_pixels");
          }
          tm.points.reserve(src.size());
          for (std::size_t i = 0; i < src.size(); ++i) {
            TrackPoint p;
            p.source = {src[i].at(0).get<int>(), src[i].at(1).get<int>()};
            p.u = number_or_nan(pts[i].at(0));
            p.v = number_or_nan(pts[i].at(1));
            p.visible = vis[i].get<int>() != 0;
            tm.points.push_back(p);
          }
          list.push_back(std::move(tm));
        }
        if (!scene.tracks.emplace(key, std::move(list)).second) {
          throw Error(Errc::validation, "duplicate track record");
        }
      });
    }
  }

  scene.canonicalize();
  scene.validate();
  return scene;
}

void write_scene(const SceneBundle& scene, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  fs::create_directories(dir / "masks", ec);
  fs::create_directories(dir / "tracks", ec);

  json intr = {{"fx", scene.intrinsics.fx},
               {"fy", scene.intrinsics.fy},
               {"cx", scene.intrinsics.cx},
               {"cy", scene.intrinsics.cy}};
  write_text_file(dir / "intrinsics.json", intr.dump(2) + "\n");

  for (const Frame& f : scene.frames) {
    write_depth(f.depth, dir / "frames" / frame_name(f.index, ".depth"));
    json masks = json::array();
    for (const Detection& d : f.detections) {
      masks.push_back({{"mask_id", d.mask_id},
                       {"class", d.mask.class_label()},
                       {"confidence", d.mask.confidence()},
                       {"box", {d.box.u_c(), d.box.v_c(), d.box.w(), d.box.h()}},
                       {"rle", encode_rle(d.mask.pixels(), scene.image_size)}});
    }
    json jf = {{"frame", f.index}, {"masks", std::move(masks)}};
    write_text_file(dir / "masks" / frame_name(f.index, ".json"), jf.dump() + "\n");
  }

  for (const auto& [key, list] : scene.tracks) {
    json src = json::array();
    if (!list.empty()) {
      for (const TrackPoint& p : list.front().points) {
        src.push_back({p.source.u, p.source.v});
      }
    }
    json targets = json::array();
    for (const TrackedMask& tm : list) {
      if (tm.points.size() != src.size()) {
        throw Error(Errc::invalid_argument,
                    "tracked masks of one detection must query the same pixels");
      }
      json pts = json::array();
      json vis = json::array();
      for (std::size_t i = 0; i < tm.points.size(); ++i) {
        const TrackPoint& p = tm.points[i];
        if (p.source != list.front().points[i].source) {
          throw Error(Errc::invalid_argument,
                      "tracked masks of one detection must query the same pixels");
        }
        pts.push_back({number_or_null(p.u), number_or_null(p.v)});
        vis.push_back(p.visible ? 1 : 0);
      }
      targets.push_back({{"target_frame", tm.target_frame},
                         {"points", std::move(pts)},
                         {"visible", std::move(vis)}});
    }
    json jt = {{"source_frame", key.source_frame},
               {"mask_id", key.mask_id},
               {"source_pixels", std::move(src)},
               {"targets", std::move(targets)}};
    write_text_file(dir / "tracks" / track_name(key.source_frame, key.mask_id),
                    jt.dump() + "\n");
  }
}

// ---------------------------------------------------------------- KITTI ---

std::string format_kitti_line(const Box3D& box) {
  box.validate();
  const double yaw = normalize_angle(box.yaw);
  const double alpha = normalize_angle(yaw - std::atan2(box.center.x(), box.center.z()));
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  if (box.box2d) {
    x1 = box.box2d->u_min();
    y1 = box.box2d->v_min();
    x2 = box.box2d->u_max();
    y2 = box.box2d->v_max();
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s 0.00 0 %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f "
                "%.2f %.2f %.2f",
                box.class_label.c_str(), alpha, x1, y1, x2, y2, box.height,
                box.width, box.length, box.center.x(),
                box.center.y() + 0.5 * box.height, box.center.z(), yaw,
                box.score);
  return buf;
}

Box3D parse_kitti_line(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.size() != 15 && tok.size() != 16) {
    throw Error(Errc::parse, "expected 15 or 16 fields, got " +
                                 std::to_string(tok.size()));
  }
  std::vector<double> v(tok.size() - 1);
  for (std::size_t i = 1; i < tok.size(); ++i) {
    try {
      std::size_t used = 0;
      v[i - 1] = std::stod(tok[i], &used);
      if (used != tok[i].size()) throw std::invalid_argument(tok[i]);
    } catch (const std::exception&) {
      throw Error(Errc::parse, "field " + std::to_string(i + 1) +
                                   " is not a number: '" + tok[i] + "'");
    }
  }
  Box3D box;
  box.class_label = tok[0];
  // v: trunc occ alpha x1 y1 x2 y2 h w l x y z ry [score]
  if (v[5] > v[3] && v[6] > v[4]) {
    box.box2d = Box2D::from_corners(v[3], v[4], v[5], v[6]);
  }
  box.height = v[7];
  box.width = v[8];
  box.length = v[9];
  box.center = Vec3(v[10], v[11] - 0.5 * v[7], v[12]);
  box.yaw = normalize_angle(v[13]);
  box.score = v.size() == 15 ? v[14] : 1.0;
  box.validate();
  return box;
}

void write_kitti_labels(std::span<const Box3D> boxes, const fs::path& path) {
  std::string text;
  for (const Box3D& b : boxes) text += format_kitti_line(b) + "\n";
  write_text_file(path, text);
}

std::vector<Box3D> read_kitti_labels(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Box3D> out;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("DontCare", 0) == 0) continue;
    try {
      out.push_back(parse_kitti_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " +
                                e.what());
    }
  }
  return out;
}

// --------------------------------------------------------------- priors ---

PriorTable PriorTable::defaults() {
  PriorTable t;
  t.add({"Car", 1.53, 1.63, 3.88});
  t.add({"Pedestrian", 1.76, 0.66, 0.84});
  t.add({"Cyclist", 1.74, 0.60, 1.76});
  return t;
}

void PriorTable::add(DimensionPrior prior) {
  prior.validate();
  const std::string key = lower(prior.class_label);
  if (!priors_.emplace(key, std::move(prior)).second) {
    throw Error(Errc::validation, "duplicate prior for class '" + key + "'");
  }
}

const DimensionPrior* PriorTable::find(const std::string& class_label) const {
  auto it = priors_.find(lower(class_label));
  return it == priors_.end() ? nullptr : &it->second;
}

PriorTable parse_priors(const std::string& text, const std::string& origin,
                        bool defaults_if_empty) {
  PriorTable table;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(Errc::parse, where + ": expected 'Label: H W L'");
    }
    std::string label = line.substr(0, colon);
    label.erase(0, label.find_first_not_of(" \t"));
    label.erase(label.find_last_not_of(" \t") + 1);
    std::istringstream values(line.substr(colon + 1));
    DimensionPrior p;
    p.class_label = label;
    std::string extra;
    if (label.empty() || !(values >> p.height >> p.width >> p.length) ||
        (values >> extra)) {
      throw Error(Errc::parse, where + ": expected 'Label: H W L'");
    }
    try {
      table.add(p);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }
  if (table.empty() && defaults_if_empty) return PriorTable::defaults();
  return table;
}

PriorTable load_priors(const fs::path& path, bool defaults_if_empty) {
  return parse_priors(read_text_file(path), path.string(), defaults_if_empty);
}

}  // namespace plot
