#include "plot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <json.hpp>

#include "plot/ingest.hpp"

namespace plot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kDepthNoise = 1, kDrop = 2, kJitter = 3 };

// Independent generator per (purpose, frame, object).
std::mt19937_64 make_rng(std::uint64_t seed, Stream s, int frame, int object = 0) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ s);
  x = splitmix64(x ^ static_cast<std::uint64_t>(frame + 1));
  x = splitmix64(x ^ static_cast<std::uint64_t>(object + 1));
  return std::mt19937_64(x);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Placed {
  Vec3 center;
  Mat3 rot_t;  // camera -> box local
  Vec3 half;   // (L/2, H/2, W/2)
};

std::vector<Placed> place_objects(const SyntheticScene& scene, int frame) {
  std::vector<Placed> out;
  for (int o = 0; o < static_cast<int>(scene.objects.size()); ++o) {
    const Box3D b = scene.object_in_camera(o, frame);
    out.push_back({b.center, rot_y(b.yaw).transpose(),
                   Vec3(0.5 * b.length, 0.5 * b.height, 0.5 * b.width)});
  }
  return out;
}

// Slab test of the camera ray t * d against one box; returns the entry t.
bool hit_box(const Placed& p, const Vec3& d, double* t_hit) {
  const Vec3 o = -(p.rot_t * p.center);
  const Vec3 dl = p.rot_t * d;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (dl(i) == 0.0) {
      if (std::abs(o(i)) > p.half(i)) return false;
      continue;
    }
    double t1 = (-p.half(i) - o(i)) / dl(i);
    double t2 = (p.half(i) - o(i)) / dl(i);
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || t_near <= 0.0) return false;
  *t_hit = t_near;
  return true;
}

double cast(const SyntheticScene& scene, const std::vector<Placed>& placed,
            const std::vector<FrameRender::Patch>& occluders, double u, double v,
            bool with_occluders, int* owner) {
  const CameraIntrinsics& K = scene.intrinsics;
  const Vec3 d((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
  double best = scene.background_depth;
  int who = -1;
  for (std::size_t o = 0; o < placed.size(); ++o) {
    double t = 0.0;
    if (hit_box(placed[o], d, &t) && t < best) {
      best = t;
      who = static_cast<int>(o);
    }
  }
  if (with_occluders) {
    for (const auto& p : occluders) {
      if (u >= p.u0 && u < p.u1 && v >= p.v0 && v < p.v1 && p.depth < best) {
        best = p.depth;
        who = -2;
      }
    }
  }
  if (owner) *owner = who;
  return best;
}

bool noisy_frame(const NoiseSpec& n, int frame) {
  if (!(n.depth_sigma > 0.0)) return false;
  if (n.depth_noise_frames.empty()) return true;
  return std::find(n.depth_noise_frames.begin(), n.depth_noise_frames.end(), frame) !=
         n.depth_noise_frames.end();
}

}  // namespace

void SyntheticScene::validate() const {
  intrinsics.validate();
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw Error(Errc::validation, "synthetic scene: image size must be positive");
  }
  if (poses.empty()) throw Error(Errc::validation, "synthetic scene: no frames");
  for (const SyntheticObject& o : objects) {
    o.box.validate();
    if (!(o.confidence >= 0.0 && o.confidence <= 1.0)) {
      throw Error(Errc::validation, "synthetic scene: confidence outside [0, 1]");
    }
  }
  if (noise.depth_sigma < 0.0 || noise.track_jitter_px < 0.0) {
    throw Error(Errc::validation, "synthetic scene: negative noise level");
  }
  if (!(noise.drop_probability >= 0.0 && noise.drop_probability <= 1.0)) {
    throw Error(Errc::validation, "synthetic scene: drop_probability outside [0, 1]");
  }
  if (noise.min_mask_pixels < 1) {
    throw Error(Errc::validation, "synthetic scene: min_mask_pixels must be >= 1");
  }
  for (const Occlusion& oc : noise.occlusions) {
    if (oc.object < 0 || oc.object >= static_cast<int>(objects.size()) || oc.frame < 0 ||
        oc.frame >= num_frames()) {
      throw Error(Errc::validation, "synthetic scene: occlusion references a missing "
                                    "object or frame");
    }
    if (!(oc.fraction >= 0.0 && oc.fraction <= 1.0)) {
      throw Error(Errc::validation, "synthetic scene: occlusion fraction outside [0, 1]");
    }
  }
  if (track_stride < 1) throw Error(Errc::validation, "synthetic scene: track_stride < 1");
  if (!(background_depth > 0.0)) {
    throw Error(Errc::validation, "synthetic scene: background_depth must be positive");
  }
}

Box3D SyntheticScene::object_in_camera(int object, int frame) const {
  const SyntheticObject& o = objects.at(static_cast<std::size_t>(object));
  const CameraPose& cam = poses.at(static_cast<std::size_t>(frame));
  const Vec3 world = o.box.center + static_cast<double>(frame) * o.velocity;
  const double world_yaw = o.box.yaw + frame * o.yaw_rate;
  Box3D b = o.box;
  b.center = rot_y(cam.yaw).transpose() * (world - cam.position);
  b.yaw = normalize_angle(world_yaw - cam.yaw);
  b.score = 1.0;
  b.box2d.reset();
  return b;
}

FrameRender render_frame(const SyntheticScene& scene, int frame) {
  const int w = scene.image_size.width, h = scene.image_size.height;
  const std::vector<Placed> placed = place_objects(scene, frame);
  FrameRender r;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  r.depth.resize(n);
  r.silhouette.resize(n);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      r.depth[i] = cast(scene, placed, r.occluders, u, v, false, &r.silhouette[i]);
    }
  }
  r.owner = r.silhouette;

  for (const Occlusion& oc : scene.noise.occlusions) {
    if (oc.frame != frame || oc.fraction <= 0.0) continue;
    int umin = w, umax = -1, vmin = h, vmax = -1;
    double zmin = std::numeric_limits<double>::infinity();
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = static_cast<std::size_t>(v) * w + u;
        if (r.silhouette[i] != oc.object) continue;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        zmin = std::min(zmin, r.depth[i]);
      }
    }
    if (umax < 0) continue;
    FrameRender::Patch p;
    p.object = oc.object;
    p.depth = std::max(0.7 * zmin, 0.1);
    p.u0 = umin - 0.5;
    p.u1 = umax + 0.5;
    p.v0 = vmin - 0.5;
    p.v1 = vmax + 0.5;
    if (oc.side == OcclusionSide::bottom) {
      const long k = std::lround(oc.fraction * (vmax - vmin + 1));
      p.v0 = vmax - k + 0.5;
    } else {
      const long k = std::lround(oc.fraction * (umax - umin + 1));
      if (oc.side == OcclusionSide::left) {
        p.u1 = umin + k - 0.5;
      } else {
        p.u0 = umax - k + 0.5;
      }
    }
    r.occluders.push_back(p);
  }
  if (!r.occluders.empty()) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = static_cast<std::size_t>(v) * w + u;
        for (const auto& p : r.occluders) {
          if (u >= p.u0 && u < p.u1 && v >= p.v0 && v < p.v1 && p.depth < r.depth[i]) {
            r.depth[i] = p.depth;
            r.owner[i] = -2;
          }
        }
      }
    }
  }
  return r;
}

double cast_ray(const SyntheticScene& scene, int frame,
                const std::vector<FrameRender::Patch>& occluders, double u, double v,
                int* owner) {
  return cast(scene, place_objects(scene, frame), occluders, u, v, true, owner);
}

DepthRaster render_depth(const SyntheticScene& scene, int frame, const FrameRender& r) {
  DepthRaster out(scene.image_size, 0.0f);
  for (std::size_t i = 0; i < r.depth.size(); ++i) {
    out.values[i] = static_cast<float>(r.depth[i]);
  }
  if (noisy_frame(scene.noise, frame)) {
    std::mt19937_64 rng = make_rng(scene.seed, kDepthNoise, frame);
    std::normal_distribution<double> gauss(0.0, scene.noise.depth_sigma);
    for (std::size_t i = 0; i < r.depth.size(); ++i) {
      const double z = r.depth[i] + gauss(rng);
      out.values[i] = static_cast<float>(std::max(z, 1e-3));
    }
  }
  return out;
}

DepthRaster render_depth(const SyntheticScene& scene, int frame) {
  return render_depth(scene, frame, render_frame(scene, frame));
}

std::vector<RenderedDetection> render_masks(const SyntheticScene& scene, int frame,
                                            const FrameRender& r, std::vector<int>* dropped) {
  const int w = scene.image_size.width;
  std::vector<std::vector<Pixel>> pixels(scene.objects.size());
  for (std::size_t i = 0; i < r.owner.size(); ++i) {
    if (r.owner[i] >= 0) {
      pixels[static_cast<std::size_t>(r.owner[i])].push_back(
          {static_cast<int>(i % w), static_cast<int>(i / w)});
    }
  }
  std::mt19937_64 rng = make_rng(scene.seed, kDrop, frame);
  std::vector<RenderedDetection> out;
  int next_id = 0;
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    if (pixels[o].empty() ||
        static_cast<int>(pixels[o].size()) < scene.noise.min_mask_pixels) {
      continue;
    }
    if (uniform01(rng) < scene.noise.drop_probability) {
      if (dropped) dropped->push_back(static_cast<int>(o));
      continue;
    }
    const SyntheticObject& obj = scene.objects[o];
    InstanceMask mask(frame, std::move(pixels[o]), scene.image_size, obj.confidence,
                      obj.box.class_label);
    const Box2D box = box_from_mask(mask);
    out.push_back({Detection{next_id++, std::move(mask), box}, static_cast<int>(o)});
  }
  return out;
}

std::vector<TrackedMask> generate_tracks(const SyntheticScene& scene, int src_frame,
                                         int object, std::span<const Pixel> pixels,
                                         const std::vector<FrameRender>& renders) {
  const int w = scene.image_size.width, h = scene.image_size.height;
  const CameraIntrinsics& K = scene.intrinsics;
  const FrameRender& src = renders.at(static_cast<std::size_t>(src_frame));
  const Box3D b_src = scene.object_in_camera(object, src_frame);
  const Mat3 r_src_t = rot_y(b_src.yaw).transpose();

  // Surface points in the object's local frame.
  std::vector<Pixel> queried;
  std::vector<Vec3> local;
  for (std::size_t i = 0; i < pixels.size(); i += static_cast<std::size_t>(scene.track_stride)) {
    const Pixel& p = pixels[i];
    const double z = src.depth[static_cast<std::size_t>(p.v) * w + p.u];
    queried.push_back(p);
    local.push_back(r_src_t * (K.backproject(p.u, p.v, z) - b_src.center));
  }

  std::vector<TrackedMask> out;
  for (int t = 0; t < scene.num_frames(); ++t) {
    if (t == src_frame) continue;
    const std::vector<Placed> placed = place_objects(scene, t);
    const Box3D b_tgt = scene.object_in_camera(object, t);
    const Mat3 r_tgt = rot_y(b_tgt.yaw);
    std::mt19937_64 rng = make_rng(scene.seed, kJitter, src_frame * 4096 + t, object);
    std::normal_distribution<double> gauss(0.0, scene.noise.track_jitter_px);
    const auto& occluders = renders.at(static_cast<std::size_t>(t)).occluders;

    TrackedMask tm;
    tm.source_frame = src_frame;
    tm.target_frame = t;
    tm.points.reserve(queried.size());
    for (std::size_t i = 0; i < queried.size(); ++i) {
      const Vec3 x = r_tgt * local[i] + b_tgt.center;
      TrackPoint tp;
      tp.source = queried[i];
      if (!(x.z() > 1e-9)) {
        tp.u = tp.v = -1.0;
        tm.points.push_back(tp);
        continue;
      }
      const Eigen::Vector2d uv = K.project(x);
      tp.u = uv.x();
      tp.v = uv.y();
      if (uv.x() >= -0.5 && uv.x() < w - 0.5 && uv.y() >= -0.5 && uv.y() < h - 0.5) {
        int who = -1;
        const double z = cast(scene, placed, occluders, uv.x(), uv.y(), true, &who);
        tp.visible = who == object && std::abs(z - x.z()) <= 1e-6;
      }
      if (tp.visible && scene.noise.track_jitter_px > 0.0) {
        tp.u += gauss(rng);
        tp.v += gauss(rng);
      }
      tm.points.push_back(tp);
    }
    out.push_back(std::move(tm));
  }
  return out;
}

SyntheticOutput synthesize(const SyntheticScene& scene) {
  scene.validate();
  const int nf = scene.num_frames();
  const std::size_t no = scene.objects.size();
  std::vector<FrameRender> renders;
  renders.reserve(static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f) renders.push_back(render_frame(scene, f));

  SyntheticOutput out;
  out.bundle.intrinsics = scene.intrinsics;
  out.bundle.image_size = scene.image_size;
  const int w = scene.image_size.width;
  for (int f = 0; f < nf; ++f) {
    const FrameRender& r = renders[static_cast<std::size_t>(f)];
    Frame frame;
    frame.index = f;
    frame.depth = render_depth(scene, f, r);
    std::vector<int> dropped;
    std::vector<RenderedDetection> dets = render_masks(scene, f, r, &dropped);
    for (int o : dropped) out.dropped.emplace_back(f, o);
    for (RenderedDetection& d : dets) {
      out.mask_object[{f, d.detection.mask_id}] = d.object;
      auto tracks = generate_tracks(scene, f, d.object, d.detection.mask.pixels(), renders);
      if (!tracks.empty()) {
        out.bundle.tracks[{f, d.detection.mask_id}] = std::move(tracks);
      }
      frame.detections.push_back(std::move(d.detection));
    }
    out.bundle.frames.push_back(std::move(frame));

    std::vector<Box3D> truth;
    std::vector<std::size_t> visible(no, 0);
    std::vector<int> umin(no, w), vmin(no, scene.image_size.height), umax(no, -1), vmax(no, -1);
    for (std::size_t i = 0; i < r.owner.size(); ++i) {
      if (r.owner[i] >= 0) ++visible[static_cast<std::size_t>(r.owner[i])];
      const int s = r.silhouette[i];
      if (s < 0) continue;
      const int u = static_cast<int>(i % w), v = static_cast<int>(i / w);
      const auto k = static_cast<std::size_t>(s);
      umin[k] = std::min(umin[k], u);
      umax[k] = std::max(umax[k], u);
      vmin[k] = std::min(vmin[k], v);
      vmax[k] = std::max(vmax[k], v);
    }
    std::vector<std::optional<Box2D>> boxes(no);
    for (std::size_t o = 0; o < no; ++o) {
      truth.push_back(scene.object_in_camera(static_cast<int>(o), f));
      if (umax[o] >= 0) {
        boxes[o] = Box2D::from_corners(umin[o] - 0.5, vmin[o] - 0.5, umax[o] + 0.5,
                                       vmax[o] + 0.5);
        truth.back().box2d = boxes[o];
      }
    }
    out.truth.push_back(std::move(truth));
    out.visible.push_back(std::move(visible));
    out.truth_box2d.push_back(std::move(boxes));
  }
  out.bundle.canonicalize();
  out.bundle.validate();
  return out;
}

std::string truth_to_json(const SyntheticOutput& out) {
  json frames = json::array();
  for (std::size_t f = 0; f < out.truth.size(); ++f) {
    json objs = json::array();
    for (std::size_t o = 0; o < out.truth[f].size(); ++o) {
      const Box3D& b = out.truth[f][o];
      json jo = {{"object", o},
                 {"class", b.class_label},
                 {"center", {b.center.x(), b.center.y(), b.center.z()}},
                 {"width", b.width},
                 {"height", b.height},
                 {"length", b.length},
                 {"yaw", b.yaw},
                 {"visible_pixels", out.visible[f][o]}};
      if (b.box2d) {
        jo["box"] = {b.box2d->u_c(), b.box2d->v_c(), b.box2d->w(), b.box2d->h()};
      }
      objs.push_back(std::move(jo));
    }
    frames.push_back({{"frame", f}, {"objects", std::move(objs)}});
  }
  json dets = json::array();
  for (const auto& [key, obj] : out.mask_object) {
    dets.push_back({{"frame", key.first}, {"mask_id", key.second}, {"object", obj}});
  }
  json dropped = json::array();
  for (const auto& [f, o] : out.dropped) dropped.push_back({{"frame", f}, {"object", o}});
  return json{{"frames", std::move(frames)},
              {"detections", std::move(dets)},
              {"dropped", std::move(dropped)}}
             .dump(1) +
         "\n";
}

void emit_scene(const SyntheticOutput& out, const fs::path& dir) {
  write_scene(out.bundle, dir);
  write_text_file(dir / "truth.json", truth_to_json(out));
  std::error_code ec;
  fs::create_directories(dir / "gt", ec);
  if (ec) throw Error(Errc::io, (dir / "gt").string() + ": " + ec.message());
  for (std::size_t f = 0; f < out.truth.size(); ++f) {
    std::vector<Box3D> visible;
    for (std::size_t o = 0; o < out.truth[f].size(); ++o) {
      if (out.visible[f][o] > 0) visible.push_back(out.truth[f][o]);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.txt", f);
    write_kitti_labels(visible, dir / "gt" / name);
  }
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw Error(Errc::validation, where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw Error(Errc::validation, where + ": unknown key '" + key + "'");
  }
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(Errc::validation, where + ": expected an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

OcclusionSide parse_side(const std::string& s, const std::string& where) {
  if (s == "bottom") return OcclusionSide::bottom;
  if (s == "left") return OcclusionSide::left;
  if (s == "right") return OcclusionSide::right;
  throw Error(Errc::validation, where + ": unknown occlusion side '" + s + "'");
}

}  // namespace

SyntheticScene parse_scene_spec(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, origin + ": " + e.what());
  }
  SyntheticScene s;
  try {
    check_keys(j,
               {"seed", "image", "intrinsics", "frames", "camera", "poses", "objects", "noise",
                "track_stride", "background_depth"},
               origin);
    s.seed = get_or<std::uint64_t>(j, "seed", 0);
    const json& img = j.at("image");
    check_keys(img, {"width", "height"}, origin + ": image");
    s.image_size = {img.at("width").get<int>(), img.at("height").get<int>()};
    const json& k = j.at("intrinsics");
    check_keys(k, {"fx", "fy", "cx", "cy"}, origin + ": intrinsics");
    s.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(),
                    k.at("cx").get<double>(), k.at("cy").get<double>()};

    if (j.contains("poses")) {
      if (j.contains("frames") || j.contains("camera")) {
        throw Error(Errc::validation, origin + ": 'poses' excludes 'frames' and 'camera'");
      }
      for (const json& p : j.at("poses")) {
        check_keys(p, {"position", "yaw"}, origin + ": poses");
        s.poses.push_back({vec3(p.at("position"), origin + ": poses.position"),
                           get_or(p, "yaw", 0.0)});
      }
    } else {
      const int n = j.at("frames").get<int>();
      if (n < 1) throw Error(Errc::validation, origin + ": frames must be >= 1");
      Vec3 start = Vec3::Zero(), vel = Vec3::Zero();
      double yaw = 0.0, yaw_rate = 0.0;
      if (j.contains("camera")) {
        const json& c = j.at("camera");
        check_keys(c, {"position", "velocity", "yaw", "yaw_rate"}, origin + ": camera");
        if (c.contains("position")) start = vec3(c.at("position"), origin + ": camera");
        if (c.contains("velocity")) vel = vec3(c.at("velocity"), origin + ": camera");
        yaw = get_or(c, "yaw", 0.0);
        yaw_rate = get_or(c, "yaw_rate", 0.0);
      }
      for (int f = 0; f < n; ++f) s.poses.push_back({start + f * vel, yaw + f * yaw_rate});
    }

    for (const json& o : j.at("objects")) {
      const std::string where = origin + ": objects";
      check_keys(o,
                 {"class", "center", "width", "height", "length", "yaw", "velocity",
                  "yaw_rate", "confidence"},
                 where);
      SyntheticObject obj;
      obj.box.class_label = o.at("class").get<std::string>();
      obj.box.center = vec3(o.at("center"), where + ".center");
      obj.box.width = o.at("width").get<double>();
      obj.box.height = o.at("height").get<double>();
      obj.box.length = o.at("length").get<double>();
      obj.box.yaw = normalize_angle(get_or(o, "yaw", 0.0));
      obj.box.score = 1.0;
      if (o.contains("velocity")) obj.velocity = vec3(o.at("velocity"), where + ".velocity");
      obj.yaw_rate = get_or(o, "yaw_rate", 0.0);
      obj.confidence = get_or(o, "confidence", 0.9);
      s.objects.push_back(std::move(obj));
    }

    if (j.contains("noise")) {
      const json& n = j.at("noise");
      check_keys(n,
                 {"depth_sigma", "depth_noise_frames", "track_jitter_px", "drop_probability",
                  "min_mask_pixels", "occlusions"},
                 origin + ": noise");
      s.noise.depth_sigma = get_or(n, "depth_sigma", 0.0);
      s.noise.depth_noise_frames = get_or(n, "depth_noise_frames", std::vector<int>{});
      s.noise.track_jitter_px = get_or(n, "track_jitter_px", 0.0);
      s.noise.drop_probability = get_or(n, "drop_probability", 0.0);
      s.noise.min_mask_pixels = get_or(n, "min_mask_pixels", 1);
      if (n.contains("occlusions")) {
        for (const json& oc : n.at("occlusions")) {
          check_keys(oc, {"object", "frame", "fraction", "side"}, origin + ": occlusions");
          Occlusion occ;
          occ.object = oc.at("object").get<int>();
          occ.frame = oc.at("frame").get<int>();
          occ.fraction = get_or(oc, "fraction", 0.5);
          occ.side = parse_side(get_or<std::string>(oc, "side", "bottom"), origin);
          s.noise.occlusions.push_back(occ);
        }
      }
    }
    s.track_stride = get_or(j, "track_stride", 1);
    s.background_depth = get_or(j, "background_depth", 1000.0);
  } catch (const json::exception& e) {
    throw Error(Errc::validation, origin + ": " + e.what());
  }
  s.validate();
  return s;
}

SyntheticScene load_scene_spec(const fs::path& path) {
  return parse_scene_spec(read_text_file(path), path.string());
}

}  // namespace plot
