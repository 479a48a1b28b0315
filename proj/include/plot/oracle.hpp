#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plot/core.hpp"
#include "plot/scene.hpp"

namespace plot {

// Camera-to-world pose. World coordinates are frame 0's camera coordinates
// when the first pose is the identity.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

// A cuboid with constant per-frame velocity and yaw rate in world
// coordinates. `box` is the pose at frame 0; its score is unused.
struct SyntheticObject {
  Box3D box;
  Vec3 velocity = Vec3::Zero();
  double yaw_rate = 0.0;
  double confidence = 0.9;
};

enum class OcclusionSide { bottom, left, right };

// A screen-space occluder covering a fraction of one object's silhouette
// rows (bottom) or columns (left/right) in one frame.
struct Occlusion {
  int object = 0;
  int frame = 0;
  double fraction = 0.5;
  OcclusionSide side = OcclusionSide::bottom;
};

struct NoiseSpec {
  double depth_sigma = 0.0;
  std::vector<int> depth_noise_frames;  // empty: every frame
  double track_jitter_px = 0.0;
  double drop_probability = 0.0;
  int min_mask_pixels = 1;
  std::vector<Occlusion> occlusions;
};

struct SyntheticScene {
  CameraIntrinsics intrinsics;
  ImageSize image_size;
  std::vector<CameraPose> poses;  // one per frame
  std::vector<SyntheticObject> objects;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int track_stride = 1;  // track every n-th mask pixel
  double background_depth = 1000.0;

  int num_frames() const { return static_cast<int>(poses.size()); }
  void validate() const;
  // Object pose in a frame's camera coordinates.
  Box3D object_in_camera(int object, int frame) const;
};

// Per-pixel render of one frame, before depth noise.
struct FrameRender {
  std::vector<double> depth;  // exact z, background where nothing is hit
  std::vector<int> owner;     // object index, -1 background, -2 occluder
  std::vector<int> silhouette;  // owner ignoring occluders
  struct Patch {
    int object = 0;
    double u0 = 0, v0 = 0, u1 = 0, v1 = 0;  // continuous image rectangle
    double depth = 0.0;
  };
  std::vector<Patch> occluders;
};

FrameRender render_frame(const SyntheticScene& scene, int frame);

// Nearest hit along the ray through continuous image point (u, v):
// returns z (or the background depth) and sets *owner like FrameRender.
double cast_ray(const SyntheticScene& scene, int frame,
                const std::vector<FrameRender::Patch>& occluders, double u, double v,
                int* owner);

// Rendered depth as float32 with the noise spec applied.
DepthRaster render_depth(const SyntheticScene& scene, int frame, const FrameRender& r);
DepthRaster render_depth(const SyntheticScene& scene, int frame);

struct RenderedDetection {
  Detection detection;
  int object = 0;
};

// One detection per visible object with at least min_mask_pixels pixels,
// minus seeded drops. mask_ids are assigned in object order from 0.
std::vector<RenderedDetection> render_masks(const SyntheticScene& scene, int frame,
                                            const FrameRender& r,
                                            std::vector<int>* dropped = nullptr);

// Tracks of one object's mask pixels from src_frame into every other frame.
std::vector<TrackedMask> generate_tracks(const SyntheticScene& scene, int src_frame,
                                         int object, std::span<const Pixel> pixels,
                                         const std::vector<FrameRender>& renders);

struct SyntheticOutput {
  SceneBundle bundle;
  std::vector<std::vector<Box3D>> truth;          // [frame][object], camera coords
  std::vector<std::vector<std::size_t>> visible;  // [frame][object] pixel counts
  std::vector<std::vector<std::optional<Box2D>>> truth_box2d;  // silhouette boxes
  std::map<std::pair<int, int>, int> mask_object;  // (frame, mask_id) -> object
  std::vector<std::pair<int, int>> dropped;        // (frame, object)
};

SyntheticOutput synthesize(const SyntheticScene& scene);

// Ingest layout plus truth.json and KITTI ground truth under gt/%06d.txt.
void emit_scene(const SyntheticOutput& out, const std::filesystem::path& dir);

std::string truth_to_json(const SyntheticOutput& out);

// Scene spec file (JSON). Unknown keys are errors.
SyntheticScene parse_scene_spec(const std::string& text, const std::string& origin);
SyntheticScene load_scene_spec(const std::filesystem::path& path);

}  // namespace plot
