#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "plot/core.hpp"
#include "plot/scene.hpp"

namespace plot {

// On-disk scene layout:
//   intrinsics.json            {"fx","fy","cx","cy"}
//   frames/%06d.depth          "PLDP", u32 version, u32 width, u32 height,
//                              then width*height little-endian float32
//   masks/%06d.json            {"frame", "masks": [{"mask_id","class",
//                              "confidence","box":[u_c,v_c,w,h],"rle":[...]}]}
//   tracks/%06d_%04d.json      {"source_frame","mask_id","source_pixels",
//                              "targets":[{"target_frame","points","visible"}]}
// RLE counts run over the row-major raster and start with a background run.
SceneBundle load_scene(const std::filesystem::path& dir);
void write_scene(const SceneBundle& scene, const std::filesystem::path& dir);

DepthRaster read_depth(const std::filesystem::path& path);
void write_depth(const DepthRaster& depth, const std::filesystem::path& path);

std::vector<int> encode_rle(std::span<const Pixel> pixels, ImageSize size);
std::vector<Pixel> decode_rle(std::span<const int> counts, ImageSize size);

// KITTI label line:
//   type trunc occ alpha x1 y1 x2 y2 h w l x y z ry score
// Location is the bottom-center of the box, so y_file = y_center + H/2.
std::string format_kitti_line(const Box3D& box);
Box3D parse_kitti_line(const std::string& line);
void write_kitti_labels(std::span<const Box3D> boxes,
                        const std::filesystem::path& path);
std::vector<Box3D> read_kitti_labels(const std::filesystem::path& path);

// Class-keyed prior sizes. Lookup ignores case.
class PriorTable {
 public:
  // Implementer-chosen defaults (meters, H/W/L): Car 1.53/1.63/3.88,
  // Pedestrian 1.76/0.66/0.84, Cyclist 1.74/0.60/1.76.
  static PriorTable defaults();

  void add(DimensionPrior prior);  // throws on duplicates
  const DimensionPrior* find(const std::string& class_label) const;
  std::size_t size() const { return priors_.size(); }
  bool empty() const { return priors_.empty(); }

 private:
  std::map<std::string, DimensionPrior> priors_;
};

// Text file, one class per line: `Label: H W L` (meters). `#` starts a
// comment. An empty file yields the built-in defaults when
// defaults_if_empty is set, an empty table otherwise.
PriorTable load_priors(const std::filesystem::path& path,
                       bool defaults_if_empty = false);
PriorTable parse_priors(const std::string& text, const std::string& origin,
                        bool defaults_if_empty = false);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace plot
