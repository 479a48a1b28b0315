#pragma once

#include <span>
#include <string>

#include "plot/core.hpp"

namespace plot {

// Bird's-eye-view SVG: x to the right, z (forward) up, 10 m grid. Boxes are
// drawn as yawed footprints in meter coordinates inside a group that maps
// plot coordinates to pixels; truth dashed, predictions solid.
std::string render_bev_svg(std::span<const Box3D> predictions, std::span<const Box3D> truth);

}  // namespace plot
