#include "plot/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace plot {

namespace {

constexpr double kGrid = 10.0;
constexpr double kPixelsPerMeter = 10.0;
constexpr double kMargin = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string footprint(const Box3D& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double hl = 0.5 * b.length, hw = 0.5 * b.width;
  // length axis (cos, -sin), width axis (sin, cos) in the x-z plane
  const double corners[4][2] = {{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}};
  std::string pts;
  for (const auto& k : corners) {
    const double x = b.center.x() + k[0] * c + k[1] * s;
    const double z = b.center.z() - k[0] * s + k[1] * c;
    if (!pts.empty()) pts += ' ';
    pts += num(x) + "," + num(z);
  }
  return pts;
}

}  // namespace

std::string render_bev_svg(std::span<const Box3D> predictions, std::span<const Box3D> truth) {
  double xmin = -20.0, xmax = 20.0, zmin = 0.0, zmax = 40.0;
  auto extend = [&](const Box3D& b) {
    const double r = 0.5 * std::hypot(b.length, b.width);
    xmin = std::min(xmin, b.center.x() - r);
    xmax = std::max(xmax, b.center.x() + r);
    zmin = std::min(zmin, b.center.z() - r);
    zmax = std::max(zmax, b.center.z() + r);
  };
  for (const Box3D& b : predictions) extend(b);
  for (const Box3D& b : truth) extend(b);
  xmin = std::floor(xmin / kGrid) * kGrid;
  xmax = std::ceil(xmax / kGrid) * kGrid;
  zmin = std::floor(zmin / kGrid) * kGrid;
  zmax = std::ceil(zmax / kGrid) * kGrid;

  const double width = (xmax - xmin) * kPixelsPerMeter + 2 * kMargin;
  const double height = (zmax - zmin) * kPixelsPerMeter + 2 * kMargin;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Plot coordinates are meters: x right, z up.
  out += "<g transform=\"translate(" + num(kMargin - xmin * kPixelsPerMeter) + " " +
         num(kMargin + zmax * kPixelsPerMeter) + ") scale(" + num(kPixelsPerMeter) + " " +
         num(-kPixelsPerMeter) + ")\">\n";
  out += "<g class=\"grid\" stroke=\"#cccccc\" stroke-width=\"1\" "
         "vector-effect=\"non-scaling-stroke\">\n";
  for (double x = xmin; x <= xmax + 1e-9; x += kGrid) {
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(zmin) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(zmax) + "\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  for (double z = zmin; z <= zmax + 1e-9; z += kGrid) {
    out += "<line x1=\"" + num(xmin) + "\" y1=\"" + num(z) + "\" x2=\"" + num(xmax) +
           "\" y2=\"" + num(z) + "\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  out += "</g>\n";
  out += "<circle class=\"camera\" cx=\"0\" cy=\"0\" r=\"0.5\" fill=\"black\"/>\n";
  for (const Box3D& b : truth) {
    out += "<polygon class=\"truth\" points=\"" + footprint(b) +
           "\" fill=\"none\" stroke=\"#2e7d32\" stroke-width=\"2\" "
           "stroke-dasharray=\"6 4\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  for (const Box3D& b : predictions) {
    out += "<polygon class=\"prediction\" points=\"" + footprint(b) +
           "\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"2\" "
           "vector-effect=\"non-scaling-stroke\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace plot
