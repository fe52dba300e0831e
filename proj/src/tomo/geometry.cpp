#include "rising/tomo/geometry.hpp"

#include <cmath>
#include <numbers>

namespace rising::tomo {

void GridSpec::validate() const {
  if (n < 2) throw Error("GridSpec: n must be >= 2, got " + std::to_string(n));
  if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) throw Error("GridSpec: pixel_size must be > 0");
}

Point2 GridSpec::pixel_center(int row, int col) const {
  const double c = 0.5 * (n - 1);
  return {(col - c) * pixel_size, (c - row) * pixel_size};
}

std::string to_string(BeamMode mode) { return mode == BeamMode::fan ? "fan-beam" : "parallel-beam"; }

BeamMode beam_mode_from_string(const std::string& text) {
  if (text == "fan-beam" || text == "fan") return BeamMode::fan;
  if (text == "parallel-beam" || text == "parallel") return BeamMode::parallel;
  throw Error("unknown beam mode '" + text + "'");
}

void ScanGeometry::validate() const {
  if (angles_deg.empty()) throw Error("ScanGeometry: no angles");
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const double a = angles_deg[i];
    if (!std::isfinite(a) || a < 0.0 || a >= 360.0)
      throw Error("ScanGeometry: angle " + std::to_string(a) + " outside [0, 360)");
    if (i > 0 && !(a > angles_deg[i - 1])) throw Error("ScanGeometry: angles must be strictly increasing");
  }
  if (num_detectors < 1) throw Error("ScanGeometry: num_detectors must be >= 1");
  if (!(detector_spacing > 0.0)) throw Error("ScanGeometry: detector_spacing must be > 0");
  if (mode == BeamMode::fan) {
    if (!(source_to_center > 0.0) || !(source_to_detector > 0.0))
      throw Error("ScanGeometry: fan-beam distances must be positive");
    if (!(source_to_detector > source_to_center))
      throw Error("ScanGeometry: source_to_detector must exceed source_to_center");
  }
}

std::pair<Point2, Point2> ScanGeometry::ray(int view, int detector, double reach) const {
  const double theta = angles_deg[static_cast<std::size_t>(view)] * std::numbers::pi / 180.0;
  const Point2 radial(std::cos(theta), std::sin(theta));
  const Point2 along(-radial.y(), radial.x());
  const double offset = (detector - 0.5 * (num_detectors - 1)) * detector_spacing;
  if (mode == BeamMode::fan) {
    const Point2 source = source_to_center * radial;
    const Point2 cell = (source_to_center - source_to_detector) * radial + offset * along;
    return {source, cell};
  }
  const Point2 mid = offset * along;
  return {mid + reach * radial, mid - reach * radial};
}

std::vector<double> even_angles(double range_deg, int count, double start_deg) {
  if (count < 1) throw Error("even_angles: count must be >= 1");
  std::vector<double> angles(static_cast<std::size_t>(count));
  const double step = range_deg / count;
  for (int i = 0; i < count; ++i) angles[static_cast<std::size_t>(i)] = start_deg + i * step;
  return angles;
}

ScanGeometry default_geometry(const GridSpec& grid, BeamMode mode, std::vector<double> angles_deg) {
  grid.validate();
  ScanGeometry g;
  g.mode = mode;
  g.angles_deg = std::move(angles_deg);
  g.num_detectors = 2 * grid.n;
  const double radius = grid.half_extent() * std::numbers::sqrt2;
  if (mode == BeamMode::fan) {
    g.source_to_center = 2.0 * grid.n * grid.pixel_size;
    g.source_to_detector = 4.0 * grid.n * grid.pixel_size;
    const double half_fan = std::asin(radius / g.source_to_center);
    g.detector_spacing = 2.0 * g.source_to_detector * std::tan(half_fan) / g.num_detectors;
  } else {
    g.detector_spacing = 2.0 * radius / g.num_detectors;
  }
  g.validate();
  return g;
}

Image::Image(const GridSpec& g, Raster<double> v) : grid(g), values(std::move(v)) {
  if (values.rows() != g.n || values.cols() != g.n)
    throw Error("Image: value raster does not match grid size " + std::to_string(g.n));
}

}  // namespace rising::tomo
