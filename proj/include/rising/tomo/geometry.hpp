#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "rising/common.hpp"

namespace rising::tomo {

template <typename Scalar>
using Raster = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Point2 = Eigen::Vector2d;

/// Square n×n pixel grid centred on the origin. Row 0 is the top row (largest y).
struct GridSpec {
  int n = 0;
  double pixel_size = 1.0;

  void validate() const;
  double extent() const { return n * pixel_size; }
  double half_extent() const { return 0.5 * extent(); }
  Point2 pixel_center(int row, int col) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class BeamMode { parallel, fan };

std::string to_string(BeamMode mode);
BeamMode beam_mode_from_string(const std::string& text);

/// 2D acquisition description. The linear operator A is implied by this plus a GridSpec.
///
/// Fan-beam: the source sits at `dso·(cos θ, sin θ)` and a flat detector, centred
/// on the opposite side at distance `dsd` from the source, runs along (−sin θ, cos θ).
/// Parallel-beam: rays run along (−cos θ, −sin θ) and the detector coordinate is
/// measured along the same (−sin θ, cos θ) axis through the origin.
struct ScanGeometry {
  BeamMode mode = BeamMode::fan;
  std::vector<double> angles_deg;
  int num_detectors = 0;
  double detector_spacing = 1.0;
  double source_to_center = 0.0;    // fan only
  double source_to_detector = 0.0;  // fan only

  int num_views() const { return static_cast<int>(angles_deg.size()); }
  Eigen::Index num_measurements() const {
    return static_cast<Eigen::Index>(num_views()) * num_detectors;
  }
  void validate() const;

  /// Start and end points of the ray for (view, detector). `reach` is the
  /// half-length used for parallel rays; any value past the grid's corners works.
  std::pair<Point2, Point2> ray(int view, int detector, double reach) const;

  friend bool operator==(const ScanGeometry&, const ScanGeometry&) = default;
};

/// `count` angles evenly spanning [start, start + range), in degrees.
std::vector<double> even_angles(double range_deg, int count, double start_deg = 0.0);

/// Default geometry covering the whole grid: dso = 2n·ps, dsd = 4n·ps,
/// 2n detector cells whose span exactly covers the circle through the grid corners.
ScanGeometry default_geometry(const GridSpec& grid, BeamMode mode, std::vector<double> angles_deg);

struct Image {
  GridSpec grid;
  Raster<double> values;

  Image() = default;
  explicit Image(const GridSpec& g) : grid(g), values(Raster<double>::Zero(g.n, g.n)) {}
  Image(const GridSpec& g, Raster<double> v);

  Eigen::Map<Eigen::VectorXd> flat() { return {values.data(), values.size()}; }
  Eigen::Map<const Eigen::VectorXd> flat() const { return {values.data(), values.size()}; }
};

/// View-major measurements: rows are views, columns are detector cells.
struct Sinogram {
  ScanGeometry geometry;
  Raster<double> values;

  Sinogram() = default;
  explicit Sinogram(const ScanGeometry& g)
      : geometry(g), values(Raster<double>::Zero(g.num_views(), g.num_detectors)) {}

  Eigen::Map<Eigen::VectorXd> flat() { return {values.data(), values.size()}; }
  Eigen::Map<const Eigen::VectorXd> flat() const { return {values.data(), values.size()}; }
};

}  // namespace rising::tomo
