#pragma once

#include <Eigen/SparseCore>

#include <cstdint>

#include "rising/tomo/geometry.hpp"

namespace rising::tomo {

/// Discrete X-ray transform A for a (grid, geometry) pair and its exact transpose.
///
/// Construction traces every ray once with Siddon's method and keeps the
/// per-ray intersection lengths; `back` applies the transpose of exactly those
/// coefficients, so ⟨Ax, y⟩ = ⟨x, Aᵀy⟩ up to rounding. Products are parallel over
/// rows and deterministic: each output entry is summed in a fixed order.
class Projector {
 public:
  Projector(const GridSpec& grid, const ScanGeometry& geometry);

  const GridSpec& grid() const { return grid_; }
  const ScanGeometry& geometry() const { return geometry_; }
  Eigen::Index num_measurements() const { return forward_.rows(); }
  Eigen::Index num_pixels() const { return forward_.cols(); }
  Eigen::Index nonzeros() const { return forward_.nonZeros(); }

  Sinogram forward(const Image& image) const;
  Image back(const Sinogram& sinogram) const;

  /// Vector forms on flattened (row-major) images and (view-major) sinograms.
  void forward(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;
  void back(const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> x) const;

  /// Coefficients of one ray as a dense image (for inspection and tests).
  Image ray_weights(int view, int detector) const;

 private:
  GridSpec grid_;
  ScanGeometry geometry_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> forward_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> transpose_;
};

Sinogram forward_project(const Image& image, const ScanGeometry& geometry);
Image back_project(const Sinogram& sinogram, const GridSpec& grid);

/// b = Ax + e with e white Gaussian noise rescaled so that ‖e‖₂ / ‖Ax‖₂ equals
/// `noise_level` exactly. Gaussian draws come from RandomStream(seed).
Sinogram simulate_sinogram(const Image& image, const ScanGeometry& geometry, double noise_level,
                           std::uint64_t seed);
Sinogram simulate_sinogram(const Projector& projector, const Image& image, double noise_level,
                           std::uint64_t seed);

}  // namespace rising::tomo
