#include "rising/tomo/projector.hpp"

#include <cmath>
#include <vector>

#include "rising/random.hpp"
#include "rising/tomo/siddon.hpp"

namespace rising::tomo {

Projector::Projector(const GridSpec& grid, const ScanGeometry& geometry) : grid_(grid), geometry_(geometry) {
  grid_.validate();
  geometry_.validate();
  const int views = geometry_.num_views();
  const int dets = geometry_.num_detectors;
  const double reach = grid_.extent() * 2.0 + 1.0;

  std::vector<std::vector<RaySegment>> per_ray(static_cast<std::size_t>(views) * dets);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < views; ++v) {
    for (int d = 0; d < dets; ++d) {
      const auto [src, dst] = geometry_.ray(v, d, reach);
      trace_segments(grid_, src, dst, per_ray[static_cast<std::size_t>(v) * dets + d]);
    }
  }

  std::size_t total = 0;
  for (const auto& r : per_ray) total += r.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(total);
  for (std::size_t row = 0; row < per_ray.size(); ++row)
    for (const auto& s : per_ray[row])
      triplets.emplace_back(static_cast<Eigen::Index>(row), s.pixel, s.length);

  const Eigen::Index pixels = static_cast<Eigen::Index>(grid_.n) * grid_.n;
  forward_.resize(geometry_.num_measurements(), pixels);
  forward_.setFromTriplets(triplets.begin(), triplets.end());
  forward_.makeCompressed();
  transpose_ = forward_.transpose();
  transpose_.makeCompressed();
}

void Projector::forward(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const {
  if (x.size() != num_pixels() || y.size() != num_measurements())
    throw Error("Projector::forward: dimension mismatch");
  y.noalias() = forward_ * x;
}

void Projector::back(const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> x) const {
  if (y.size() != num_measurements() || x.size() != num_pixels())
    throw Error("Projector::back: dimension mismatch");
  x.noalias() = transpose_ * y;
}

Sinogram Projector::forward(const Image& image) const {
  if (image.grid != grid_) throw Error("Projector::forward: image grid differs from projector grid");
  Sinogram out(geometry_);
  forward(image.flat(), out.flat());
  return out;
}

Image Projector::back(const Sinogram& sinogram) const {
  if (!(sinogram.geometry == geometry_)) throw Error("Projector::back: sinogram geometry differs");
  Image out(grid_);
  back(sinogram.flat(), out.flat());
  return out;
}

Image Projector::ray_weights(int view, int detector) const {
  Image out(grid_);
  const Eigen::Index row = static_cast<Eigen::Index>(view) * geometry_.num_detectors + detector;
  auto flat = out.flat();
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(forward_, row); it; ++it)
    flat[it.col()] = it.value();
  return out;
}

Sinogram forward_project(const Image& image, const ScanGeometry& geometry) {
  return Projector(image.grid, geometry).forward(image);
}

Image back_project(const Sinogram& sinogram, const GridSpec& grid) {
  return Projector(grid, sinogram.geometry).back(sinogram);
}

Sinogram simulate_sinogram(const Projector& projector, const Image& image, double noise_level,
                           std::uint64_t seed) {
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level))
    throw Error("simulate_sinogram: noise_level must be >= 0");
  Sinogram b = projector.forward(image);
  if (noise_level == 0.0) return b;
  RandomStream rng(seed);
  Eigen::VectorXd e(b.values.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rng.normal();
  const double clean = b.flat().norm();
  const double raw = e.norm();
  if (clean > 0.0 && raw > 0.0) b.flat() += (noise_level * clean / raw) * e;
  return b;
}

Sinogram simulate_sinogram(const Image& image, const ScanGeometry& geometry, double noise_level,
                           std::uint64_t seed) {
  return simulate_sinogram(Projector(image.grid, geometry), image, noise_level, seed);
}

}  // namespace rising::tomo
