#pragma once

// Reference implementations written independently of the library, shared by
// the unit tests and the acceptance suite.

#include <cmath>

#include "rising/tomo/geometry.hpp"

namespace oracle {

using rising::tomo::Raster;

inline double relative_error(const Raster<double>& x, const Raster<double>& g) {
  double num = 0, den = 0;
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) {
      num += (x(r, c) - g(r, c)) * (x(r, c) - g(r, c));
      den += g(r, c) * g(r, c);
    }
  return num / den;
}

inline double rmse(const Raster<double>& x, const Raster<double>& y) {
  double s = 0;
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) s += (x(r, c) - y(r, c)) * (x(r, c) - y(r, c));
  return std::sqrt(s / static_cast<double>(x.size()));
}

/// Direct windowed SSIM: for every fully contained 11×11 window, weighted
/// moments with an explicitly built, normalised 2D Gaussian (σ = 1.5, L = 1).
inline double ssim(const Raster<double>& x, const Raster<double>& y) {
  const int w = 11, half = 5;
  const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double kernel[11][11];
  double total = 0;
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j)
      total += kernel[i][j] = std::exp(-((i - half) * (i - half) + (j - half) * (j - half)) / (2 * sigma * sigma));
  for (auto& row : kernel)
    for (double& v : row) v /= total;
  double sum = 0;
  int count = 0;
  for (int r = 0; r + w <= x.rows(); ++r)
    for (int c = 0; c + w <= x.cols(); ++c) {
      double mx = 0, my = 0;
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) {
          mx += kernel[i][j] * x(r + i, c + j);
          my += kernel[i][j] * y(r + i, c + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) {
          const double dx = x(r + i, c + j) - mx, dy = y(r + i, c + j) - my;
          vx += kernel[i][j] * dx * dx;
          vy += kernel[i][j] * dy * dy;
          cxy += kernel[i][j] * dx * dy;
        }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return sum / count;
}

/// Σ √(dx² + dy² + β²) with forward differences, zero past the last row/column.
inline double tv(const Raster<double>& x, double beta) {
  double s = 0;
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) {
      const double gx = c + 1 < x.cols() ? x(r, c + 1) - x(r, c) : 0.0;
      const double gy = r + 1 < x.rows() ? x(r + 1, c) - x(r, c) : 0.0;
      s += std::hypot(gx, gy, beta);
    }
  return s;
}

template <typename F>
Raster<double> central_difference(const Raster<double>& x, F&& f, double h) {
  Raster<double> g(x.rows(), x.cols());
  Raster<double> xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    xp.data()[i] = v + h;
    const double fp = f(xp);
    xp.data()[i] = v - h;
    const double fm = f(xp);
    xp.data()[i] = v;
    g.data()[i] = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace oracle
