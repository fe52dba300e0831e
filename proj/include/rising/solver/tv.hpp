#pragma once

#include <Eigen/Core>

#include <cmath>

#include "rising/common.hpp"

namespace rising::solver {

// Smoothed total variation on an n×m raster with forward differences and a
// replicate boundary (differences leaving the grid are zero):
//   TV_β(x) = Σ_j √(dx_j² + dy_j² + β²),
//   dx_j = x(r, c+1) − x(r, c),  dy_j = x(r+1, c) − x(r, c).

template <typename Derived>
typename Derived::Scalar tv_beta(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  if (!(beta > Scalar(0))) throw Error("tv_beta: beta must be positive");
  const Eigen::Index rows = x.rows(), cols = x.cols();
  const Scalar b2 = beta * beta;
  Scalar sum(0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Scalar dx = c + 1 < cols ? x(r, c + 1) - x(r, c) : Scalar(0);
      const Scalar dy = r + 1 < rows ? x(r + 1, c) - x(r, c) : Scalar(0);
      sum += std::sqrt(dx * dx + dy * dy + b2);
    }
  }
  return sum;
}

/// Gradient of tv_beta split as ∇TV = V − U with V, U ≥ 0 whenever x ≥ 0:
/// V_j collects the x_j/φ terms and U_j the neighbour terms. `v_part` and
/// `u_part` may be null when only the gradient is wanted.
template <typename Derived, typename Out>
void tv_beta_gradient_split(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar beta,
                            Eigen::MatrixBase<Out>& grad, Eigen::MatrixBase<Out>* v_part = nullptr,
                            Eigen::MatrixBase<Out>* u_part = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (!(beta > Scalar(0))) throw Error("tv_beta_gradient: beta must be positive");
  const Eigen::Index rows = x.rows(), cols = x.cols();
  grad.derived().setZero(rows, cols);
  if (v_part) v_part->derived().setZero(rows, cols);
  if (u_part) u_part->derived().setZero(rows, cols);
  const Scalar b2 = beta * beta;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const bool has_x = c + 1 < cols;
      const bool has_y = r + 1 < rows;
      const Scalar dx = has_x ? x(r, c + 1) - x(r, c) : Scalar(0);
      const Scalar dy = has_y ? x(r + 1, c) - x(r, c) : Scalar(0);
      const Scalar inv = Scalar(1) / std::sqrt(dx * dx + dy * dy + b2);
      // ∂φ_j/∂x_j, ∂φ_j/∂x_{j+ex}, ∂φ_j/∂x_{j+ey}
      grad(r, c) -= (dx + dy) * inv;
      if (has_x) grad(r, c + 1) += dx * inv;
      if (has_y) grad(r + 1, c) += dy * inv;
      if (v_part) {
        const Scalar own = (Scalar(has_x) + Scalar(has_y)) * x(r, c) * inv;
        (*v_part)(r, c) += own;
        if (has_x) (*v_part)(r, c + 1) += x(r, c + 1) * inv;
        if (has_y) (*v_part)(r + 1, c) += x(r + 1, c) * inv;
      }
      if (u_part) {
        if (has_x) {
          (*u_part)(r, c) += x(r, c + 1) * inv;
          (*u_part)(r, c + 1) += x(r, c) * inv;
        }
        if (has_y) {
          (*u_part)(r, c) += x(r + 1, c) * inv;
          (*u_part)(r + 1, c) += x(r, c) * inv;
        }
      }
    }
  }
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tv_beta_gradient(
    const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar beta) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g(x.rows(), x.cols());
  tv_beta_gradient_split(x, beta, g);
  return g;
}

}  // namespace rising::solver
