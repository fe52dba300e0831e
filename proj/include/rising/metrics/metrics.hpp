#pragma once

#include <Eigen/Core>

#include <cmath>

#include "rising/common.hpp"

namespace rising::metrics {

/// Squared-norm ratio ‖x − x_gt‖² / ‖x_gt‖². Note that this is the *squared*
/// relative error, not the more common unsquared ratio.
template <typename DerivedX, typename DerivedG>
double relative_error(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedG>& x_gt) {
  if (x.rows() != x_gt.rows() || x.cols() != x_gt.cols()) throw Error("relative_error: dimension mismatch");
  const double den = x_gt.derived().template cast<double>().matrix().squaredNorm();
  if (!(den > 0.0)) throw Error("relative_error: ground truth has zero norm");
  const double num = (x.derived().template cast<double>() - x_gt.derived().template cast<double>()).matrix().squaredNorm();
  return num / den;
}

/// √(‖x − y‖² / N) over all N samples.
template <typename DerivedX, typename DerivedY>
double rmse(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error("rmse: dimension mismatch");
  const double sq = (x.derived().template cast<double>() - y.derived().template cast<double>()).matrix().squaredNorm();
  return std::sqrt(sq / static_cast<double>(x.size()));
}

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double dynamic_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean structural similarity over all fully-contained Gaussian windows.
double ssim(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
            const SsimOptions& opts = {});

template <typename DerivedX, typename DerivedY>
double ssim(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y, const SsimOptions& opts = {}) {
  const Eigen::MatrixXd a = x.derived().template cast<double>();
  const Eigen::MatrixXd b = y.derived().template cast<double>();
  return ssim(Eigen::Ref<const Eigen::MatrixXd>(a), Eigen::Ref<const Eigen::MatrixXd>(b), opts);
}

}  // namespace rising::metrics
