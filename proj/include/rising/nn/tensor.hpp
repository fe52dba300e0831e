#pragma once

#include <Eigen/Core>

#include <string>

#include "rising/common.hpp"

namespace rising::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense activation tensor with logical dims (batch, channels, height, width).
///
/// Storage is channel-major: a row-major (channels × batch·height·width) matrix,
/// i.e. the row-major layout of the (C, N, H, W) permutation. Every channel of
/// the whole batch is one contiguous row, so a stride-1 convolution over a batch
/// is a single matrix product. For one-channel tensors this coincides with NCHW.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int batch, int channels, int height, int width)
      : batch_(batch), height_(height), width_(width),
        values_(Matrix<Scalar>::Zero(channels, static_cast<Eigen::Index>(batch) * height * width)) {
    if (batch < 1 || channels < 1 || height < 1 || width < 1)
      throw Error("Tensor4: all dimensions must be >= 1");
  }

  int batch() const { return batch_; }
  int channels() const { return static_cast<int>(values_.rows()); }
  int height() const { return height_; }
  int width() const { return width_; }
  Eigen::Index plane_size() const { return static_cast<Eigen::Index>(height_) * width_; }
  Eigen::Index size() const { return values_.size(); }
  bool same_shape(const Tensor4& o) const {
    return batch_ == o.batch_ && channels() == o.channels() && height_ == o.height_ && width_ == o.width_;
  }
  std::string shape_string() const {
    return "(" + std::to_string(batch_) + "," + std::to_string(channels()) + "," + std::to_string(height_) + "," +
           std::to_string(width_) + ")";
  }

  Scalar& at(int n, int c, int y, int x) { return values_(c, n * plane_size() + static_cast<Eigen::Index>(y) * width_ + x); }
  Scalar at(int n, int c, int y, int x) const {
    return values_(c, n * plane_size() + static_cast<Eigen::Index>(y) * width_ + x);
  }

  Matrix<Scalar>& values() { return values_; }
  const Matrix<Scalar>& values() const { return values_; }

  /// One (height × width) plane, row-major.
  Eigen::Map<Matrix<Scalar>> plane(int n, int c) {
    return {values_.row(c).data() + n * plane_size(), height_, width_};
  }
  Eigen::Map<const Matrix<Scalar>> plane(int n, int c) const {
    return {values_.row(c).data() + n * plane_size(), height_, width_};
  }

  template <typename Other>
  Tensor4<Other> cast() const {
    Tensor4<Other> out(batch_, channels(), height_, width_);
    out.values() = values_.template cast<Other>();
    return out;
  }

  bool all_finite() const { return values_.allFinite(); }

 private:
  int batch_ = 0;
  int height_ = 0;
  int width_ = 0;
  Matrix<Scalar> values_;
};

}  // namespace rising::nn
