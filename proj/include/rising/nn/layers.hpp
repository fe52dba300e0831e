#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rising/nn/tensor.hpp"

namespace rising::nn {

struct ConvShape {
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_extent(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
};

/// Unfolds receptive fields into columns: rows are (in_channel, ky, kx), columns
/// are (n, out_y, out_x). Out-of-image taps read as zero.
template <typename Scalar>
Matrix<Scalar> im2col(const Tensor4<Scalar>& x, const ConvShape& cs) {
  const int oh = cs.out_extent(x.height()), ow = cs.out_extent(x.width());
  const int k = cs.kernel;
  Matrix<Scalar> col = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(x.channels()) * k * k,
                                            static_cast<Eigen::Index>(x.batch()) * oh * ow);
  for (int c = 0; c < x.channels(); ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        Scalar* dst = col.row((static_cast<Eigen::Index>(c) * k + ky) * k + kx).data();
        for (int n = 0; n < x.batch(); ++n) {
          const auto src = x.plane(n, c);
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * cs.stride - cs.pad + ky;
            Scalar* out_row = dst + (static_cast<Eigen::Index>(n) * oh + oy) * ow;
            if (iy < 0 || iy >= x.height()) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * cs.stride - cs.pad + kx;
              if (ix >= 0 && ix < x.width()) out_row[ox] = src(iy, ix);
            }
          }
        }
      }
    }
  }
  return col;
}

/// Adjoint of im2col: scatters column gradients back onto `dx` (accumulating).
template <typename Scalar>
void col2im(const Matrix<Scalar>& col, const ConvShape& cs, Tensor4<Scalar>& dx) {
  const int oh = cs.out_extent(dx.height()), ow = cs.out_extent(dx.width());
  const int k = cs.kernel;
  for (int c = 0; c < dx.channels(); ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Scalar* src = col.row((static_cast<Eigen::Index>(c) * k + ky) * k + kx).data();
        for (int n = 0; n < dx.batch(); ++n) {
          auto dst = dx.plane(n, c);
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * cs.stride - cs.pad + ky;
            if (iy < 0 || iy >= dx.height()) continue;
            const Scalar* in_row = src + (static_cast<Eigen::Index>(n) * oh + oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * cs.stride - cs.pad + kx;
              if (ix >= 0 && ix < dx.width()) dst(iy, ix) += in_row[ox];
            }
          }
        }
      }
    }
  }
}

/// Cross-correlation. `weight` is (out_channels × in_channels·k·k) with taps
/// ordered (in_channel, ky, kx); `bias` has out_channels entries.
template <typename Scalar>
Tensor4<Scalar> conv2d_forward(const Tensor4<Scalar>& x, const Matrix<Scalar>& weight, const Vector<Scalar>& bias,
                               const ConvShape& cs, const std::string& name = "conv") {
  const Eigen::Index taps = static_cast<Eigen::Index>(x.channels()) * cs.kernel * cs.kernel;
  if (weight.cols() != taps || bias.size() != weight.rows())
    throw Error(name + ": weight is " + std::to_string(weight.rows()) + "x" + std::to_string(weight.cols()) +
                " but input " + x.shape_string() + " needs " + std::to_string(taps) + " taps per output channel");
  const int oh = cs.out_extent(x.height()), ow = cs.out_extent(x.width());
  if (oh < 1 || ow < 1) throw Error(name + ": output would be empty for input " + x.shape_string());
  Tensor4<Scalar> y(x.batch(), static_cast<int>(weight.rows()), oh, ow);
  if (cs.kernel == 1 && cs.stride == 1 && cs.pad == 0) {
    y.values().noalias() = weight * x.values();
  } else {
    y.values().noalias() = weight * im2col(x, cs);
  }
  y.values().colwise() += bias;
  return y;
}

/// Accumulates ∂L/∂W and ∂L/∂b, and writes ∂L/∂x when `dx` is non-null.
template <typename Scalar>
void conv2d_backward(const Tensor4<Scalar>& x, const Matrix<Scalar>& weight, const Tensor4<Scalar>& dy,
                     const ConvShape& cs, Matrix<Scalar>& dweight, Vector<Scalar>& dbias, Tensor4<Scalar>* dx) {
  const bool pointwise = cs.kernel == 1 && cs.stride == 1 && cs.pad == 0;
  if (pointwise) {
    dweight.noalias() += dy.values() * x.values().transpose();
  } else {
    const Matrix<Scalar> col = im2col(x, cs);
    dweight.noalias() += dy.values() * col.transpose();
  }
  dbias += dy.values().rowwise().sum();
  if (dx) {
    *dx = Tensor4<Scalar>(x.batch(), x.channels(), x.height(), x.width());
    if (pointwise) {
      dx->values().noalias() = weight.transpose() * dy.values();
    } else {
      const Matrix<Scalar> dcol = weight.transpose() * dy.values();
      col2im(dcol, cs, *dx);
    }
  }
}

template <typename Scalar>
void relu_inplace(Tensor4<Scalar>& x) {
  x.values() = x.values().cwiseMax(Scalar(0));
}

/// Gradient through a ReLU given its output `y`: passes where y > 0.
template <typename Scalar>
void relu_backward_inplace(const Tensor4<Scalar>& y, Tensor4<Scalar>& dy) {
  dy.values() = (y.values().array() > Scalar(0)).select(dy.values(), Scalar(0));
}

/// 2×2 max pooling with stride 2; `argmax` records the winning input index per output.
template <typename Scalar>
Tensor4<Scalar> maxpool2_forward(const Tensor4<Scalar>& x, std::vector<Eigen::Index>& argmax) {
  if (x.height() % 2 != 0 || x.width() % 2 != 0) throw Error("maxpool2: input " + x.shape_string() + " is not even");
  Tensor4<Scalar> y(x.batch(), x.channels(), x.height() / 2, x.width() / 2);
  argmax.assign(static_cast<std::size_t>(y.size()), 0);
  const Eigen::Index in_plane = x.plane_size(), out_plane = y.plane_size();
  for (int c = 0; c < x.channels(); ++c) {
    for (int n = 0; n < x.batch(); ++n) {
      for (int oy = 0; oy < y.height(); ++oy) {
        for (int ox = 0; ox < y.width(); ++ox) {
          Eigen::Index best = n * in_plane + static_cast<Eigen::Index>(2 * oy) * x.width() + 2 * ox;
          for (int dy = 0; dy < 2; ++dy)
            for (int dxo = 0; dxo < 2; ++dxo) {
              const Eigen::Index idx = n * in_plane + static_cast<Eigen::Index>(2 * oy + dy) * x.width() + 2 * ox + dxo;
              if (x.values()(c, idx) > x.values()(c, best)) best = idx;
            }
          const Eigen::Index o = n * out_plane + static_cast<Eigen::Index>(oy) * y.width() + ox;
          y.values()(c, o) = x.values()(c, best);
          argmax[static_cast<std::size_t>(c * y.values().cols() + o)] = best;
        }
      }
    }
  }
  return y;
}

template <typename Scalar>
Tensor4<Scalar> maxpool2_backward(const Tensor4<Scalar>& dy, const std::vector<Eigen::Index>& argmax, int in_height,
                                  int in_width) {
  Tensor4<Scalar> dx(dy.batch(), dy.channels(), in_height, in_width);
  for (int c = 0; c < dy.channels(); ++c)
    for (Eigen::Index o = 0; o < dy.values().cols(); ++o)
      dx.values()(c, argmax[static_cast<std::size_t>(c * dy.values().cols() + o)]) += dy.values()(c, o);
  return dx;
}

/// Nearest-neighbour 2× upsampling.
template <typename Scalar>
Tensor4<Scalar> upsample2_forward(const Tensor4<Scalar>& x) {
  Tensor4<Scalar> y(x.batch(), x.channels(), 2 * x.height(), 2 * x.width());
  for (int c = 0; c < x.channels(); ++c)
    for (int n = 0; n < x.batch(); ++n) {
      const auto src = x.plane(n, c);
      auto dst = y.plane(n, c);
      for (int iy = 0; iy < y.height(); ++iy)
        for (int ix = 0; ix < y.width(); ++ix) dst(iy, ix) = src(iy / 2, ix / 2);
    }
  return y;
}

template <typename Scalar>
Tensor4<Scalar> upsample2_backward(const Tensor4<Scalar>& dy) {
  Tensor4<Scalar> dx(dy.batch(), dy.channels(), dy.height() / 2, dy.width() / 2);
  for (int c = 0; c < dy.channels(); ++c)
    for (int n = 0; n < dy.batch(); ++n) {
      const auto src = dy.plane(n, c);
      auto dst = dx.plane(n, c);
      for (int iy = 0; iy < dy.height(); ++iy)
        for (int ix = 0; ix < dy.width(); ++ix) dst(iy / 2, ix / 2) += src(iy, ix);
    }
  return dx;
}

/// y = (tanh(pre) + 1) / 2, mapping onto the image range (0, 1).
template <typename Scalar>
Tensor4<Scalar> unit_tanh_forward(const Tensor4<Scalar>& pre) {
  Tensor4<Scalar> y = pre;
  y.values() = (pre.values().array().tanh() + Scalar(1)) * Scalar(0.5);
  return y;
}

/// Gradient through unit_tanh given its output y: dy/dpre = 2y(1 − y).
template <typename Scalar>
Tensor4<Scalar> unit_tanh_backward(const Tensor4<Scalar>& y, const Tensor4<Scalar>& dy) {
  Tensor4<Scalar> dpre = dy;
  dpre.values() = dy.values().array() * Scalar(2) * y.values().array() * (Scalar(1) - y.values().array());
  return dpre;
}

/// Batch mean of per-sample squared error: (1/N) Σ_n ‖y_n − t_n‖².
template <typename Scalar>
double mse_forward(const Tensor4<Scalar>& y, const Tensor4<Scalar>& target) {
  if (!y.same_shape(target)) throw Error("mse: prediction " + y.shape_string() + " vs target " + target.shape_string());
  return (y.values().template cast<double>() - target.values().template cast<double>()).squaredNorm() / y.batch();
}

template <typename Scalar>
Tensor4<Scalar> mse_backward(const Tensor4<Scalar>& y, const Tensor4<Scalar>& target) {
  Tensor4<Scalar> d = y;
  d.values() = (y.values() - target.values()) * (Scalar(2) / Scalar(y.batch()));
  return d;
}

}  // namespace rising::nn
