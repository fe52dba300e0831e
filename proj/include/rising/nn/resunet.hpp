#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rising/nn/layers.hpp"

namespace rising::nn {

/// Residual U-Net layout.
///
/// Encoder level l (0 ≤ l < levels) runs `convs_per_level` k×k convolutions with
/// base_channels·2^l outputs, then 2× max pooling. A bottleneck block runs at
/// base_channels·2^levels. Each decoder level upsamples 2× (nearest), applies a
/// k×k "up" convolution back to the level's width, adds the matching encoder
/// output, then runs its convolution block. A 1×1 convolution produces the
/// pre-activation, to which the input is added in tanh-preimage space
/// (atanh(2x − 1), clipped), before y = (tanh + 1)/2. All other layers use ReLU.
struct NetworkSpec {
  int levels = 3;
  int base_channels = 16;
  int convs_per_level = 2;
  int kernel_size = 3;
  bool global_residual = true;
  double residual_clip = 1e-3;  // 2x − 1 is clipped to ±(1 − residual_clip)

  void validate() const;
  int divisor() const { return 1 << levels; }
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& doc);

enum class LayerRole { encoder, bottleneck, up, decoder, output };

struct ConvLayout {
  std::string name;
  LayerRole role;
  int level;
  int in_channels;
  int out_channels;
  int kernel;
};

/// Convolutions in forward order.
std::vector<ConvLayout> conv_layout(const NetworkSpec& spec);

/// Σ over convolutions of out·in·k² + out.
std::size_t parameter_count(const NetworkSpec& spec);

template <typename Scalar>
struct ConvParams {
  Matrix<Scalar> weight;  // out × in·k·k
  Vector<Scalar> bias;
};

template <typename Scalar>
struct NetworkParams {
  NetworkSpec spec;
  std::uint64_t init_seed = 0;
  std::vector<ConvLayout> layout;
  std::vector<ConvParams<Scalar>> convs;

  /// Seeded fan-in (Kaiming) uniform weights, zero biases. The output layer
  /// uses gain 1 instead of the ReLU gain √2.
  static NetworkParams initialize(const NetworkSpec& spec, std::uint64_t seed);
  /// Same shapes, all zeros.
  NetworkParams zeros_like() const;

  std::size_t size() const;
  bool all_finite() const;
  void set_zero();

  /// Flat views for optimizers and gradient checks (layer order, weights then bias).
  std::vector<Scalar> flatten() const;
  void unflatten(const std::vector<Scalar>& flat);

  template <typename Other>
  NetworkParams<Other> cast() const {
    NetworkParams<Other> out;
    out.spec = spec;
    out.init_seed = init_seed;
    out.layout = layout;
    for (const auto& c : convs) out.convs.push_back({c.weight.template cast<Other>(), c.bias.template cast<Other>()});
    return out;
  }
};

template <typename Scalar>
class ResUNet {
 public:
  explicit ResUNet(NetworkParams<Scalar> params);

  NetworkParams<Scalar>& params() { return params_; }
  const NetworkParams<Scalar>& params() const { return params_; }
  const NetworkSpec& spec() const { return params_.spec; }

  /// Forward pass recording the activations needed by backward().
  Tensor4<Scalar> forward(const Tensor4<Scalar>& x);
  /// Forward pass without recording.
  Tensor4<Scalar> infer(const Tensor4<Scalar>& x) const;

  /// Accumulates parameter gradients of the loss with output gradient `dy` into
  /// `grads` and writes the input gradient when `dx` is non-null. Consumes the
  /// recorded forward pass; a second call without a new forward() throws.
  void backward(const Tensor4<Scalar>& dy, NetworkParams<Scalar>& grads, Tensor4<Scalar>* dx = nullptr);

 private:
  struct Tape {
    Tensor4<Scalar> input;
    std::vector<Tensor4<Scalar>> conv_in;
    std::vector<Tensor4<Scalar>> conv_out;
    std::vector<std::vector<Eigen::Index>> pool_argmax;
    std::vector<std::pair<int, int>> pool_in_dims;
    Tensor4<Scalar> output;
  };

  Tensor4<Scalar> run(const Tensor4<Scalar>& x, Tape* tape) const;
  Tensor4<Scalar> apply_conv(std::size_t i, const Tensor4<Scalar>& x, bool relu, Tape* tape) const;
  ConvShape shape_of(std::size_t i) const;

  NetworkParams<Scalar> params_;
  std::vector<std::vector<std::size_t>> encoder_, decoder_;
  std::vector<std::size_t> bottleneck_, up_;
  std::size_t output_ = 0;
  std::optional<Tape> tape_;
};

extern template struct NetworkParams<float>;
extern template struct NetworkParams<double>;
extern template class ResUNet<float>;
extern template class ResUNet<double>;

}  // namespace rising::nn
