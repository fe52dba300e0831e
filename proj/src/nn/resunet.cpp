#include "rising/nn/resunet.hpp"

#include <algorithm>
#include <cmath>

#include "rising/random.hpp"

namespace rising::nn {

void NetworkSpec::validate() const {
  if (levels < 1) throw Error("NetworkSpec: levels must be >= 1");
  if (base_channels < 1) throw Error("NetworkSpec: base_channels must be >= 1");
  if (convs_per_level < 1) throw Error("NetworkSpec: convs_per_level must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw Error("NetworkSpec: kernel_size must be odd");
  if (!(residual_clip > 0.0 && residual_clip < 1.0)) throw Error("NetworkSpec: residual_clip must lie in (0, 1)");
}

nlohmann::json to_json(const NetworkSpec& s) {
  return {{"levels", s.levels},
          {"base_channels", s.base_channels},
          {"convs_per_level", s.convs_per_level},
          {"kernel_size", s.kernel_size},
          {"skip", "additive"},
          {"hidden_activation", "relu"},
          {"final_activation", "tanh"},
          {"global_residual", s.global_residual},
          {"residual_clip", s.residual_clip}};
}

NetworkSpec network_spec_from_json(const nlohmann::json& doc) {
  NetworkSpec s;
  try {
    s.levels = doc.value("levels", s.levels);
    s.base_channels = doc.value("base_channels", s.base_channels);
    s.convs_per_level = doc.value("convs_per_level", s.convs_per_level);
    s.kernel_size = doc.value("kernel_size", s.kernel_size);
    s.global_residual = doc.value("global_residual", s.global_residual);
    s.residual_clip = doc.value("residual_clip", s.residual_clip);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("NetworkSpec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<ConvLayout> conv_layout(const NetworkSpec& spec) {
  spec.validate();
  std::vector<ConvLayout> out;
  const int k = spec.kernel_size;
  auto width = [&](int level) { return spec.base_channels << level; };
  int in = 1;
  for (int l = 0; l < spec.levels; ++l) {
    for (int p = 0; p < spec.convs_per_level; ++p) {
      out.push_back({"enc" + std::to_string(l) + ".conv" + std::to_string(p), LayerRole::encoder, l, in, width(l), k});
      in = width(l);
    }
  }
  for (int p = 0; p < spec.convs_per_level; ++p) {
    out.push_back({"bottleneck.conv" + std::to_string(p), LayerRole::bottleneck, spec.levels, in, width(spec.levels), k});
    in = width(spec.levels);
  }
  for (int l = spec.levels - 1; l >= 0; --l) {
    out.push_back({"dec" + std::to_string(l) + ".up", LayerRole::up, l, width(l + 1), width(l), k});
    for (int p = 0; p < spec.convs_per_level; ++p)
      out.push_back({"dec" + std::to_string(l) + ".conv" + std::to_string(p), LayerRole::decoder, l, width(l), width(l), k});
  }
  out.push_back({"output", LayerRole::output, 0, width(0), 1, 1});
  return out;
}

std::size_t parameter_count(const NetworkSpec& spec) {
  std::size_t total = 0;
  for (const auto& c : conv_layout(spec))
    total += static_cast<std::size_t>(c.out_channels) * c.in_channels * c.kernel * c.kernel + c.out_channels;
  return total;
}

// ---------------------------------------------------------------- parameters

template <typename Scalar>
NetworkParams<Scalar> NetworkParams<Scalar>::initialize(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkParams p;
  p.spec = spec;
  p.init_seed = seed;
  p.layout = conv_layout(spec);
  RandomStream rng(seed);
  for (const auto& l : p.layout) {
    const int fan_in = l.in_channels * l.kernel * l.kernel;
    ConvParams<Scalar> c{Matrix<Scalar>::Zero(l.out_channels, fan_in), Vector<Scalar>::Zero(l.out_channels)};
    // Output layer starts at zero so the untrained network is the identity on its input.
    if (l.role == LayerRole::output) {
      p.convs.push_back(std::move(c));
      continue;
    }
    const double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index i = 0; i < c.weight.size(); ++i) c.weight.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    p.convs.push_back(std::move(c));
  }
  return p;
}

template <typename Scalar>
NetworkParams<Scalar> NetworkParams<Scalar>::zeros_like() const {
  NetworkParams z = *this;
  z.set_zero();
  return z;
}

template <typename Scalar>
std::size_t NetworkParams<Scalar>::size() const {
  std::size_t n = 0;
  for (const auto& c : convs) n += static_cast<std::size_t>(c.weight.size() + c.bias.size());
  return n;
}

template <typename Scalar>
bool NetworkParams<Scalar>::all_finite() const {
  for (const auto& c : convs)
    if (!c.weight.allFinite() || !c.bias.allFinite()) return false;
  return true;
}

template <typename Scalar>
void NetworkParams<Scalar>::set_zero() {
  for (auto& c : convs) {
    c.weight.setZero();
    c.bias.setZero();
  }
}

template <typename Scalar>
std::vector<Scalar> NetworkParams<Scalar>::flatten() const {
  std::vector<Scalar> flat;
  flat.reserve(size());
  for (const auto& c : convs) {
    flat.insert(flat.end(), c.weight.data(), c.weight.data() + c.weight.size());
    flat.insert(flat.end(), c.bias.data(), c.bias.data() + c.bias.size());
  }
  return flat;
}

template <typename Scalar>
void NetworkParams<Scalar>::unflatten(const std::vector<Scalar>& flat) {
  if (flat.size() != size()) throw Error("NetworkParams::unflatten: size mismatch");
  std::size_t at = 0;
  for (auto& c : convs) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), c.weight.size(), c.weight.data());
    at += static_cast<std::size_t>(c.weight.size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), c.bias.size(), c.bias.data());
    at += static_cast<std::size_t>(c.bias.size());
  }
}

// ---------------------------------------------------------------- network

template <typename Scalar>
ResUNet<Scalar>::ResUNet(NetworkParams<Scalar> params) : params_(std::move(params)) {
  params_.spec.validate();
  const auto expected = conv_layout(params_.spec);
  if (params_.convs.size() != expected.size()) throw Error("ResUNet: parameter list does not match the spec");
  params_.layout = expected;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& l = expected[i];
    const auto& c = params_.convs[i];
    if (c.weight.rows() != l.out_channels || c.weight.cols() != l.in_channels * l.kernel * l.kernel ||
        c.bias.size() != l.out_channels)
      throw Error("ResUNet: layer " + l.name + " has mismatched parameter shapes");
  }
  encoder_.assign(static_cast<std::size_t>(params_.spec.levels), {});
  decoder_.assign(static_cast<std::size_t>(params_.spec.levels), {});
  up_.assign(static_cast<std::size_t>(params_.spec.levels), 0);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto level = static_cast<std::size_t>(expected[i].level);
    switch (expected[i].role) {
      case LayerRole::encoder: encoder_[level].push_back(i); break;
      case LayerRole::bottleneck: bottleneck_.push_back(i); break;
      case LayerRole::up: up_[level] = i; break;
      case LayerRole::decoder: decoder_[level].push_back(i); break;
      case LayerRole::output: output_ = i; break;
    }
  }
}

template <typename Scalar>
ConvShape ResUNet<Scalar>::shape_of(std::size_t i) const {
  const int k = params_.layout[i].kernel;
  return {k, 1, k / 2};
}

template <typename Scalar>
Tensor4<Scalar> ResUNet<Scalar>::apply_conv(std::size_t i, const Tensor4<Scalar>& x, bool relu, Tape* tape) const {
  Tensor4<Scalar> y = conv2d_forward(x, params_.convs[i].weight, params_.convs[i].bias, shape_of(i), params_.layout[i].name);
  if (relu) relu_inplace(y);
  if (tape) {
    tape->conv_in[i] = x;
    tape->conv_out[i] = y;
  }
  return y;
}

template <typename Scalar>
Tensor4<Scalar> ResUNet<Scalar>::run(const Tensor4<Scalar>& x, Tape* tape) const {
  const NetworkSpec& spec = params_.spec;
  if (x.channels() != 1) throw Error("ResUNet: expected single-channel input, got " + x.shape_string());
  if (x.height() % spec.divisor() != 0 || x.width() % spec.divisor() != 0)
    throw Error("ResUNet: input " + x.shape_string() + " is not divisible by 2^levels = " +
                std::to_string(spec.divisor()));
  if (tape) {
    tape->input = x;
    tape->conv_in.assign(params_.convs.size(), {});
    tape->conv_out.assign(params_.convs.size(), {});
    tape->pool_argmax.assign(static_cast<std::size_t>(spec.levels), {});
    tape->pool_in_dims.assign(static_cast<std::size_t>(spec.levels), {});
  }

  std::vector<Tensor4<Scalar>> skips;
  Tensor4<Scalar> h = x;
  std::vector<Eigen::Index> scratch;
  for (int l = 0; l < spec.levels; ++l) {
    for (auto i : encoder_[static_cast<std::size_t>(l)]) h = apply_conv(i, h, true, tape);
    skips.push_back(h);
    auto& argmax = tape ? tape->pool_argmax[static_cast<std::size_t>(l)] : scratch;
    if (tape) tape->pool_in_dims[static_cast<std::size_t>(l)] = {h.height(), h.width()};
    h = maxpool2_forward(h, argmax);
  }
  for (auto i : bottleneck_) h = apply_conv(i, h, true, tape);
  for (int l = spec.levels - 1; l >= 0; --l) {
    h = apply_conv(up_[static_cast<std::size_t>(l)], upsample2_forward(h), true, tape);
    h.values() += skips[static_cast<std::size_t>(l)].values();
    for (auto i : decoder_[static_cast<std::size_t>(l)]) h = apply_conv(i, h, true, tape);
  }
  Tensor4<Scalar> pre = apply_conv(output_, h, false, tape);
  if (spec.global_residual) {
    const Scalar lim = Scalar(1) - static_cast<Scalar>(spec.residual_clip);
    pre.values().array() += ((x.values().array() * Scalar(2) - Scalar(1)).cwiseMax(-lim).cwiseMin(lim)).atanh();
  }
  Tensor4<Scalar> y = unit_tanh_forward(pre);
  if (tape) tape->output = y;
  return y;
}

template <typename Scalar>
Tensor4<Scalar> ResUNet<Scalar>::forward(const Tensor4<Scalar>& x) {
  Tape tape;
  Tensor4<Scalar> y = run(x, &tape);
  tape_ = std::move(tape);
  return y;
}

template <typename Scalar>
Tensor4<Scalar> ResUNet<Scalar>::infer(const Tensor4<Scalar>& x) const {
  return run(x, nullptr);
}

template <typename Scalar>
void ResUNet<Scalar>::backward(const Tensor4<Scalar>& dy, NetworkParams<Scalar>& grads, Tensor4<Scalar>* dx) {
  if (!tape_) throw Error("ResUNet::backward: no recorded forward pass");
  Tape tape = std::move(*tape_);
  tape_.reset();
  if (!dy.same_shape(tape.output))
    throw Error("ResUNet::backward: gradient " + dy.shape_string() + " does not match output " +
                tape.output.shape_string());
  if (grads.convs.size() != params_.convs.size()) throw Error("ResUNet::backward: gradient buffer has wrong layout");
  const NetworkSpec& spec = params_.spec;

  auto conv_back = [&](std::size_t i, Tensor4<Scalar>& grad, bool relu, bool need_dx) {
    if (relu) relu_backward_inplace(tape.conv_out[i], grad);
    Tensor4<Scalar> d_in;
    conv2d_backward(tape.conv_in[i], params_.convs[i].weight, grad, shape_of(i), grads.convs[i].weight,
                    grads.convs[i].bias, need_dx ? &d_in : nullptr);
    grad = std::move(d_in);
  };

  Tensor4<Scalar> dpre = unit_tanh_backward(tape.output, dy);
  Tensor4<Scalar> dres;
  if (dx && spec.global_residual) {
    // d/dx atanh(2x − 1) = 1 / (x(1 − x)) inside the clip window, 0 outside.
    dres = dpre;
    const Scalar lim = Scalar(1) - static_cast<Scalar>(spec.residual_clip);
    const auto u = tape.input.values().array() * Scalar(2) - Scalar(1);
    dres.values() = (u.abs() < lim).select(dpre.values().array() * Scalar(2) / (Scalar(1) - u * u), Scalar(0));
  }

  Tensor4<Scalar> g = dpre;
  conv_back(output_, g, false, true);
  std::vector<Tensor4<Scalar>> dskips(static_cast<std::size_t>(spec.levels));
  for (int l = 0; l < spec.levels; ++l) {
    const auto& block = decoder_[static_cast<std::size_t>(l)];
    for (auto it = block.rbegin(); it != block.rend(); ++it) conv_back(*it, g, true, true);
    dskips[static_cast<std::size_t>(l)] = g;
    conv_back(up_[static_cast<std::size_t>(l)], g, true, true);
    g = upsample2_backward(g);
  }
  for (auto it = bottleneck_.rbegin(); it != bottleneck_.rend(); ++it) conv_back(*it, g, true, true);
  for (int l = spec.levels - 1; l >= 0; --l) {
    const auto [ih, iw] = tape.pool_in_dims[static_cast<std::size_t>(l)];
    g = maxpool2_backward(g, tape.pool_argmax[static_cast<std::size_t>(l)], ih, iw);
    g.values() += dskips[static_cast<std::size_t>(l)].values();
    const auto& block = encoder_[static_cast<std::size_t>(l)];
    for (auto it = block.rbegin(); it != block.rend(); ++it) {
      const bool first_layer = (l == 0 && it + 1 == block.rend());
      conv_back(*it, g, true, !first_layer || dx != nullptr);
    }
  }
  if (dx) {
    *dx = std::move(g);
    if (spec.global_residual) dx->values() += dres.values();
  }
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template class ResUNet<float>;
template class ResUNet<double>;

}  // namespace rising::nn
