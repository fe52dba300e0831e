#include "rising/nn/adam.hpp"

#include <algorithm>
#include <cmath>

namespace rising::nn {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw Error("TrainConfig: batch_size must be >= 1");
  if (!(lr_start > 0.0) || !(lr_end > 0.0) || lr_end > lr_start)
    throw Error("TrainConfig: need 0 < lr_end <= lr_start");
  if (!(lr_power > 0.0)) throw Error("TrainConfig: lr_power must be positive");
  if (!(grad_clip > 0.0)) throw Error("TrainConfig: grad_clip must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0))
    throw Error("TrainConfig: invalid Adam constants");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr_start", c.lr_start},
          {"lr_end", c.lr_end},
          {"lr_power", c.lr_power},
          {"grad_clip", c.grad_clip},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
          {"shuffle_seed", c.shuffle_seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig c;
  try {
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.lr_start = doc.value("lr_start", c.lr_start);
    c.lr_end = doc.value("lr_end", c.lr_end);
    c.lr_power = doc.value("lr_power", c.lr_power);
    c.grad_clip = doc.value("grad_clip", c.grad_clip);
    if (doc.contains("adam")) {
      const auto& a = doc["adam"];
      c.adam.beta1 = a.value("beta1", c.adam.beta1);
      c.adam.beta2 = a.value("beta2", c.adam.beta2);
      c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
    }
    c.shuffle_seed = doc.value("shuffle_seed", c.shuffle_seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("TrainConfig JSON: ") + e.what());
  }
  c.validate();
  return c;
}

double learning_rate(const TrainConfig& cfg, long step, long total_steps) {
  if (total_steps <= 0) return cfg.lr_start;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total_steps), 0.0, 1.0);
  return cfg.lr_end + (cfg.lr_start - cfg.lr_end) * std::pow(1.0 - t, cfg.lr_power);
}

template <typename Scalar>
double global_norm(const NetworkParams<Scalar>& grads) {
  double sq = 0.0;
  for (const auto& c : grads.convs)
    sq += c.weight.template cast<double>().squaredNorm() + c.bias.template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

template <typename Scalar>
double clip_global_norm(NetworkParams<Scalar>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (auto& c : grads.convs) {
    c.weight *= static_cast<Scalar>(factor);
    c.bias *= static_cast<Scalar>(factor);
  }
  return factor;
}

namespace {

template <typename Derived, typename Scalar>
void adam_update(Eigen::DenseBase<Derived>& p, const Eigen::DenseBase<Derived>& g, Eigen::DenseBase<Derived>& m,
                 Eigen::DenseBase<Derived>& v, Scalar b1, Scalar b2, Scalar step_size, Scalar eps_hat) {
  m.derived() = b1 * m.derived() + (Scalar(1) - b1) * g.derived();
  v.derived() = b2 * v.derived() + (Scalar(1) - b2) * g.derived().cwiseProduct(g.derived());
  p.derived().array() -= step_size * m.derived().array() / (v.derived().array().sqrt() + eps_hat);
}

}  // namespace

template <typename Scalar>
void adam_step(NetworkParams<Scalar>& params, NetworkParams<Scalar>& grads, AdamState<Scalar>& state, long step_index,
               double lr, const TrainConfig& cfg) {
  if (step_index < 1) throw Error("adam_step: step_index must be >= 1");
  if (grads.convs.size() != params.convs.size() || state.m.convs.size() != params.convs.size())
    throw Error("adam_step: parameter, gradient and state layouts differ");
  for (std::size_t i = 0; i < grads.convs.size(); ++i)
    if (!grads.convs[i].weight.allFinite() || !grads.convs[i].bias.allFinite())
      throw Error("adam_step: non-finite gradient in layer " +
                  (i < params.layout.size() ? params.layout[i].name : std::to_string(i)));
  clip_global_norm(grads, cfg.grad_clip);

  // Bias correction folded into the step size:
  //   θ −= lr·√(1−β₂ᵗ)/(1−β₁ᵗ) · m / (√v + ε·√(1−β₂ᵗ))
  const double b1 = cfg.adam.beta1, b2 = cfg.adam.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_index));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_index));
  const auto step_size = static_cast<Scalar>(lr * std::sqrt(c2) / c1);
  const auto eps_hat = static_cast<Scalar>(cfg.adam.epsilon * std::sqrt(c2));
  for (std::size_t i = 0; i < params.convs.size(); ++i) {
    auto& p = params.convs[i];
    auto& g = grads.convs[i];
    adam_update(p.weight, g.weight, state.m.convs[i].weight, state.v.convs[i].weight, Scalar(b1), Scalar(b2),
                step_size, eps_hat);
    adam_update(p.bias, g.bias, state.m.convs[i].bias, state.v.convs[i].bias, Scalar(b1), Scalar(b2), step_size,
                eps_hat);
  }
  state.step = step_index;
}

template double global_norm(const NetworkParams<float>&);
template double global_norm(const NetworkParams<double>&);
template double clip_global_norm(NetworkParams<float>&, double);
template double clip_global_norm(NetworkParams<double>&, double);
template void adam_step(NetworkParams<float>&, NetworkParams<float>&, AdamState<float>&, long, double,
                        const TrainConfig&);
template void adam_step(NetworkParams<double>&, NetworkParams<double>&, AdamState<double>&, long, double,
                        const TrainConfig&);

}  // namespace rising::nn
