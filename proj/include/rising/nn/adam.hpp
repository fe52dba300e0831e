#pragma once

#include <cstdint>

#include <json.hpp>

#include "rising/nn/resunet.hpp"

namespace rising::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double lr_start = 1e-3;
  double lr_end = 1e-5;
  double lr_power = 1.0;
  double grad_clip = 5.0;  // global L2 norm
  AdamConfig adam;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);

/// lr_end + (lr_start − lr_end)·(1 − step/total_steps)^lr_power, step clamped to [0, total_steps].
double learning_rate(const TrainConfig& cfg, long step, long total_steps);

/// First and second moments, same layout as the parameters.
template <typename Scalar>
struct AdamState {
  NetworkParams<Scalar> m;
  NetworkParams<Scalar> v;
  long step = 0;

  static AdamState zeros_like(const NetworkParams<Scalar>& params) {
    return {params.zeros_like(), params.zeros_like(), 0};
  }
};

/// Global L2 norm over all gradient entries, accumulated in double.
template <typename Scalar>
double global_norm(const NetworkParams<Scalar>& grads);

/// Scales `grads` so its global norm is at most `max_norm`; returns the factor
/// applied (exactly 1 and no write when already within the bound).
template <typename Scalar>
double clip_global_norm(NetworkParams<Scalar>& grads, double max_norm);

/// One bias-corrected Adam update at learning rate `lr`, after clipping.
/// `step_index` ≥ 1 is the 1-based update count used for bias correction.
/// Throws naming the first layer with a non-finite gradient.
template <typename Scalar>
void adam_step(NetworkParams<Scalar>& params, NetworkParams<Scalar>& grads, AdamState<Scalar>& state, long step_index,
               double lr, const TrainConfig& cfg);

extern template double global_norm(const NetworkParams<float>&);
extern template double global_norm(const NetworkParams<double>&);
extern template double clip_global_norm(NetworkParams<float>&, double);
extern template double clip_global_norm(NetworkParams<double>&, double);
extern template void adam_step(NetworkParams<float>&, NetworkParams<float>&, AdamState<float>&, long, double,
                               const TrainConfig&);
extern template void adam_step(NetworkParams<double>&, NetworkParams<double>&, AdamState<double>&, long, double,
                               const TrainConfig&);

}  // namespace rising::nn
