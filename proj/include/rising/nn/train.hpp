#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rising/nn/adam.hpp"

namespace rising::nn {

/// One single-channel training pair, values in [0, 1].
struct Sample {
  Matrix<float> input;
  Matrix<float> target;
};

struct EpochRecord {
  int epoch = 0;           // 0 = loss of the initial parameters, before any update
  double mean_loss = 0.0;  // (1/N) Σ ‖F(x) − t‖² over the whole training set
  double lr = 0.0;         // learning rate at the end of the epoch
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  /// epoch,mean_loss,lr
  std::string to_csv() const;
};

struct TrainResult {
  NetworkParams<float> params;
  AdamState<float> adam;
  TrainingLog log;
  int epochs_done = 0;
};

/// Starting point for continuing an interrupted run.
struct TrainResume {
  NetworkParams<float> params;
  AdamState<float> adam;
  TrainingLog log;
  int epochs_done = 0;
};

using EpochCallback = std::function<void(const EpochRecord&, const TrainResult&)>;

/// Packs samples (in the given order) into an (N, 1, H, W) tensor.
Tensor4<float> stack_inputs(const std::vector<Sample>& samples, const std::vector<std::size_t>& order);
Tensor4<float> stack_targets(const std::vector<Sample>& samples, const std::vector<std::size_t>& order);

/// Mean per-sample squared error of `net` over `samples`, evaluated in batches.
double dataset_loss(const ResUNet<float>& net, const std::vector<Sample>& samples, int batch_size);

/// Mini-batch Adam on the mean per-sample squared error. Epoch e shuffles with
/// RandomStream{shuffle_seed, e}; the step count for the learning-rate schedule
/// is epochs·⌈N / batch_size⌉. Results depend only on the seeds and inputs.
TrainResult train(const std::vector<Sample>& samples, const NetworkSpec& spec, const TrainConfig& cfg,
                  std::uint64_t init_seed, const TrainResume* resume = nullptr, const EpochCallback& on_epoch = {});

}  // namespace rising::nn
