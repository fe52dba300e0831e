#pragma once

#include <filesystem>

#include <json.hpp>

#include "rising/nn/train.hpp"

namespace rising::nn {

/// Trained model plus everything needed to resume or audit it.
struct Checkpoint {
  TrainConfig train_config;
  std::uint64_t init_seed = 0;
  int epoch = 0;
  TrainingLog log;
  NetworkParams<float> params;
  std::optional<AdamState<float>> adam;
  nlohmann::json provenance = nlohmann::json::object();  // generating experiment config
};

/// Writes `path` (JSON manifest) and `path + ".params"` (little-endian float32,
/// layers in forward order, weights then bias). When Adam state is present the
/// moments go to `path + ".adam"` as m then v in the same layout.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rising::nn
