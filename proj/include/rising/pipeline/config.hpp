#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rising/nn/adam.hpp"
#include "rising/phantom/phantom.hpp"
#include "rising/solver/sgp.hpp"

namespace rising::pipeline {

enum class TrainMode { rising, lpp };
std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view text);

struct Seeds {
  std::uint64_t data = 1;
  std::uint64_t noise = 2;
  std::uint64_t init = 3;
  std::uint64_t shuffle = 4;
  friend bool operator==(const Seeds&, const Seeds&) = default;
};

/// Phantom source: either generated from `spec` (count, train_ratio) or an
/// existing phantom dataset given by its manifest path.
struct DatasetSource {
  std::optional<std::filesystem::path> manifest;
  phantom::PhantomSpec spec;
  int count = 140;
  double train_ratio = 120.0 / 140.0;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::string protocol = "P_{360,60}";  // empty when the geometry was given explicitly
  tomo::ScanGeometry geometry;
  double noise_level = 0.01;
  solver::SolverConfig solver;
  int k = 10;
  nn::NetworkSpec network;
  nn::TrainConfig training;
  TrainMode mode = TrainMode::rising;
  std::filesystem::path output_dir = "rising_run";
  Seeds seeds;

  const tomo::GridSpec& grid() const { return dataset.spec.grid; }
  void validate() const;
};

/// Expands a named protocol "P_{range,views}" (also accepted: "P{range,views}",
/// "P_range_views") into `views` fan-beam angles evenly spanning [0, range).
tomo::ScanGeometry expand_protocol(std::string_view name, const tomo::GridSpec& grid,
                                   tomo::BeamMode mode = tomo::BeamMode::fan);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys take the desk-scale defaults; the training shuffle seed is
/// always seeds.shuffle.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Desk-scale default experiment: 64×64 phantoms, 120/20 split, P_{360,60},
/// 1% noise, K = 10, three-level network, 100 epochs.
ExperimentConfig default_experiment();

}  // namespace rising::pipeline
