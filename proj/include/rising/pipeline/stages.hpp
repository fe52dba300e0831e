#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rising/metrics/report.hpp"
#include "rising/nn/checkpoint.hpp"
#include "rising/pipeline/config.hpp"
#include "rising/pipeline/manifest.hpp"

namespace rising::pipeline {

struct StageReport {
  std::string stage;
  int processed = 0;
  int skipped = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // (entry id, message)

  bool ok() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path log_csv;
  nn::TrainingLog log;
  bool skipped = false;
  double seconds = 0.0;
};

struct Reconstruction {
  tomo::Image x_ris;
  tomo::Image x_out;  // x_ING or x_LPP
  double ris_seconds = 0.0;
  double network_seconds = 0.0;
  // Filled when the solver was also continued from K to convergence for comparison.
  std::optional<tomo::Image> x_converged{};
  std::optional<double> remaining_solver_seconds{};
  std::optional<int> k_star{};
};

struct EvaluationOutcome {
  metrics::MetricsReport report;
  std::filesystem::path csv;
  std::filesystem::path table;
  std::string output_role;  // x_ING or x_LPP
  bool skipped = false;
};

/// One experiment directory: stages read and update `<output_dir>/manifest.json`.
///
/// Every stage records, per artifact, a hash of the configuration chain that
/// produced it; rerunning with an unchanged chain skips the work unless `force`.
/// Per-entry failures are recorded in the manifest and reported, the remaining
/// entries still run.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const ExperimentManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return cfg_.output_dir; }
  std::filesystem::path manifest_path() const { return root() / "manifest.json"; }

  StageReport generate_data(bool force = false);
  StageReport simulate(bool force = false);
  StageReport build_targets(bool force = false);
  StageReport build_ris(bool force = false);
  TrainOutcome train(bool force = false);
  /// K SGP iterations on `sinogram`, then the checkpoint's network. With
  /// `compare_solver` the solver is also continued to convergence and timed.
  Reconstruction reconstruct(const std::filesystem::path& checkpoint, const tomo::Sinogram& sinogram,
                             bool compare_solver = false) const;
  /// Metrics of x_RIS, the network output and x_IS on the test split.
  EvaluationOutcome evaluate(const std::filesystem::path& checkpoint, bool force = false);

  /// Default checkpoint location for the configured mode and K.
  std::filesystem::path checkpoint_path() const;
  std::string model_key() const;

  /// Configuration hashes of the stage chain.
  std::string data_hash() const;
  std::string simulate_hash() const;
  std::string target_hash() const;
  std::string ris_hash(int k) const;
  std::string model_hash() const;

  /// Per-image noise seed derived from seeds.noise and the phantom index.
  std::uint64_t noise_seed(std::uint64_t index) const;

 private:
  const tomo::Projector& projector() const;
  void save_manifest();
  void check_checkpoint(const nn::Checkpoint& ckpt) const;
  template <typename Fn>
  StageReport for_each_entry(const std::string& stage, Fn&& fn);

  ExperimentConfig cfg_;
  ExperimentManifest manifest_;
  mutable std::unique_ptr<tomo::Projector> projector_;
};

/// CSV with a `col` column and one column per image holding row `row`,
/// columns [col_begin, col_end). Column headers are the file stems.
std::string intensity_profile_csv(const std::vector<std::filesystem::path>& images, int row, int col_begin,
                                  int col_end);

}  // namespace rising::pipeline
