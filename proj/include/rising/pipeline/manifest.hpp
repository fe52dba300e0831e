#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rising::pipeline {

/// A file produced by a stage. `path` is relative to the experiment directory;
/// `config_hash` identifies the configuration (and upstream chain) that made it.
struct Artifact {
  std::string path;
  std::string sha256;
  std::string config_hash;
  nlohmann::json info = nlohmann::json::object();  // stage-specific extras (K*, timings, ...)
};

struct ManifestEntry {
  std::string id;
  std::uint64_t index = 0;
  std::string split;  // "train" | "test"
  std::optional<Artifact> ground_truth;
  std::optional<Artifact> sinogram;
  std::optional<Artifact> target;     // x_IS
  std::map<int, Artifact> ris;        // x_RIS keyed by K
  std::map<std::string, std::string> errors;  // stage → message of the last failure
};

/// Experiment-level index at `<output_dir>/manifest.json`.
struct ExperimentManifest {
  nlohmann::json config = nlohmann::json::object();  // last configuration that wrote the manifest
  std::vector<ManifestEntry> entries;
  std::map<std::string, Artifact> models;       // "<mode>_K<k>" → checkpoint
  std::map<std::string, Artifact> evaluations;  // "<mode>_K<k>" → metrics CSV

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& doc);

  static ExperimentManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const ManifestEntry* find(const std::string& id) const;
  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

/// SHA-256 of a canonical JSON dump; used as the configuration hash of a stage.
std::string config_hash(const nlohmann::json& doc);

/// True when `artifact` exists with the expected hash and its file matches the recorded checksum.
bool artifact_current(const std::optional<Artifact>& artifact, const std::string& expected_hash,
                      const std::filesystem::path& root);

}  // namespace rising::pipeline
