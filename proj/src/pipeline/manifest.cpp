#include "rising/pipeline/manifest.hpp"

#include "rising/common.hpp"

namespace rising::pipeline {

namespace {

nlohmann::json artifact_json(const Artifact& a) {
  return {{"path", a.path}, {"sha256", a.sha256}, {"config_hash", a.config_hash}, {"info", a.info}};
}

Artifact artifact_from(const nlohmann::json& j) {
  return {j.at("path").get<std::string>(), j.at("sha256").get<std::string>(), j.at("config_hash").get<std::string>(),
          j.value("info", nlohmann::json::object())};
}

}  // namespace

nlohmann::json ExperimentManifest::to_json() const {
  auto entries_json = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j = {{"id", e.id}, {"index", e.index}, {"split", e.split}};
    if (e.ground_truth) j["x_gt"] = artifact_json(*e.ground_truth);
    if (e.sinogram) j["sinogram"] = artifact_json(*e.sinogram);
    if (e.target) j["x_is"] = artifact_json(*e.target);
    if (!e.ris.empty()) {
      auto ris = nlohmann::json::object();
      for (const auto& [k, a] : e.ris) ris[std::to_string(k)] = artifact_json(a);
      j["x_ris"] = ris;
    }
    if (!e.errors.empty()) j["errors"] = e.errors;
    entries_json.push_back(std::move(j));
  }
  auto models_json = nlohmann::json::object();
  for (const auto& [key, a] : models) models_json[key] = artifact_json(a);
  auto evals_json = nlohmann::json::object();
  for (const auto& [key, a] : evaluations) evals_json[key] = artifact_json(a);
  return {{"format", "rising-experiment"},
          {"config", config},
          {"entries", entries_json},
          {"models", models_json},
          {"evaluations", evals_json}};
}

ExperimentManifest ExperimentManifest::from_json(const nlohmann::json& doc) {
  ExperimentManifest m;
  m.config = doc.value("config", nlohmann::json::object());
  for (const auto& j : doc.at("entries")) {
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.index = j.at("index").get<std::uint64_t>();
    e.split = j.at("split").get<std::string>();
    if (j.contains("x_gt")) e.ground_truth = artifact_from(j["x_gt"]);
    if (j.contains("sinogram")) e.sinogram = artifact_from(j["sinogram"]);
    if (j.contains("x_is")) e.target = artifact_from(j["x_is"]);
    if (j.contains("x_ris"))
      for (const auto& [k, a] : j["x_ris"].items()) e.ris.emplace(std::stoi(k), artifact_from(a));
    if (j.contains("errors")) e.errors = j["errors"].get<std::map<std::string, std::string>>();
    m.entries.push_back(std::move(e));
  }
  if (doc.contains("models"))
    for (const auto& [key, a] : doc["models"].items()) m.models.emplace(key, artifact_from(a));
  if (doc.contains("evaluations"))
    for (const auto& [key, a] : doc["evaluations"].items()) m.evaluations.emplace(key, artifact_from(a));
  return m;
}

ExperimentManifest ExperimentManifest::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed experiment manifest: ") + e.what());
  }
}

void ExperimentManifest::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

const ManifestEntry* ExperimentManifest::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<const ManifestEntry*> ExperimentManifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == name) out.push_back(&e);
  return out;
}

std::string config_hash(const nlohmann::json& doc) { return sha256_hex(doc.dump()); }

bool artifact_current(const std::optional<Artifact>& artifact, const std::string& expected_hash,
                      const std::filesystem::path& root) {
  if (!artifact || artifact->config_hash != expected_hash) return false;
  const auto file = root / artifact->path;
  std::error_code ec;
  if (!std::filesystem::exists(file, ec)) return false;
  return sha256_file(file) == artifact->sha256;
}

}  // namespace rising::pipeline
