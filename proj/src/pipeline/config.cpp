#include "rising/pipeline/config.hpp"

#include <regex>

#include "rising/phantom/dataset.hpp"
#include "rising/tomo/raster_io.hpp"

namespace rising::pipeline {

std::string to_string(TrainMode mode) { return mode == TrainMode::rising ? "rising" : "lpp"; }

TrainMode train_mode_from_string(std::string_view text) {
  if (text == "rising") return TrainMode::rising;
  if (text == "lpp") return TrainMode::lpp;
  throw Error("unknown training mode '" + std::string(text) + "' (expected rising or lpp)");
}

void ExperimentConfig::validate() const {
  dataset.spec.validate();
  if (!dataset.manifest) {
    if (dataset.count < 1) throw Error("ExperimentConfig: dataset.count must be >= 1");
    if (!(dataset.train_ratio >= 0.0 && dataset.train_ratio <= 1.0))
      throw Error("ExperimentConfig: dataset.train_ratio must lie in [0, 1]");
  }
  geometry.validate();
  if (!(noise_level >= 0.0)) throw Error("ExperimentConfig: noise_level must be >= 0");
  solver.validate();
  if (k < 1) throw Error("ExperimentConfig: K must be >= 1");
  network.validate();
  training.validate();
  if (grid().n % network.divisor() != 0)
    throw Error("ExperimentConfig: image side " + std::to_string(grid().n) + " is not divisible by 2^levels = " +
                std::to_string(network.divisor()));
  if (output_dir.empty()) throw Error("ExperimentConfig: output_dir is empty");
}

tomo::ScanGeometry expand_protocol(std::string_view name, const tomo::GridSpec& grid, tomo::BeamMode mode) {
  static const std::regex pattern(R"(^P_?\{?\s*(\d+(?:\.\d+)?)\s*[,_]\s*(\d+)\s*\}?$)");
  std::cmatch m;
  if (!std::regex_match(name.begin(), name.end(), m, pattern))
    throw Error("unrecognised protocol '" + std::string(name) + "' (expected P_{range,views})");
  const double range = std::stod(m[1].str());
  const int views = std::stoi(m[2].str());
  if (!(range > 0.0 && range <= 360.0) || views < 1)
    throw Error("protocol '" + std::string(name) + "' needs 0 < range <= 360 and views >= 1");
  return tomo::default_geometry(grid, mode, tomo::even_angles(range, views, 0.0));
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json dataset;
  if (c.dataset.manifest) {
    dataset = {{"manifest", c.dataset.manifest->string()}, {"spec", to_json(c.dataset.spec)}};
  } else {
    dataset = {{"spec", to_json(c.dataset.spec)}, {"count", c.dataset.count}, {"train_ratio", c.dataset.train_ratio}};
  }
  nlohmann::json doc = {{"dataset", dataset},
                        {"geometry", c.protocol.empty() ? tomo::geometry_to_json(c.geometry) : nlohmann::json(c.protocol)},
                        {"noise_level", c.noise_level},
                        {"solver", solver::to_json(c.solver)},
                        {"K", c.k},
                        {"network", nn::to_json(c.network)},
                        {"training", nn::to_json(c.training)},
                        {"mode", to_string(c.mode)},
                        {"output_dir", c.output_dir.string()},
                        {"seeds", {{"data", c.seeds.data}, {"noise", c.seeds.noise}, {"init", c.seeds.init},
                                   {"shuffle", c.seeds.shuffle}}}};
  return doc;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
  ExperimentConfig c = default_experiment();
  try {
    if (doc.contains("seeds")) {
      const auto& s = doc["seeds"];
      c.seeds.data = s.value("data", c.seeds.data);
      c.seeds.noise = s.value("noise", c.seeds.noise);
      c.seeds.init = s.value("init", c.seeds.init);
      c.seeds.shuffle = s.value("shuffle", c.seeds.shuffle);
    }
    if (doc.contains("dataset")) {
      const auto& d = doc["dataset"];
      if (d.contains("manifest")) {
        c.dataset.manifest = d["manifest"].get<std::string>();
        c.dataset.spec = phantom::load_dataset_manifest(*c.dataset.manifest).spec;
      } else {
        if (d.contains("spec")) c.dataset.spec = phantom::phantom_spec_from_json(d["spec"]);
        c.dataset.count = d.value("count", c.dataset.count);
        c.dataset.train_ratio = d.value("train_ratio", c.dataset.train_ratio);
      }
    }
    if (!c.dataset.manifest && !(doc.contains("dataset") && doc["dataset"].contains("spec") &&
                                 doc["dataset"]["spec"].contains("seed")))
      c.dataset.spec.seed = c.seeds.data;
    if (doc.contains("geometry")) {
      const auto& g = doc["geometry"];
      if (g.is_string()) {
        c.protocol = g.get<std::string>();
      } else {
        c.protocol.clear();
        c.geometry = tomo::geometry_from_json(g, c.grid());
      }
    }
    if (!c.protocol.empty()) c.geometry = expand_protocol(c.protocol, c.grid());
    c.noise_level = doc.value("noise_level", c.noise_level);
    if (doc.contains("solver")) c.solver = solver::solver_config_from_json(doc["solver"]);
    c.k = doc.value("K", c.k);
    if (doc.contains("network")) c.network = nn::network_spec_from_json(doc["network"]);
    if (doc.contains("training")) c.training = nn::train_config_from_json(doc["training"]);
    if (doc.contains("mode")) c.mode = train_mode_from_string(doc["mode"].get<std::string>());
    c.output_dir = doc.value("output_dir", c.output_dir.string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("ExperimentConfig JSON: ") + e.what());
  }
  c.training.shuffle_seed = c.seeds.shuffle;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  try {
    return experiment_config_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path, std::string("malformed JSON: ") + e.what());
  }
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.dataset.spec.grid = {64, 1.0};
  c.dataset.spec.seed = c.seeds.data;
  c.geometry = expand_protocol(c.protocol, c.grid());
  c.training.shuffle_seed = c.seeds.shuffle;
  return c;
}

}  // namespace rising::pipeline
