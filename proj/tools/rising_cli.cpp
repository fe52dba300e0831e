// Command-line front end for the reconstruction pipeline.
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "rising/pipeline/stages.hpp"
#include "rising/tomo/raster_io.hpp"

namespace fs = std::filesystem;
using namespace rising;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::optional<int> k;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed_data, seed_noise, seed_init, seed_shuffle;
  std::optional<int> epochs;
  std::optional<std::string> output_dir;
  bool force = false;
};

pipeline::ExperimentConfig resolve_config(const Overrides& o) {
  json doc = json::object();
  if (!o.config.empty()) {
    try {
      doc = json::parse(read_text_file(o.config));
    } catch (const json::parse_error& e) {
      throw IoError(o.config, std::string("malformed JSON: ") + e.what());
    }
  }
  if (o.k) doc["K"] = *o.k;
  if (o.mode) doc["mode"] = *o.mode;
  if (o.output_dir) doc["output_dir"] = *o.output_dir;
  if (o.epochs) doc["training"]["epochs"] = *o.epochs;
  if (o.seed_data) doc["seeds"]["data"] = *o.seed_data;
  if (o.seed_noise) doc["seeds"]["noise"] = *o.seed_noise;
  if (o.seed_init) doc["seeds"]["init"] = *o.seed_init;
  if (o.seed_shuffle) doc["seeds"]["shuffle"] = *o.seed_shuffle;
  if (o.seed_data && doc.contains("dataset") && doc["dataset"].contains("spec"))
    doc["dataset"]["spec"]["seed"] = *o.seed_data;
  return pipeline::experiment_config_from_json(doc);
}

void print(const json& j) { std::cout << j.dump(2) << std::endl; }

int finish(const pipeline::StageReport& r) {
  print(r.to_json());
  if (!r.ok()) throw Error(r.stage + ": " + std::to_string(r.failures.size()) + " entries failed; first: " +
                           r.failures.front().first + ": " + r.failures.front().second);
  return 0;
}

json error_json(const std::string& type, const std::string& message, const std::string& path = {}) {
  json j = {{"error", {{"type", type}, {"message", message}}}};
  if (!path.empty()) j["error"]["path"] = path;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  CLI::App app{"Sparse-view CT reconstruction: early-stopped SGP followed by a learned completion network"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("-c,--config", o.config, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--k", o.k, "Number of RIS iterations K");
  app.add_option("--mode", o.mode, "Training targets: rising (x_IS) or lpp (x_GT)")
      ->check(CLI::IsMember({"rising", "lpp"}));
  app.add_option("--seed.data", o.seed_data, "Phantom seed");
  app.add_option("--seed.noise", o.seed_noise, "Sinogram noise seed");
  app.add_option("--seed.init", o.seed_init, "Network initialization seed");
  app.add_option("--seed.shuffle", o.seed_shuffle, "Mini-batch shuffling seed");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("-o,--output-dir", o.output_dir, "Experiment directory");
  app.add_flag("--force", o.force, "Recompute even when artifacts are current");

  auto* gen = app.add_subcommand("generate-data", "Generate the phantom dataset");
  auto* sim = app.add_subcommand("simulate", "Simulate noisy sinograms");
  auto* targets = app.add_subcommand("build-targets", "Run SGP to convergence (x_IS)");
  auto* ris = app.add_subcommand("build-ris", "Run K SGP iterations (x_RIS)");
  auto* train = app.add_subcommand("train", "Train the network for the configured mode and K");
  auto* run = app.add_subcommand("run", "All stages from data generation to evaluation");

  std::string checkpoint, sinogram_path, output;
  bool compare = false;
  auto* recon = app.add_subcommand("reconstruct", "K SGP iterations followed by the network");
  recon->add_option("--checkpoint", checkpoint, "Checkpoint (.ckpt)")->required()->check(CLI::ExistingFile);
  recon->add_option("--sinogram", sinogram_path, "Sinogram payload (.sinraw)")->required()->check(CLI::ExistingFile);
  recon->add_option("--output", output, "Output image payload (.imgraw)")->required();
  recon->add_flag("--compare-solver", compare, "Also continue SGP to convergence and time it");

  auto* eval = app.add_subcommand("evaluate", "Metrics on the test split");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint (default: the configured mode and K)");

  std::vector<std::string> images;
  int row = 0;
  std::vector<int> cols;
  auto* prof = app.add_subcommand("profile", "Intensity profiles along an image row");
  prof->add_option("--image", images, "Image payloads")->required()->check(CLI::ExistingFile);
  prof->add_option("--row", row, "Row index")->required();
  prof->add_option("--cols", cols, "Column range: begin end (exclusive)")->expected(2);
  prof->add_option("--output", output, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json("usage", e.what()).dump() << std::endl;
    return 2;
  }

  try {
    if (prof->parsed()) {
      int c0 = 0, c1 = -1;
      if (cols.size() == 2) {
        c0 = cols[0];
        c1 = cols[1];
      } else {
        c1 = static_cast<int>(tomo::read_raster(images.at(0)).cols());
      }
      std::vector<fs::path> paths(images.begin(), images.end());
      const auto csv = pipeline::intensity_profile_csv(paths, row, c0, c1);
      if (output.empty()) std::cout << csv;
      else write_file_atomic(output, csv);
      return 0;
    }

    pipeline::Experiment exp(resolve_config(o));
    if (gen->parsed()) return finish(exp.generate_data(o.force));
    if (sim->parsed()) return finish(exp.simulate(o.force));
    if (targets->parsed()) return finish(exp.build_targets(o.force));
    if (ris->parsed()) return finish(exp.build_ris(o.force));
    if (train->parsed() || run->parsed()) {
      if (run->parsed()) {
        for (auto stage : {&pipeline::Experiment::generate_data, &pipeline::Experiment::simulate,
                           &pipeline::Experiment::build_targets, &pipeline::Experiment::build_ris}) {
          const auto r = (exp.*stage)(o.force);
          print(r.to_json());
          if (!r.ok()) return finish(r);
        }
      }
      const auto t = exp.train(o.force);
      print({{"stage", "train"},
             {"checkpoint", t.checkpoint.string()},
             {"log", t.log_csv.string()},
             {"skipped", t.skipped},
             {"seconds", t.seconds},
             {"initial_loss", t.log.epochs.front().mean_loss},
             {"final_loss", t.log.epochs.back().mean_loss}});
      if (!run->parsed()) return 0;
    }
    if (recon->parsed()) {
      const auto b = tomo::read_sinogram(sinogram_path, exp.config().geometry);
      const auto r = exp.reconstruct(checkpoint, b, compare);
      tomo::write_image(output, r.x_out);
      json j = {{"stage", "reconstruct"}, {"output", output}, {"ris_seconds", r.ris_seconds},
                {"network_seconds", r.network_seconds}};
      if (r.remaining_solver_seconds) j["remaining_solver_seconds"] = *r.remaining_solver_seconds;
      if (r.k_star) j["k_star"] = *r.k_star;
      print(j);
      return 0;
    }
    if (eval->parsed() || run->parsed()) {
      const fs::path ckpt = checkpoint.empty() ? exp.checkpoint_path() : fs::path(checkpoint);
      const auto e = exp.evaluate(ckpt, o.force);
      std::cout << read_text_file(e.table);
      print({{"stage", "evaluate"}, {"csv", e.csv.string()}, {"table", e.table.string()}, {"skipped", e.skipped}});
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << error_json("io", e.what(), e.path().string()).dump() << std::endl;
    return 1;
  } catch (const Error& e) {
    std::cerr << error_json("rising", e.what()).dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()).dump() << std::endl;
    return 1;
  }
  return 0;
}
