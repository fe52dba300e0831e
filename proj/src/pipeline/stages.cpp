#include "rising/pipeline/stages.hpp"

#include <chrono>
#include <cstdio>
#include <set>

#include "rising/phantom/dataset.hpp"
#include "rising/random.hpp"
#include "rising/tomo/raster_io.hpp"

namespace rising::pipeline {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Artifact make_artifact(const fs::path& root, const fs::path& relative, const std::string& hash,
                       nlohmann::json info = nlohmann::json::object()) {
  return {relative.generic_string(), sha256_file(root / relative), hash, std::move(info)};
}

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > 10) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

nn::Matrix<float> to_float(const tomo::Image& image) { return image.values.cast<float>(); }

std::string role_for(TrainMode mode) { return mode == TrainMode::rising ? "x_ING" : "x_LPP"; }

}  // namespace

nlohmann::json StageReport::to_json() const {
  auto f = nlohmann::json::array();
  for (const auto& [id, msg] : failures) f.push_back({{"id", id}, {"error", msg}});
  return {{"stage", stage}, {"processed", processed}, {"skipped", skipped}, {"failed", failures.size()},
          {"failures", f}};
}

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (fs::exists(manifest_path())) manifest_ = ExperimentManifest::load(manifest_path());
}

const tomo::Projector& Experiment::projector() const {
  if (!projector_) projector_ = std::make_unique<tomo::Projector>(cfg_.grid(), cfg_.geometry);
  return *projector_;
}

void Experiment::save_manifest() {
  manifest_.config = to_json(cfg_);
  manifest_.save(manifest_path());
}

// ------------------------------------------------------------------ hashes

std::string Experiment::data_hash() const {
  if (cfg_.dataset.manifest) return sha256_file(*cfg_.dataset.manifest);
  return config_hash({{"spec", to_json(cfg_.dataset.spec)},
                      {"count", cfg_.dataset.count},
                      {"train_ratio", cfg_.dataset.train_ratio}});
}

std::string Experiment::simulate_hash() const {
  return config_hash({{"data", data_hash()},
                      {"geometry", tomo::geometry_to_json(cfg_.geometry)},
                      {"noise_level", cfg_.noise_level},
                      {"noise_seed", cfg_.seeds.noise}});
}

std::string Experiment::target_hash() const {
  auto s = solver::to_json(cfg_.solver);
  return config_hash({{"sinogram", simulate_hash()}, {"solver", s}, {"mode", "to_convergence"}});
}

std::string Experiment::ris_hash(int k) const {
  return config_hash({{"sinogram", simulate_hash()}, {"solver", solver::to_json(cfg_.solver)}, {"K", k}});
}

std::string Experiment::model_hash() const {
  std::vector<std::string> ids;
  for (const auto* e : manifest_.split("train")) ids.push_back(e->id);
  return config_hash({{"inputs", ris_hash(cfg_.k)},
                      {"targets", cfg_.mode == TrainMode::rising ? target_hash() : data_hash()},
                      {"mode", to_string(cfg_.mode)},
                      {"network", nn::to_json(cfg_.network)},
                      {"training", nn::to_json(cfg_.training)},
                      {"init_seed", cfg_.seeds.init},
                      {"train_ids", ids}});
}

std::uint64_t Experiment::noise_seed(std::uint64_t index) const {
  RandomStream rng{cfg_.seeds.noise, index};
  return static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53);
}

std::string Experiment::model_key() const { return to_string(cfg_.mode) + "_K" + std::to_string(cfg_.k); }

fs::path Experiment::checkpoint_path() const { return root() / "models" / (model_key() + ".ckpt"); }

// ------------------------------------------------------------------ batch stages

template <typename Fn>
StageReport Experiment::for_each_entry(const std::string& stage, Fn&& fn) {
  StageReport report;
  report.stage = stage;
  const auto n = static_cast<long>(manifest_.entries.size());
  std::vector<int> status(manifest_.entries.size(), 0);  // 1 processed, 0 skipped, −1 failed
  std::vector<std::string> messages(manifest_.entries.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto& entry = manifest_.entries[static_cast<std::size_t>(i)];
    try {
      status[static_cast<std::size_t>(i)] = fn(entry) ? 1 : 0;
      entry.errors.erase(stage);
    } catch (const std::exception& e) {
      status[static_cast<std::size_t>(i)] = -1;
      messages[static_cast<std::size_t>(i)] = e.what();
      entry.errors[stage] = e.what();
    }
  }
  for (std::size_t i = 0; i < status.size(); ++i) {
    if (status[i] > 0) ++report.processed;
    else if (status[i] == 0) ++report.skipped;
    else report.failures.emplace_back(manifest_.entries[i].id, messages[i]);
  }
  save_manifest();
  return report;
}

StageReport Experiment::generate_data(bool force) {
  const std::string hash = data_hash();
  phantom::DatasetManifest dataset;
  fs::path data_dir;
  bool regenerate = false;
  if (cfg_.dataset.manifest) {
    dataset = phantom::load_dataset_manifest(*cfg_.dataset.manifest);
    data_dir = fs::absolute(cfg_.dataset.manifest->parent_path());
  } else {
    data_dir = root() / "data";
    bool current = !manifest_.entries.empty() &&
                   manifest_.entries.size() == static_cast<std::size_t>(cfg_.dataset.count);
    for (const auto& e : manifest_.entries) current = current && artifact_current(e.ground_truth, hash, root());
    regenerate = force || !current;
    if (regenerate) {
      dataset = phantom::generate_dataset(cfg_.dataset.spec, cfg_.dataset.count, cfg_.dataset.train_ratio, data_dir);
    } else {
      dataset = phantom::load_dataset_manifest(data_dir / "manifest.json");
    }
  }

  std::vector<ManifestEntry> entries;
  for (const auto& d : dataset.entries) {
    ManifestEntry e;
    if (const auto* old = manifest_.find(d.id)) e = *old;
    e.id = d.id;
    e.index = d.index;
    e.split = d.split;
    const fs::path file = cfg_.dataset.manifest ? data_dir / d.file : fs::path("data") / d.file;
    e.ground_truth = Artifact{file.generic_string(), d.sha256, hash, {{"seed", d.seed}}};
    entries.push_back(std::move(e));
  }
  manifest_.entries = std::move(entries);

  StageReport report;
  report.stage = "generate-data";
  (regenerate ? report.processed : report.skipped) = static_cast<int>(manifest_.entries.size());
  for (const auto& e : manifest_.entries)
    if (!fs::exists(root() / e.ground_truth->path))
      report.failures.emplace_back(e.id, "missing phantom file " + e.ground_truth->path);
  save_manifest();
  return report;
}

StageReport Experiment::simulate(bool force) {
  if (manifest_.entries.empty()) throw Error("simulate: no dataset entries; run generate-data first");
  const std::string hash = simulate_hash();
  const auto& proj = projector();
  return for_each_entry("simulate", [&](ManifestEntry& e) {
    if (!force && artifact_current(e.sinogram, hash, root())) return false;
    if (!e.ground_truth) throw Error("no ground truth image");
    const auto gt = tomo::read_image(root() / e.ground_truth->path, cfg_.grid().pixel_size);
    if (gt.grid.n != cfg_.grid().n)
      throw Error("phantom is " + std::to_string(gt.grid.n) + " pixels wide, configuration expects " +
                  std::to_string(cfg_.grid().n));
    const auto seed = noise_seed(e.index);
    const auto b = tomo::simulate_sinogram(proj, gt, cfg_.noise_level, seed);
    const fs::path rel = fs::path("sinograms") / ("sino_" + e.id + ".sinraw");
    tomo::write_sinogram(root() / rel, b);
    // Noise level as stored (after float32 rounding).
    const auto stored = tomo::read_sinogram(root() / rel, cfg_.geometry);
    const auto clean = proj.forward(gt);
    const double ratio = (stored.flat() - clean.flat()).norm() / clean.flat().norm();
    e.sinogram = make_artifact(root(), rel, hash, {{"noise_seed", seed}, {"noise_level", cfg_.noise_level},
                                                   {"measured_noise_level", ratio}});
    return true;
  });
}

StageReport Experiment::build_targets(bool force) {
  if (manifest_.entries.empty()) throw Error("build-targets: no dataset entries; run generate-data first");
  const std::string hash = target_hash();
  const std::string sim = simulate_hash();
  const auto& proj = projector();
  return for_each_entry("build-targets", [&](ManifestEntry& e) {
    if (!force && artifact_current(e.target, hash, root())) return false;
    if (!artifact_current(e.sinogram, sim, root())) throw Error("sinogram missing or stale; run simulate");
    const auto b = tomo::read_sinogram(root() / e.sinogram->path, cfg_.geometry);
    const auto gt = tomo::read_image(root() / e.ground_truth->path, cfg_.grid().pixel_size);
    solver::Problem problem(proj, b, cfg_.solver);
    const auto t0 = Clock::now();
    auto [x, rep] = solver::sgp_solve(problem, solver::ToConvergence{}, {&gt, 0});
    const double secs = seconds_since(t0);
    const fs::path rel = fs::path("targets") / ("x_is_" + e.id + ".imgraw");
    const fs::path hist = fs::path("targets") / ("x_is_" + e.id + "_history.csv");
    tomo::write_image(root() / rel, x);
    write_file_atomic(root() / hist, rep.to_csv());
    e.target = make_artifact(root(), rel, hash,
                             {{"k_star", rep.k_star ? nlohmann::json(*rep.k_star) : nlohmann::json(nullptr)},
                              {"iterations", rep.iterations},
                              {"stop_reason", to_string(rep.stop_reason)},
                              {"objective", rep.objective_history.empty() ? 0.0 : rep.objective_history.back()},
                              {"history", hist.generic_string()},
                              {"re", metrics::relative_error(x.values, gt.values)},
                              {"seconds", secs}});
    return true;
  });
}

StageReport Experiment::build_ris(bool force) {
  if (manifest_.entries.empty()) throw Error("build-ris: no dataset entries; run generate-data first");
  const int k = cfg_.k;
  const std::string hash = ris_hash(k);
  const std::string sim = simulate_hash();
  const auto& proj = projector();
  return for_each_entry("build-ris", [&](ManifestEntry& e) {
    const auto it = e.ris.find(k);
    if (!force && it != e.ris.end() && artifact_current(it->second, hash, root())) return false;
    if (!artifact_current(e.sinogram, sim, root())) throw Error("sinogram missing or stale; run simulate");
    const auto b = tomo::read_sinogram(root() / e.sinogram->path, cfg_.geometry);
    solver::Problem problem(proj, b, cfg_.solver);
    const auto t0 = Clock::now();
    auto [x, rep] = solver::sgp_solve(problem, solver::FixedK{k});
    const double secs = seconds_since(t0);
    const fs::path rel = fs::path("ris_K" + std::to_string(k)) / ("x_ris_" + e.id + ".imgraw");
    const fs::path hist = fs::path("ris_K" + std::to_string(k)) / ("x_ris_" + e.id + "_history.csv");
    tomo::write_image(root() / rel, x);
    write_file_atomic(root() / hist, rep.to_csv());
    e.ris[k] = make_artifact(root(), rel, hash,
                             {{"K", k},
                              {"iterations", rep.iterations},
                              {"stop_reason", to_string(rep.stop_reason)},
                              {"history", hist.generic_string()},
                              {"seconds", secs}});
    return true;
  });
}

// ------------------------------------------------------------------ training

TrainOutcome Experiment::train(bool force) {
  const std::string key = model_key();
  const std::string hash = model_hash();
  const fs::path ckpt_path = checkpoint_path();
  const fs::path log_path = root() / "models" / (key + "_training.csv");
  TrainOutcome out;
  out.checkpoint = ckpt_path;
  out.log_csv = log_path;

  if (!force) {
    const auto it = manifest_.models.find(key);
    if (it != manifest_.models.end() && artifact_current(it->second, hash, root())) {
      out.log = nn::load_checkpoint(ckpt_path).log;
      out.skipped = true;
      return out;
    }
  }

  const auto train_entries = manifest_.split("train");
  if (train_entries.empty()) throw Error("train: the train split is empty");
  const std::string ris = ris_hash(cfg_.k), tgt = target_hash(), gt = data_hash();
  std::vector<std::string> missing;
  std::vector<nn::Sample> samples;
  for (const auto* e : train_entries) {
    const auto r = e->ris.find(cfg_.k);
    const bool have_input = r != e->ris.end() && artifact_current(r->second, ris, root());
    const bool have_target = cfg_.mode == TrainMode::rising ? artifact_current(e->target, tgt, root())
                                                             : artifact_current(e->ground_truth, gt, root());
    if (!have_input) missing.push_back(e->id + " (x_RIS K=" + std::to_string(cfg_.k) + ")");
    if (!have_target) missing.push_back(e->id + (cfg_.mode == TrainMode::rising ? " (x_IS)" : " (x_GT)"));
    if (!have_input || !have_target) continue;
    const auto& tgt_art = cfg_.mode == TrainMode::rising ? *e->target : *e->ground_truth;
    samples.push_back({to_float(tomo::read_image(root() / r->second.path)),
                       to_float(tomo::read_image(root() / tgt_art.path))});
  }
  if (!missing.empty()) throw Error("train: manifest incomplete for mode " + to_string(cfg_.mode) + ": " +
                                    list_ids(missing));

  nlohmann::json provenance = to_json(cfg_);
  provenance["model_hash"] = hash;

  // Resume from a partial checkpoint written by an interrupted run of the same configuration.
  const fs::path partial = root() / "models" / (key + ".partial.ckpt");
  std::optional<nn::TrainResume> resume;
  if (!force && fs::exists(partial)) {
    try {
      auto p = nn::load_checkpoint(partial);
      if (p.provenance.value("model_hash", "") == hash && p.adam)
        resume = nn::TrainResume{std::move(p.params), std::move(*p.adam), std::move(p.log), p.epoch};
    } catch (const Error&) {
      resume.reset();
    }
  }

  auto snapshot = [&](const fs::path& path, const nn::TrainResult& r) {
    nn::Checkpoint ckpt{cfg_.training, cfg_.seeds.init, r.epochs_done, r.log, r.params, r.adam, provenance};
    nn::save_checkpoint(path, ckpt);
  };
  const auto t0 = Clock::now();
  auto result = nn::train(samples, cfg_.network, cfg_.training, cfg_.seeds.init, resume ? &*resume : nullptr,
                          [&](const nn::EpochRecord& rec, const nn::TrainResult& r) {
                            if (rec.epoch % 10 == 0 && rec.epoch < cfg_.training.epochs) snapshot(partial, r);
                          });
  out.seconds = seconds_since(t0);
  snapshot(ckpt_path, result);
  write_file_atomic(log_path, result.log.to_csv());
  for (const char* suffix : {"", ".params", ".adam"}) fs::remove(partial.string() + suffix);

  out.log = result.log;
  manifest_.models[key] =
      make_artifact(root(), fs::relative(ckpt_path, root()), hash,
                    {{"epochs", result.epochs_done},
                     {"final_loss", result.log.epochs.back().mean_loss},
                     {"initial_loss", result.log.epochs.front().mean_loss},
                     {"train_samples", samples.size()},
                     {"seconds", out.seconds},
                     {"log", fs::relative(log_path, root()).generic_string()}});
  save_manifest();
  return out;
}

// ------------------------------------------------------------------ inference

void Experiment::check_checkpoint(const nn::Checkpoint& ckpt) const {
  const auto& p = ckpt.provenance;
  if (!p.contains("geometry") || !p.contains("dataset"))
    throw Error("checkpoint has no experiment provenance");
  const auto spec = phantom::phantom_spec_from_json(p["dataset"].at("spec"));
  if (spec.grid.n != cfg_.grid().n)
    throw Error("checkpoint was trained on " + std::to_string(spec.grid.n) + "x" + std::to_string(spec.grid.n) +
                " images, request is " + std::to_string(cfg_.grid().n) + "x" + std::to_string(cfg_.grid().n));
  const auto& g = p["geometry"];
  const auto trained = g.is_string() ? expand_protocol(g.get<std::string>(), spec.grid)
                                     : tomo::geometry_from_json(g, spec.grid);
  if (tomo::geometry_to_json(trained) != tomo::geometry_to_json(cfg_.geometry))
    throw Error("geometry mismatch: checkpoint was trained for " + tomo::geometry_to_json(trained).dump().substr(0, 120) +
                " but the request uses " + tomo::geometry_to_json(cfg_.geometry).dump().substr(0, 120));
}

Reconstruction Experiment::reconstruct(const fs::path& checkpoint, const tomo::Sinogram& sinogram,
                                       bool compare_solver) const {
  const auto ckpt = nn::load_checkpoint(checkpoint);
  check_checkpoint(ckpt);
  if (tomo::geometry_to_json(sinogram.geometry) != tomo::geometry_to_json(cfg_.geometry))
    throw Error("reconstruct: sinogram geometry differs from the configured geometry");
  const int k = ckpt.provenance.value("K", cfg_.k);
  const auto solver_cfg = ckpt.provenance.contains("solver") ? solver::solver_config_from_json(ckpt.provenance["solver"])
                                                             : cfg_.solver;
  solver::Problem problem(projector(), sinogram, solver_cfg);

  Reconstruction rec{.x_ris = tomo::Image(cfg_.grid()), .x_out = tomo::Image(cfg_.grid())};
  auto t0 = Clock::now();
  auto [x_ris, rep] = solver::sgp_solve(problem, solver::FixedK{k});
  rec.ris_seconds = seconds_since(t0);
  rec.x_ris = x_ris;

  const nn::ResUNet<float> net(ckpt.params);
  nn::Tensor4<float> input(1, 1, cfg_.grid().n, cfg_.grid().n);
  input.plane(0, 0) = to_float(x_ris);
  t0 = Clock::now();
  const auto y = net.infer(input);
  rec.network_seconds = seconds_since(t0);
  rec.x_out = tomo::Image(cfg_.grid(), y.plane(0, 0).cast<double>());

  if (compare_solver) {
    t0 = Clock::now();
    const auto rest = solver::sgp_resume(problem, rep.state, solver::ToConvergence{});
    rec.remaining_solver_seconds = seconds_since(t0);
    rec.x_converged = tomo::Image(cfg_.grid(), Eigen::Map<const tomo::Raster<double>>(
                                                   rest.state.x.data(), cfg_.grid().n, cfg_.grid().n));
    if (rest.k_star) rec.k_star = *rest.k_star;
  }
  return rec;
}

EvaluationOutcome Experiment::evaluate(const fs::path& checkpoint, bool force) {
  const auto ckpt = nn::load_checkpoint(checkpoint);
  check_checkpoint(ckpt);
  const int k = ckpt.provenance.value("K", cfg_.k);
  const auto mode = train_mode_from_string(ckpt.provenance.value("mode", to_string(cfg_.mode)));
  const std::string key = to_string(mode) + "_K" + std::to_string(k);
  const fs::path dir = root() / "eval" / key;
  EvaluationOutcome out{{}, dir / "metrics.csv", dir / "table.txt", role_for(mode)};

  const auto tests = manifest_.split("test");
  if (tests.empty()) throw Error("evaluate: the test split is empty");
  const std::string ris = ris_hash(k), tgt = target_hash(), gt = data_hash();
  std::vector<std::string> missing;
  std::vector<std::string> ids;
  for (const auto* e : tests) {
    const auto r = e->ris.find(k);
    if (r == e->ris.end() || !artifact_current(r->second, ris, root())) missing.push_back(e->id + " (x_RIS)");
    if (!artifact_current(e->target, tgt, root())) missing.push_back(e->id + " (x_IS)");
    if (!artifact_current(e->ground_truth, gt, root())) missing.push_back(e->id + " (x_GT)");
    ids.push_back(e->id);
  }
  if (!missing.empty()) throw Error("evaluate: manifest incomplete: " + list_ids(missing));

  const std::string hash = config_hash({{"checkpoint", sha256_file(checkpoint)}, {"ris", ris}, {"targets", tgt},
                                        {"test_ids", ids}});
  if (!force) {
    const auto it = manifest_.evaluations.find(key);
    if (it != manifest_.evaluations.end() && artifact_current(it->second, hash, root())) {
      out.report = metrics::MetricsReport::from_csv(read_text_file(out.csv));
      out.skipped = true;
      return out;
    }
  }

  const nn::ResUNet<float> net(ckpt.params);
  const int n = cfg_.grid().n;
  const auto batch = static_cast<std::size_t>(ckpt.train_config.batch_size);
  for (std::size_t from = 0; from < tests.size(); from += batch) {
    const std::size_t count = std::min(batch, tests.size() - from);
    nn::Tensor4<float> input(static_cast<int>(count), 1, n, n);
    std::vector<tomo::Image> x_ris, x_is, x_gt;
    for (std::size_t j = 0; j < count; ++j) {
      const auto* e = tests[from + j];
      x_ris.push_back(tomo::read_image(root() / e->ris.at(k).path, cfg_.grid().pixel_size));
      x_is.push_back(tomo::read_image(root() / e->target->path, cfg_.grid().pixel_size));
      x_gt.push_back(tomo::read_image(root() / e->ground_truth->path, cfg_.grid().pixel_size));
      input.plane(static_cast<int>(j), 0) = to_float(x_ris.back());
    }
    const auto y = net.infer(input);
    for (std::size_t j = 0; j < count; ++j) {
      const auto& id = tests[from + j]->id;
      const tomo::Image x_out(cfg_.grid(), y.plane(static_cast<int>(j), 0).cast<double>());
      const std::string prefix = out.output_role == "x_ING" ? "x_ing_" : "x_lpp_";
      tomo::write_image(dir / (prefix + id + ".imgraw"), x_out);
      auto record = [&](const std::string& role, const tomo::Image& x) {
        out.report.add({id, role, metrics::relative_error(x.values, x_gt[j].values),
                        metrics::rmse(x.values, x_gt[j].values), metrics::ssim(x.values, x_gt[j].values),
                        metrics::rmse(x.values, x_is[j].values)});
      };
      record("x_RIS", x_ris[j]);
      record(out.output_role, x_out);
      record("x_IS", x_is[j]);
    }
  }

  write_file_atomic(out.csv, out.report.to_csv());
  const std::string label = to_string(mode) + " K=" + std::to_string(k);
  write_file_atomic(out.table, metrics::format_table({{label, out.report}}, {"re", "rmse", "ssim", "rmse_vs_is"}));
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& role : out.report.roles())
    for (const char* metric : {"re", "rmse", "ssim", "rmse_vs_is"}) {
      const auto s = out.report.aggregate(role, metric);
      summary[role][metric] = {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
    }
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  manifest_.evaluations[key] = make_artifact(root(), fs::relative(out.csv, root()), hash,
                                             {{"table", fs::relative(out.table, root()).generic_string()},
                                              {"summary", summary}});
  save_manifest();
  return out;
}

// ------------------------------------------------------------------ profiles

std::string intensity_profile_csv(const std::vector<fs::path>& images, int row, int col_begin, int col_end) {
  if (images.empty()) throw Error("profile: no images given");
  std::vector<tomo::Raster<double>> rasters;
  for (const auto& p : images) rasters.push_back(tomo::read_raster(p));
  const auto rows = rasters[0].rows(), cols = rasters[0].cols();
  for (std::size_t i = 1; i < rasters.size(); ++i)
    if (rasters[i].rows() != rows || rasters[i].cols() != cols)
      throw Error("profile: " + images[i].string() + " differs in size from " + images[0].string());
  if (row < 0 || row >= rows) throw Error("profile: row " + std::to_string(row) + " outside [0, " +
                                          std::to_string(rows) + ")");
  if (col_begin < 0 || col_end > cols || col_begin >= col_end)
    throw Error("profile: column range [" + std::to_string(col_begin) + ", " + std::to_string(col_end) +
                ") invalid for width " + std::to_string(cols));
  std::string out = "col";
  for (const auto& p : images) out += "," + p.stem().string();
  out += "\n";
  char cell[40];
  for (int c = col_begin; c < col_end; ++c) {
    out += std::to_string(c);
    for (const auto& r : rasters) {
      std::snprintf(cell, sizeof cell, ",%.9g", r(row, c));
      out += cell;
    }
    out += "\n";
  }
  return out;
}

}  // namespace rising::pipeline
