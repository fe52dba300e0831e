#include "rising/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rising::nn {

static_assert(std::endian::native == std::endian::little, "payload is written in native little-endian order");

namespace {

std::filesystem::path sibling(const std::filesystem::path& path, const char* suffix) {
  return path.string() + suffix;
}

std::vector<std::uint8_t> to_bytes(const std::vector<float>& values) {
  std::vector<std::uint8_t> bytes(values.size() * sizeof(float));
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return bytes;
}

std::vector<float> read_floats(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open");
  std::vector<float> values(expected);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(float) || in.peek() != std::char_traits<char>::eof())
    throw IoError(path, "expected exactly " + std::to_string(expected) + " float32 values");
  return values;
}

nlohmann::json log_to_json(const TrainingLog& log) {
  auto arr = nlohmann::json::array();
  for (const auto& e : log.epochs) arr.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"lr", e.lr}});
  return arr;
}

TrainingLog log_from_json(const nlohmann::json& arr) {
  TrainingLog log;
  for (const auto& e : arr)
    log.epochs.push_back({e.at("epoch").get<int>(), e.at("mean_loss").get<double>(), e.at("lr").get<double>()});
  return log;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto layers = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.convs.size(); ++i) {
    const auto& c = ckpt.params.convs[i];
    const auto count = static_cast<std::size_t>(c.weight.size() + c.bias.size());
    layers.push_back({{"name", ckpt.params.layout.at(i).name},
                      {"weight_shape", {c.weight.rows(), c.weight.cols()}},
                      {"offset", offset},
                      {"count", count}});
    offset += count;
  }
  const auto params_bytes = to_bytes(ckpt.params.flatten());
  write_file_atomic(sibling(path, ".params"), params_bytes);

  nlohmann::json doc = {{"format", "rising-checkpoint"},
                        {"version", 1},
                        {"network", to_json(ckpt.params.spec)},
                        {"training", to_json(ckpt.train_config)},
                        {"init_seed", ckpt.init_seed},
                        {"epoch", ckpt.epoch},
                        {"loss_history", log_to_json(ckpt.log)},
                        {"dtype", "f32"},
                        {"byte_order", "little"},
                        {"parameter_count", offset},
                        {"layers", layers},
                        {"params_file", sibling(path, ".params").filename().string()},
                        {"params_sha256", sha256_hex(params_bytes)},
                        {"provenance", ckpt.provenance}};
  if (ckpt.adam) {
    auto moments = ckpt.adam->m.flatten();
    const auto v = ckpt.adam->v.flatten();
    moments.insert(moments.end(), v.begin(), v.end());
    write_file_atomic(sibling(path, ".adam"), to_bytes(moments));
    doc["adam_file"] = sibling(path, ".adam").filename().string();
    doc["adam_step"] = ckpt.adam->step;
  }
  write_file_atomic(path, doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != "rising-checkpoint") throw IoError(path, "not a checkpoint manifest");
  Checkpoint ckpt;
  try {
    const auto spec = network_spec_from_json(doc.at("network"));
    ckpt.train_config = train_config_from_json(doc.at("training"));
    ckpt.init_seed = doc.at("init_seed").get<std::uint64_t>();
    ckpt.epoch = doc.at("epoch").get<int>();
    ckpt.log = log_from_json(doc.at("loss_history"));
    ckpt.provenance = doc.value("provenance", nlohmann::json::object());

    ckpt.params = NetworkParams<float>::initialize(spec, 0);
    ckpt.params.init_seed = ckpt.init_seed;
    const auto dir = path.parent_path();
    const auto params_path = dir / doc.at("params_file").get<std::string>();
    const auto flat = read_floats(params_path, ckpt.params.size());
    if (doc.contains("params_sha256") && sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(flat.data()),
                                                             flat.size() * sizeof(float))) != doc["params_sha256"])
      throw IoError(params_path, "checksum mismatch");
    ckpt.params.unflatten(flat);
    if (!ckpt.params.all_finite()) throw IoError(params_path, "non-finite parameters");

    if (doc.contains("adam_file")) {
      const auto n = ckpt.params.size();
      const auto moments = read_floats(dir / doc["adam_file"].get<std::string>(), 2 * n);
      AdamState<float> adam = AdamState<float>::zeros_like(ckpt.params);
      adam.m.unflatten({moments.begin(), moments.begin() + static_cast<std::ptrdiff_t>(n)});
      adam.v.unflatten({moments.begin() + static_cast<std::ptrdiff_t>(n), moments.end()});
      adam.step = doc.at("adam_step").get<long>();
      ckpt.adam = std::move(adam);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed checkpoint: ") + e.what());
  }
  return ckpt;
}

}  // namespace rising::nn
