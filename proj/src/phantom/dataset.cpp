#include "rising/phantom/dataset.hpp"

#include <cmath>
#include <cstdio>

#include "rising/tomo/raster_io.hpp"

namespace rising::phantom {

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  int train = 0;
  for (const auto& e : entries) {
    list.push_back({{"id", e.id}, {"file", e.file}, {"seed", e.seed}, {"index", e.index},
                    {"split", e.split}, {"sha256", e.sha256}});
    if (e.split == "train") ++train;
  }
  return {{"spec", phantom::to_json(spec)},
          {"train_ratio", train_ratio},
          {"train_count", train},
          {"test_count", static_cast<int>(entries.size()) - train},
          {"entries", list}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& doc) {
  DatasetManifest m;
  try {
    m.spec = phantom_spec_from_json(doc.at("spec"));
    m.train_ratio = doc.at("train_ratio").get<double>();
    for (const auto& e : doc.at("entries")) {
      m.entries.push_back({e.at("id").get<std::string>(), e.at("file").get<std::string>(),
                           e.at("seed").get<std::uint64_t>(), e.value("index", std::uint64_t{0}),
                           e.at("split").get<std::string>(), e.value("sha256", std::string())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("dataset manifest: ") + e.what());
  }
  return m;
}

int train_count_for(int count, double train_ratio) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) throw Error("train_ratio must lie in [0, 1]");
  return static_cast<int>(std::lround(train_ratio * count));
}

DatasetManifest generate_dataset(const PhantomSpec& spec, int count, double train_ratio,
                                 const std::filesystem::path& out_dir) {
  if (count < 1) throw Error("generate_dataset: count must be >= 1");
  spec.validate();
  const int train = train_count_for(count, train_ratio);

  DatasetManifest m;
  m.spec = spec;
  m.train_ratio = train_ratio;
  m.entries.resize(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "x_gt_%04d.imgraw", i);
    const auto path = out_dir / name;
    tomo::write_image(path, generate_phantom(spec, static_cast<std::uint64_t>(i)));
    auto& e = m.entries[static_cast<std::size_t>(i)];
    e.id = std::to_string(i);
    e.file = name;
    e.seed = spec.seed;
    e.index = static_cast<std::uint64_t>(i);
    e.split = i < train ? "train" : "test";
    e.sha256 = sha256_file(path);
  }
  write_file_atomic(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& manifest_path) {
  try {
    return DatasetManifest::from_json(nlohmann::json::parse(read_text_file(manifest_path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(manifest_path, e.what());
  }
}

}  // namespace rising::phantom
