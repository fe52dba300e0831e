#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rising/phantom/phantom.hpp"

namespace rising::phantom {

struct DatasetEntry {
  std::string id;
  std::string file;  // relative to the dataset directory
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::string split;  // "train" | "test"
  std::string sha256;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

/// Contents of `manifest.json` in a phantom dataset directory:
/// {spec, train_ratio, train_count, test_count, entries: [{id, file, seed, index, split, sha256}]}.
struct DatasetManifest {
  PhantomSpec spec;
  double train_ratio = 1.0;
  std::vector<DatasetEntry> entries;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& doc);
};

/// Number of training images for `count` images at `train_ratio`, rounded to nearest.
int train_count_for(int count, double train_ratio);

/// Writes `count` phantoms as `x_gt_NNNN.imgraw` (+ header) and `manifest.json`
/// into `out_dir`. The first train_count_for(count, ratio) indices form the train split.
DatasetManifest generate_dataset(const PhantomSpec& spec, int count, double train_ratio,
                                 const std::filesystem::path& out_dir);

DatasetManifest load_dataset_manifest(const std::filesystem::path& manifest_path);

}  // namespace rising::phantom
