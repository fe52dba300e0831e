#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "rising/random.hpp"
#include "rising/tomo/geometry.hpp"

namespace test_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("rising_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline rising::tomo::Raster<double> random_raster(int rows, int cols, std::uint64_t seed, double lo = 0.0,
                                                  double hi = 1.0) {
  rising::RandomStream rng(seed);
  rising::tomo::Raster<double> r(rows, cols);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.uniform(lo, hi);
  return r;
}

inline rising::tomo::Image random_image(const rising::tomo::GridSpec& grid, std::uint64_t seed) {
  return {grid, random_raster(grid.n, grid.n, seed)};
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace test_support

