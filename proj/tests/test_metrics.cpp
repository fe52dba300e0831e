#include <doctest.h>

#include <cmath>

#include "rising/metrics/report.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace rising;
using namespace rising::metrics;
using tomo::Raster;


TEST_CASE("relative error is the squared-norm ratio") {
  const auto g = test_support::random_raster(16, 16, 1);
  CHECK(relative_error(g, g) == 0.0);
  CHECK(relative_error(Raster<double>(2 * g), g) == doctest::Approx(1.0).epsilon(1e-15));
  const auto x = test_support::random_raster(16, 16, 2);
  CHECK(std::abs(relative_error(x, g) - oracle::relative_error(x, g)) <= 1e-12 * oracle::relative_error(x, g));
  CHECK_THROWS_AS(relative_error(x, Raster<double>(Raster<double>::Zero(16, 16))), Error);
}

TEST_CASE("rmse matches the direct sum and constant offsets") {
  const auto x = test_support::random_raster(12, 12, 3), y = test_support::random_raster(12, 12, 4);
  CHECK(rmse(x, x) == 0.0);
  CHECK(rmse(x, Raster<double>(x.array() + 0.25)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(rmse(x, y) - oracle::rmse(x, y)) <= 1e-12);
  const auto z = test_support::random_raster(12, 12, 5);
  CHECK(rmse(x, z) <= rmse(x, y) + rmse(y, z));
}

TEST_CASE("ssim: identity, symmetry, bound and agreement with a direct windowed implementation") {
  const auto x = test_support::random_raster(24, 24, 6);
  const auto y = test_support::random_raster(24, 24, 7);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(ssim(x, y) - ssim(y, x)) <= 1e-12);
  CHECK(ssim(x, y) <= 1.0);
  CHECK(std::abs(ssim(x, y) - oracle::ssim(x, y)) <= 1e-9);

  // Constant image vs. constant-plus-noise.
  const Raster<double> flat = Raster<double>::Constant(32, 32, 0.4);
  const Raster<double> noisy = flat + 0.05 * test_support::random_raster(32, 32, 8, -1, 1);
  CHECK(std::abs(ssim(flat, noisy) - oracle::ssim(flat, noisy)) <= 1e-9);
  CHECK(ssim(flat, noisy) < 1.0);
}

TEST_CASE("report aggregates equal a recomputation from the records") {
  MetricsReport rep;
  const double values[] = {0.1, 0.3, 0.2, 0.6};
  for (int i = 0; i < 4; ++i) rep.add({"img" + std::to_string(i), "x_RIS", values[i], 2 * values[i], 1 - values[i], std::nullopt});
  rep.add({"img0", "x_IS", 0.0, 0.0, 1.0, 0.0});
  const auto s = rep.aggregate("x_RIS", "re");
  const double mean = (0.1 + 0.3 + 0.2 + 0.6) / 4;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(s.std == doctest::Approx(std::sqrt(var / 4)).epsilon(1e-15));
  CHECK(s.count == 4);
  CHECK(rep.aggregate("x_RIS", "rmse_vs_is").count == 0);
  CHECK(rep.roles() == std::vector<std::string>{"x_RIS", "x_IS"});
  CHECK_THROWS_AS(rep.aggregate("x_RIS", "psnr"), Error);
}

TEST_CASE("report CSV round-trips exactly and the table lists every metric and role") {
  MetricsReport rep;
  rep.add({"a", "x_RIS", 0.123456789012345, 0.2, 0.7, 0.05});
  rep.add({"a", "x_ING", 0.01, 0.02, 0.95, std::nullopt});
  const auto back = MetricsReport::from_csv(rep.to_csv());
  REQUIRE(back.records().size() == 2);
  CHECK(back.records()[0].re == rep.records()[0].re);
  CHECK(back.records()[0].rmse_vs_is == 0.05);
  CHECK_FALSE(back.records()[1].rmse_vs_is.has_value());
  const auto table = format_table({{"K=10", rep}, {"K=3", back}});
  CHECK(table.find("RE") != std::string::npos);
  CHECK(table.find("SSIM") != std::string::npos);
  CHECK(table.find("x_ING") != std::string::npos);
  CHECK(table.find("K=3") != std::string::npos);
}
