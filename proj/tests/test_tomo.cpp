#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rising/tomo/projector.hpp"
#include "rising/tomo/raster_io.hpp"
#include "rising/tomo/siddon.hpp"
#include "support.hpp"

using namespace rising;
using namespace rising::tomo;

namespace {

// Independent oracle: midpoint-rule sampling of the ray with a very fine step,
// crediting each sample's step length to the pixel that contains it.
Raster<double> sampled_weights(const GridSpec& grid, const Point2& src, const Point2& dst, int samples) {
  Raster<double> w = Raster<double>::Zero(grid.n, grid.n);
  const double len = (dst - src).norm();
  const double h = len / samples;
  for (int i = 0; i < samples; ++i) {
    const Point2 p = src + (dst - src) * ((i + 0.5) / samples);
    const double cx = p.x() / grid.pixel_size + grid.n / 2.0;
    const double cy = grid.n / 2.0 - p.y() / grid.pixel_size;
    if (cx < 0 || cy < 0 || cx >= grid.n || cy >= grid.n) continue;
    w(static_cast<int>(cy), static_cast<int>(cx)) += h;
  }
  return w;
}

Raster<double> siddon_weights(const GridSpec& grid, const Point2& src, const Point2& dst) {
  std::vector<RaySegment> segs;
  trace_segments(grid, src, dst, segs);
  Raster<double> w = Raster<double>::Zero(grid.n, grid.n);
  for (const auto& s : segs) w.data()[s.pixel] += s.length;
  return w;
}

}  // namespace

TEST_CASE("pixel centres follow the top-row-first convention") {
  const GridSpec g{4, 2.0};
  CHECK(g.pixel_center(0, 0).x() == doctest::Approx(-3.0));
  CHECK(g.pixel_center(0, 0).y() == doctest::Approx(3.0));
  CHECK(g.pixel_center(3, 3).x() == doctest::Approx(3.0));
  CHECK(g.pixel_center(3, 3).y() == doctest::Approx(-3.0));
}

TEST_CASE("horizontal ray through a pixel row credits one pixel size per pixel") {
  const GridSpec g{8, 0.5};
  const double y = g.pixel_center(2, 0).y();
  const auto w = siddon_weights(g, {-10, y}, {10, y});
  for (int c = 0; c < 8; ++c) CHECK(w(2, c) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.sum() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("main diagonal ray credits sqrt(2) pixel sizes to diagonal pixels") {
  const GridSpec g{6, 1.0};
  const auto w = siddon_weights(g, {-5, -5}, {5, 5});
  for (int i = 0; i < 6; ++i) CHECK(w(5 - i, i) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(w.sum() == doctest::Approx(6 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("siddon weights agree with fine sampling for oblique rays") {
  const GridSpec g{10, 1.0};
  RandomStream rng(11);
  for (int t = 0; t < 10; ++t) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    const double off = rng.uniform(-4, 4);
    const Point2 dir(std::cos(a), std::sin(a)), nrm(-std::sin(a), std::cos(a));
    const Point2 src = off * nrm - 20 * dir, dst = off * nrm + 20 * dir;
    const auto exact = siddon_weights(g, src, dst);
    const auto approx = sampled_weights(g, src, dst, 400000);
    CHECK((exact - approx).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("ray missing the grid produces no segments; degenerate ray throws") {
  const GridSpec g{4, 1.0};
  std::vector<RaySegment> segs;
  trace_segments(g, {-10, 5}, {10, 5}, segs);
  CHECK(segs.empty());
  CHECK_THROWS_AS(trace_segments(g, {1, 1}, {1, 1}, segs), Error);
}

TEST_CASE("default fan geometry detector span covers the grid's circumscribed circle") {
  const GridSpec g{32, 1.0};
  const auto geo = default_geometry(g, BeamMode::fan, even_angles(360, 40));
  CHECK(geo.num_detectors == 64);
  CHECK(geo.source_to_center == doctest::Approx(64));
  CHECK(geo.source_to_detector == doctest::Approx(128));
  const double r = g.half_extent() * std::sqrt(2.0);
  const double half_span = geo.detector_spacing * geo.num_detectors / 2;
  CHECK(half_span == doctest::Approx(geo.source_to_detector * std::tan(std::asin(r / geo.source_to_center))));
}

TEST_CASE("even angles and geometry validation") {
  const auto a = even_angles(180, 60);
  CHECK(a.size() == 60);
  CHECK(a.front() == 0.0);
  CHECK(a[1] == doctest::Approx(3.0));
  auto geo = default_geometry({8, 1.0}, BeamMode::fan, {0.0, 10.0});
  geo.angles_deg = {10.0, 5.0};
  CHECK_THROWS_AS(geo.validate(), Error);
  geo.angles_deg = {0.0, 360.0};
  CHECK_THROWS_AS(geo.validate(), Error);
}

TEST_CASE("projector is the exact transpose pair (adjoint identity)") {
  for (auto mode : {BeamMode::fan, BeamMode::parallel}) {
    const GridSpec g{16, 0.7};
    const Projector p(g, default_geometry(g, mode, even_angles(360, 24)));
    for (int t = 0; t < 5; ++t) {
      const auto x = test_support::random_image(g, 100 + t);
      Sinogram y(p.geometry());
      y.values = test_support::random_raster(y.values.rows(), y.values.cols(), 200 + t, -1, 1);
      const auto ax = p.forward(x);
      const auto aty = p.back(y);
      const double lhs = ax.flat().dot(y.flat()), rhs = x.flat().dot(aty.flat());
      CHECK(std::abs(lhs - rhs) <= 1e-12 * ax.flat().norm() * y.flat().norm());
    }
  }
}

TEST_CASE("projector rows equal individually traced rays") {
  const GridSpec g{12, 1.0};
  const auto geo = default_geometry(g, BeamMode::fan, even_angles(360, 7));
  const Projector p(g, geo);
  const auto x = test_support::random_image(g, 5);
  const auto ax = p.forward(x);
  for (int v = 0; v < geo.num_views(); v += 3)
    for (int d = 0; d < geo.num_detectors; d += 5) {
      const auto [s, e] = geo.ray(v, d, 2 * g.extent() + 1);
      CHECK(ax.values(v, d) == doctest::Approx(trace_ray(g, s, e, x)).epsilon(1e-12));
    }
}

TEST_CASE("parallel projection of a unit image gives chord lengths through the square") {
  const GridSpec g{20, 1.0};
  const auto geo = default_geometry(g, BeamMode::parallel, {0.0});
  const Projector p(g, geo);
  Image ones(g);
  ones.values.setOnes();
  const auto ax = p.forward(ones);
  // At θ = 0 rays are horizontal; every ray within |t| < 10 crosses 20 units.
  for (int d = 0; d < geo.num_detectors; ++d) {
    const double t = (d - (geo.num_detectors - 1) / 2.0) * geo.detector_spacing;
    if (std::abs(t) < 9.99) CHECK(ax.values(0, d) == doctest::Approx(20.0).epsilon(1e-12));
    if (std::abs(t) > 10.01) CHECK(ax.values(0, d) == 0.0);
  }
}

TEST_CASE("simulated noise has exactly the requested relative norm") {
  const GridSpec g{16, 1.0};
  const Projector p(g, default_geometry(g, BeamMode::fan, even_angles(360, 20)));
  const auto x = test_support::random_image(g, 9);
  const auto clean = p.forward(x);
  CHECK(simulate_sinogram(p, x, 0.0, 1).values == clean.values);
  const auto noisy = simulate_sinogram(p, x, 0.01, 1);
  CHECK((noisy.flat() - clean.flat()).norm() / clean.flat().norm() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(simulate_sinogram(p, x, 0.01, 1).values == noisy.values);
  CHECK(simulate_sinogram(p, x, 0.01, 2).values != noisy.values);
  CHECK_THROWS_AS(simulate_sinogram(p, x, -0.1, 1), Error);
}

TEST_CASE("raster files round-trip through float32 and reject bad payloads") {
  test_support::TempDir dir("raster");
  const auto r = test_support::random_raster(5, 7, 1);
  write_raster(dir.path() / "a.imgraw", r);
  const auto back = read_raster(dir.path() / "a.imgraw");
  CHECK(back.rows() == 5);
  CHECK(back.cols() == 7);
  CHECK((back - r.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);
  const auto header = nlohmann::json::parse(read_text_file(header_path(dir.path() / "a.imgraw")));
  CHECK(header["width"] == 7);
  CHECK(header["dtype"] == "f32");

  write_file_atomic(dir.path() / "a.imgraw", std::string_view("short"));
  CHECK_THROWS_AS(read_raster(dir.path() / "a.imgraw"), IoError);

  Raster<double> bad = r;
  bad(1, 1) = std::nan("");
  write_raster(dir.path() / "b.imgraw", bad);
  CHECK_THROWS_AS(read_raster(dir.path() / "b.imgraw"), IoError);
}

TEST_CASE("sinogram reader checks dimensions against the geometry") {
  test_support::TempDir dir("sino");
  const GridSpec g{8, 1.0};
  const auto geo = default_geometry(g, BeamMode::fan, even_angles(360, 10));
  Sinogram s(geo);
  write_sinogram(dir.path() / "s.sinraw", s);
  CHECK_NOTHROW(read_sinogram(dir.path() / "s.sinraw", geo));
  const auto other = default_geometry(g, BeamMode::fan, even_angles(360, 11));
  CHECK_THROWS_AS(read_sinogram(dir.path() / "s.sinraw", other), Error);
}

TEST_CASE("geometry JSON round-trips, including the compact angle form") {
  const GridSpec g{16, 1.0};
  const auto geo = default_geometry(g, BeamMode::fan, even_angles(180, 60));
  CHECK(geometry_from_json(geometry_to_json(geo), g) == geo);
  const auto compact = geometry_from_json(
      {{"mode", "fan-beam"}, {"angles_deg", {{"start_deg", 0}, {"count", 60}, {"step_deg", 3}}}}, g);
  CHECK(compact.num_views() == 60);
  CHECK(compact.angles_deg[59] == doctest::Approx(177.0));
  CHECK(compact.num_detectors == geo.num_detectors);
}
