#include <doctest.h>

#include <Eigen/Dense>

#include "rising/solver/sgp.hpp"
#include "rising/solver/tv.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace rising;
using namespace rising::solver;
using tomo::BeamMode;
using tomo::GridSpec;

namespace {

struct Instance {
  GridSpec grid;
  tomo::Projector projector;
  tomo::Image truth;
  tomo::Sinogram data;
};

Instance make_instance(int n, int views, double noise, std::uint64_t seed) {
  GridSpec g{n, 1.0};
  tomo::Projector p(g, tomo::default_geometry(g, BeamMode::fan, tomo::even_angles(360, views)));
  auto x = test_support::random_image(g, seed);
  auto b = tomo::simulate_sinogram(p, x, noise, seed + 1);
  return {g, std::move(p), std::move(x), std::move(b)};
}

}  // namespace

TEST_CASE("smoothed TV matches an independent evaluation and special values") {
  const auto x = test_support::random_raster(9, 7, 3);
  CHECK(tv_beta(x, 1e-3) == doctest::Approx(oracle::tv(x, 1e-3)).epsilon(1e-13));
  tomo::Raster<double> constant = tomo::Raster<double>::Constant(5, 5, 0.3);
  CHECK(tv_beta(constant, 0.01) == doctest::Approx(25 * 0.01));
  CHECK_THROWS_AS(tv_beta(constant, 0.0), Error);
}

TEST_CASE("TV gradient matches central differences and splits into nonnegative parts") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto x = test_support::random_raster(8, 8, 10 + s);
    const double beta = 0.05;
    const auto fd = oracle::central_difference(x, [&](const tomo::Raster<double>& y) { return oracle::tv(y, beta); }, 1e-6);
    tomo::Raster<double> g, v, u;
    tv_beta_gradient_split(x, beta, g, &v, &u);
    CHECK((g - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-7);
    CHECK((g - (v - u)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(v.minCoeff() >= 0.0);
    CHECK(u.minCoeff() >= 0.0);
  }
}

TEST_CASE("objective gradient matches central differences") {
  const auto inst = make_instance(10, 12, 0.01, 4);
  SolverConfig cfg;
  cfg.lambda = 0.05;
  cfg.beta = 0.05;
  const auto x = test_support::random_image(inst.grid, 99);
  const auto g = objective_gradient(x, inst.data, inst.projector.geometry(), cfg);
  const auto fd = oracle::central_difference(
      x.values, [&](const tomo::Raster<double>& y) { return objective({inst.grid, y}, inst.data, inst.projector.geometry(), cfg); },
      1e-5);
  CHECK((g.values - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solver config validation and JSON round-trip") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.ls_memory = 4;
  cfg.lambda = 1e-3;
  CHECK(solver_config_from_json(to_json(cfg)) == cfg);
  cfg.ls_rho = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.lambda = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("SGP iterates stay nonnegative and the objective decreases monotonically") {
  const auto inst = make_instance(16, 20, 0.01, 7);
  solver::Problem problem(inst.projector, inst.data, SolverConfig{});
  const auto [x, rep] = sgp_solve(problem, FixedK{40});
  CHECK(x.values.minCoeff() >= 0.0);
  CHECK(rep.iterations == 40);
  CHECK(rep.stop_reason == StopReason::fixed_k);
  for (std::size_t i = 1; i < rep.objective_history.size(); ++i)
    CHECK(rep.objective_history[i] <= rep.objective_history[i - 1]);
  CHECK(rep.objective_history.back() < problem.objective(Eigen::VectorXd::Zero(problem.n() * problem.n())));
}

TEST_CASE("unconstrained least squares oracle: lambda = 0 converges to the dense solution") {
  const auto inst = make_instance(8, 90, 0.0, 21);
  SolverConfig cfg;
  cfg.lambda = 0.0;
  cfg.stop_tol = 1e-14;
  cfg.max_iters = 20000;
  const auto& p = inst.projector;
  Eigen::MatrixXd dense(p.num_measurements(), p.num_pixels());
  for (Eigen::Index j = 0; j < p.num_pixels(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(p.num_pixels(), j), col(p.num_measurements());
    p.forward(e, col);
    dense.col(j) = col;
  }
  const Eigen::VectorXd ls = dense.colPivHouseholderQr().solve(inst.data.flat());
  const auto [x, rep] = sgp_solve(inst.data, inst.grid, cfg, ToConvergence{});
  CHECK(std::sqrt((x.flat() - ls).squaredNorm() / ls.size()) <= 1e-4);
}

TEST_CASE("resuming after K iterations reproduces an uninterrupted run bit-for-bit") {
  const auto inst = make_instance(16, 20, 0.01, 31);
  SolverConfig cfg;
  cfg.max_iters = 150;
  solver::Problem problem(inst.projector, inst.data, cfg);
  CHECK(compose_iterations_check(problem, 3));
  CHECK(compose_iterations_check(problem, 10));

  const auto [full_x, full] = sgp_solve(problem, ToConvergence{});
  const auto [k_x, head] = sgp_solve(problem, FixedK{10});
  REQUIRE(head.objective_history.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(head.objective_history[i] == full.objective_history[i]);
}

TEST_CASE("fixed K beyond convergence returns the converged image") {
  const auto inst = make_instance(8, 30, 0.0, 41);
  SolverConfig cfg;
  cfg.stop_tol = 1e-4;
  solver::Problem problem(inst.projector, inst.data, cfg);
  const auto [x_is, conv] = sgp_solve(problem, ToConvergence{});
  REQUIRE(conv.k_star);
  const auto [x_k, fixed] = sgp_solve(problem, FixedK{*conv.k_star + 50});
  CHECK(x_k.values == x_is.values);
  CHECK(fixed.stop_reason == StopReason::tolerance);
  CHECK_THROWS_AS(sgp_solve(problem, FixedK{0}), Error);
}

TEST_CASE("solve report CSV lists one row per iteration") {
  const auto inst = make_instance(8, 12, 0.01, 51);
  solver::Problem problem(inst.projector, inst.data, SolverConfig{});
  const auto [x, rep] = sgp_solve(problem, FixedK{5}, {&inst.truth, 2});
  const auto csv = rep.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.rfind("iteration,objective,steplength,rmse_vs_gt", 0) == 0);
  CHECK(rep.rmse_history.size() == 5);
  CHECK(rep.iterates_kept.size() == 2);
}
