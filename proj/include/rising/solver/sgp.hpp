#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rising/tomo/projector.hpp"

namespace rising::solver {

using tomo::Image;
using tomo::Projector;
using tomo::ScanGeometry;
using tomo::Sinogram;

/// Hyperparameters of the TV-regularised least-squares model
///   min_{x ≥ 0} ‖Ax − b‖² + λ TV_β(x)
/// and of the Scaled Gradient Projection iteration that solves it.
struct SolverConfig {
  double lambda = 4e-5;
  double beta = 1e-3;
  int max_iters = 2000;
  double stop_tol = 1e-6;  // |F_k − F_{k−1}| ≤ stop_tol·|F_{k−1}|
  double alpha_min = 1e-10;
  double alpha_max = 1e10;
  // Diagonal scaling clamp: at iteration k the (dimensionless) scaling is kept in
  // [1/L_k, L_k] with L_k = min(scaling_max, √(1 + scaling_decay / k²)),
  // and never below scaling_min.
  double scaling_min = 1e-5;
  double scaling_max = 1e5;
  double scaling_decay = 1e7;
  double ls_sigma = 1e-4;  // sufficient-decrease constant
  double ls_rho = 0.4;     // backtracking factor
  int ls_memory = 1;       // nonmonotone reference window M
  int ls_max_backtracks = 60;
  int bb_alternation = 3;  // iterations per BB1/BB2 switch

  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& doc);

/// Everything needed to continue an SGP run bit-exactly from iteration `k`.
struct SgpState {
  int k = 0;
  Eigen::VectorXd x;         // current iterate (flattened image)
  Eigen::VectorXd ax;        // A·x, carried to avoid recomputation drift
  Eigen::VectorXd gradient;  // ∇F(x)
  Eigen::VectorXd scaling;   // D_k
  double objective = 0.0;
  double alpha = 1.0;             // step length for the next iteration
  std::vector<double> memory;     // last ≤ M objective values, oldest first
  bool converged = false;
};

enum class StopReason { max_iters, tolerance, fixed_k };
std::string to_string(StopReason r);

struct SolveReport {
  std::vector<double> objective_history;   // F(x⁽ᵏ⁾) for k = 1..iterations
  std::vector<double> steplength_history;  // α_k used at iteration k
  std::vector<double> rmse_history;        // vs ground truth, when one was supplied
  std::vector<std::pair<int, Image>> iterates_kept;
  StopReason stop_reason = StopReason::max_iters;
  std::optional<int> k_star;  // iteration at which the tolerance fired
  int iterations = 0;
  SgpState state;             // resumable state after the last iteration

  /// iteration,objective,steplength[,rmse_vs_gt]
  std::string to_csv() const;
};

struct FixedK {
  int k;
};
struct ToConvergence {};
using SolveMode = std::variant<FixedK, ToConvergence>;

struct SolveOptions {
  const Image* ground_truth = nullptr;  // enables rmse_history
  int keep_every = 0;                   // store every n-th iterate (0 = none)
};

/// Reconstruction problem: projector (A), data b, and model weights.
class Problem {
 public:
  Problem(const Projector& projector, const Sinogram& data, const SolverConfig& cfg);

  const Projector& projector() const { return projector_; }
  const SolverConfig& config() const { return cfg_; }
  const Eigen::VectorXd& data() const { return b_; }
  int n() const { return projector_.grid().n; }

  /// ‖Ax − b‖² + λ TV_β(x), given A·x.
  double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& ax) const;
  double objective(const Eigen::VectorXd& x) const;
  /// 2Aᵀ(Ax − b) + λ∇TV_β(x); optionally the nonnegative part V of the split ∇F = V − U.
  void gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& ax, Eigen::VectorXd& grad,
                Eigen::VectorXd* v_part = nullptr) const;

 private:
  const Projector& projector_;
  SolverConfig cfg_;
  Eigen::VectorXd b_;
  Eigen::VectorXd atb_;
};

/// Objective ‖Ax − b‖² + λ TV_β(x).
double objective(const Image& x, const Sinogram& b, const ScanGeometry& geometry, const SolverConfig& cfg);
/// ∇ of the objective above.
Image objective_gradient(const Image& x, const Sinogram& b, const ScanGeometry& geometry, const SolverConfig& cfg);

/// State at x⁽⁰⁾ = 0 (no iterations performed).
SgpState sgp_initial_state(const Problem& problem);

/// Advances `state` according to `mode`. Fixed-K counts absolute iterations, so
/// resuming a K-iteration state with FixedK{K2} performs K2 − K more.
SolveReport sgp_resume(const Problem& problem, SgpState state, const SolveMode& mode,
                       const SolveOptions& options = {});

/// Runs SGP from x⁽⁰⁾ = 0.
std::pair<Image, SolveReport> sgp_solve(const Sinogram& b, const tomo::GridSpec& grid, const SolverConfig& cfg,
                                        const SolveMode& mode, const SolveOptions& options = {});
std::pair<Image, SolveReport> sgp_solve(const Problem& problem, const SolveMode& mode,
                                        const SolveOptions& options = {});

/// Checks the split f_K ∘ g_K = (full run): K iterations from zero, resumed to
/// convergence, must reproduce an uninterrupted run bit-for-bit.
bool compose_iterations_check(const Sinogram& b, const tomo::GridSpec& grid, const SolverConfig& cfg, int k);
bool compose_iterations_check(const Problem& problem, int k);

}  // namespace rising::solver
