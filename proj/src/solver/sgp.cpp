#include "rising/solver/sgp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rising/metrics/metrics.hpp"
#include "rising/solver/tv.hpp"

namespace rising::solver {
namespace {

using RowRaster = tomo::Raster<double>;

Eigen::Map<const RowRaster> as_raster(const Eigen::VectorXd& v, int n) { return {v.data(), n, n}; }

double scaling_bound(const SolverConfig& cfg, int iteration) {
  const double k = std::max(1, iteration);
  return std::clamp(std::sqrt(1.0 + cfg.scaling_decay / (k * k)), 1.0, cfg.scaling_max);
}

// Dimensionless split-gradient scaling: (x_j / mean x) / (V_j / mean V), so that
// the clamp [1/L, L] acts on relative rather than absolute magnitudes.
Eigen::VectorXd compute_scaling(const SolverConfig& cfg, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                int iteration) {
  const double upper = scaling_bound(cfg, iteration);
  const double lower = std::max(cfg.scaling_min, 1.0 / upper);
  const double mx = x.mean();
  const double mv = v.mean();
  Eigen::VectorXd d(x.size());
  if (!(mx > 0.0) || !(mv > 0.0)) {
    d.setConstant(std::clamp(1.0, lower, upper));
    return d;
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double r = v[j] > 0.0 ? (x[j] / mx) / (v[j] / mv) : upper;
    d[j] = std::clamp(r, lower, upper);
  }
  return d;
}

// Scaled Barzilai–Borwein step. A nonpositive curvature estimate keeps the
// previous step length.
double bb_step(const SolverConfig& cfg, const Eigen::VectorXd& s, const Eigen::VectorXd& z, const Eigen::VectorXd& d,
               bool first_rule, double previous) {
  double alpha = previous;
  if (first_rule) {
    const double den = (s.array() * z.array() / d.array()).sum();
    if (den > 0.0) alpha = (s.array().square() / d.array().square()).sum() / den;
  } else {
    const double num = (s.array() * z.array() * d.array()).sum();
    const double den = (z.array().square() * d.array().square()).sum();
    if (num > 0.0 && den > 0.0) alpha = num / den;
  }
  return std::clamp(alpha, cfg.alpha_min, cfg.alpha_max);
}

void check_finite(double value, int iteration) {
  if (!std::isfinite(value))
    throw Error("sgp: non-finite objective at iteration " + std::to_string(iteration));
}

// One SGP iteration. Returns false if x is already stationary (no descent direction).
bool sgp_iterate(const Problem& problem, SgpState& st, double& alpha_used) {
  const SolverConfig& cfg = problem.config();
  const int next = st.k + 1;

  Eigen::VectorXd y = (st.x - st.alpha * st.scaling.cwiseProduct(st.gradient)).cwiseMax(0.0);
  const Eigen::VectorXd dir = y - st.x;
  const double slope = st.gradient.dot(dir);
  if (!(slope < 0.0)) return false;

  Eigen::VectorXd ay(st.ax.size());
  problem.projector().forward(y, ay);
  const Eigen::VectorXd a_dir = ay - st.ax;
  const double reference = *std::max_element(st.memory.begin(), st.memory.end());

  double step = 1.0;
  Eigen::VectorXd x_new, ax_new;
  double f_new = 0.0;
  bool accepted = false;
  for (int t = 0; t <= cfg.ls_max_backtracks; ++t) {
    x_new = (st.x + step * dir).cwiseMax(0.0);
    ax_new = st.ax + step * a_dir;
    f_new = problem.objective(x_new, ax_new);
    check_finite(f_new, next);
    if (f_new <= reference + cfg.ls_sigma * step * slope) {
      accepted = true;
      break;
    }
    step *= cfg.ls_rho;
  }
  if (!accepted)
    throw Error("sgp: line search exhausted " + std::to_string(cfg.ls_max_backtracks) + " backtracks at iteration " +
                std::to_string(next));

  Eigen::VectorXd g_new, v_new;
  problem.gradient(x_new, ax_new, g_new, &v_new);
  Eigen::VectorXd d_new = compute_scaling(cfg, x_new, v_new, next + 1);
  const Eigen::VectorXd s = x_new - st.x;
  const Eigen::VectorXd z = g_new - st.gradient;
  const bool first_rule = ((next + 1) / std::max(1, cfg.bb_alternation)) % 2 == 0;

  alpha_used = st.alpha;
  st.alpha = bb_step(cfg, s, z, d_new, first_rule, st.alpha);
  const double f_old = st.objective;
  st.k = next;
  st.x = std::move(x_new);
  st.ax = std::move(ax_new);
  st.gradient = std::move(g_new);
  st.scaling = std::move(d_new);
  st.objective = f_new;
  st.memory.push_back(f_new);
  if (static_cast<int>(st.memory.size()) > cfg.ls_memory) st.memory.erase(st.memory.begin());
  if (std::abs(f_new - f_old) <= cfg.stop_tol * std::abs(f_old)) st.converged = true;
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error("SolverConfig: lambda must be >= 0");
  if (!(beta > 0.0)) throw Error("SolverConfig: beta must be > 0");
  if (max_iters < 1) throw Error("SolverConfig: max_iters must be >= 1");
  if (!(stop_tol >= 0.0)) throw Error("SolverConfig: stop_tol must be >= 0");
  if (!(alpha_min > 0.0 && alpha_min < alpha_max)) throw Error("SolverConfig: need 0 < alpha_min < alpha_max");
  if (!(scaling_min > 0.0 && scaling_min < scaling_max && scaling_max * scaling_min <= 1.0 + 1e-12))
    throw Error("SolverConfig: need 0 < scaling_min < scaling_max <= 1/scaling_min");
  if (!(scaling_decay >= 0.0)) throw Error("SolverConfig: scaling_decay must be >= 0");
  if (!(ls_sigma > 0.0 && ls_sigma < 1.0)) throw Error("SolverConfig: ls_sigma must lie in (0, 1)");
  if (!(ls_rho > 0.0 && ls_rho < 1.0)) throw Error("SolverConfig: ls_rho must lie in (0, 1)");
  if (ls_memory < 1) throw Error("SolverConfig: ls_memory must be >= 1");
  if (ls_max_backtracks < 1) throw Error("SolverConfig: ls_max_backtracks must be >= 1");
  if (bb_alternation < 1) throw Error("SolverConfig: bb_alternation must be >= 1");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::tolerance: return "tolerance";
    case StopReason::fixed_k: return "fixed_k";
  }
  return "unknown";
}

std::string SolveReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const bool with_rmse = rmse_history.size() == objective_history.size() && !rmse_history.empty();
  os << "iteration,objective,steplength" << (with_rmse ? ",rmse_vs_gt" : "") << '\n';
  const int first = state.k - static_cast<int>(objective_history.size()) + 1;
  for (std::size_t i = 0; i < objective_history.size(); ++i) {
    os << first + static_cast<int>(i) << ',' << objective_history[i] << ',' << steplength_history[i];
    if (with_rmse) os << ',' << rmse_history[i];
    os << '\n';
  }
  return os.str();
}

Problem::Problem(const Projector& projector, const Sinogram& data, const SolverConfig& cfg)
    : projector_(projector), cfg_(cfg), b_(data.flat()), atb_(projector.num_pixels()) {
  cfg_.validate();
  if (!(data.geometry == projector.geometry())) throw Error("Problem: sinogram geometry differs from projector");
  projector_.back(b_, atb_);
}

double Problem::objective(const Eigen::VectorXd& x, const Eigen::VectorXd& ax) const {
  const double fit = (ax - b_).squaredNorm();
  if (cfg_.lambda == 0.0) return fit;
  return fit + cfg_.lambda * tv_beta(as_raster(x, n()), cfg_.beta);
}

double Problem::objective(const Eigen::VectorXd& x) const {
  Eigen::VectorXd ax(projector_.num_measurements());
  projector_.forward(x, ax);
  return objective(x, ax);
}

void Problem::gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& ax, Eigen::VectorXd& grad,
                       Eigen::VectorXd* v_part) const {
  Eigen::VectorXd atax(x.size());
  projector_.back(ax, atax);
  grad = 2.0 * (atax - atb_);
  if (v_part) *v_part = 2.0 * atax;
  if (cfg_.lambda == 0.0) return;
  RowRaster g_tv, v_tv;
  if (v_part) {
    tv_beta_gradient_split(as_raster(x, n()), cfg_.beta, g_tv, &v_tv);
    v_part->noalias() += cfg_.lambda * Eigen::Map<const Eigen::VectorXd>(v_tv.data(), v_tv.size());
  } else {
    tv_beta_gradient_split(as_raster(x, n()), cfg_.beta, g_tv);
  }
  grad.noalias() += cfg_.lambda * Eigen::Map<const Eigen::VectorXd>(g_tv.data(), g_tv.size());
}

double objective(const Image& x, const Sinogram& b, const ScanGeometry& geometry, const SolverConfig& cfg) {
  const Projector projector(x.grid, geometry);
  return Problem(projector, b, cfg).objective(x.flat());
}

Image objective_gradient(const Image& x, const Sinogram& b, const ScanGeometry& geometry, const SolverConfig& cfg) {
  const Projector projector(x.grid, geometry);
  const Problem problem(projector, b, cfg);
  Eigen::VectorXd ax(projector.num_measurements()), g;
  projector.forward(x.flat(), ax);
  problem.gradient(x.flat(), ax, g);
  Image out(x.grid);
  out.flat() = g;
  return out;
}

SgpState sgp_initial_state(const Problem& problem) {
  const SolverConfig& cfg = problem.config();
  SgpState st;
  const Eigen::Index pixels = problem.projector().num_pixels();
  st.x = Eigen::VectorXd::Zero(pixels);
  st.ax = Eigen::VectorXd::Zero(problem.projector().num_measurements());
  st.objective = problem.objective(st.x, st.ax);
  check_finite(st.objective, 0);
  Eigen::VectorXd v;
  problem.gradient(st.x, st.ax, st.gradient, &v);
  st.scaling = compute_scaling(cfg, st.x, v, 1);
  st.memory = {st.objective};

  // First step length: exact minimiser of the data term along the feasible part
  // of the scaled steepest-descent direction.
  Eigen::VectorXd p = st.scaling.cwiseProduct(st.gradient);
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (st.x[j] <= 0.0 && p[j] > 0.0) p[j] = 0.0;
  Eigen::VectorXd ap(st.ax.size());
  problem.projector().forward(p, ap);
  const double num = st.gradient.dot(p);
  const double den = 2.0 * ap.squaredNorm();
  st.alpha = (num > 0.0 && den > 0.0) ? std::clamp(num / den, cfg.alpha_min, cfg.alpha_max) : 1.0;
  return st;
}

SolveReport sgp_resume(const Problem& problem, SgpState state, const SolveMode& mode, const SolveOptions& options) {
  const SolverConfig& cfg = problem.config();
  const bool fixed = std::holds_alternative<FixedK>(mode);
  const int limit = fixed ? std::min(std::get<FixedK>(mode).k, cfg.max_iters) : cfg.max_iters;
  if (fixed && std::get<FixedK>(mode).k < 0) throw Error("sgp: K must be >= 0");

  SolveReport rep;
  const int n = problem.n();
  while (!state.converged && state.k < limit) {
    double alpha_used = 0.0;
    if (!sgp_iterate(problem, state, alpha_used)) {
      state.converged = true;
      break;
    }
    rep.objective_history.push_back(state.objective);
    rep.steplength_history.push_back(alpha_used);
    if (options.ground_truth)
      rep.rmse_history.push_back(metrics::rmse(as_raster(state.x, n), options.ground_truth->values));
    if (options.keep_every > 0 && state.k % options.keep_every == 0)
      rep.iterates_kept.emplace_back(state.k, Image(problem.projector().grid(), as_raster(state.x, n)));
  }
  rep.iterations = static_cast<int>(rep.objective_history.size());
  if (state.converged) {
    rep.stop_reason = StopReason::tolerance;
    rep.k_star = state.k;
  } else if (fixed && state.k >= std::get<FixedK>(mode).k) {
    rep.stop_reason = StopReason::fixed_k;
  } else {
    rep.stop_reason = StopReason::max_iters;
  }
  rep.state = std::move(state);
  return rep;
}

std::pair<Image, SolveReport> sgp_solve(const Problem& problem, const SolveMode& mode, const SolveOptions& options) {
  if (const auto* f = std::get_if<FixedK>(&mode); f && f->k < 1) throw Error("sgp_solve: K must be >= 1");
  SolveReport rep = sgp_resume(problem, sgp_initial_state(problem), mode, options);
  Image x(problem.projector().grid(), as_raster(rep.state.x, problem.n()));
  return {std::move(x), std::move(rep)};
}

std::pair<Image, SolveReport> sgp_solve(const Sinogram& b, const tomo::GridSpec& grid, const SolverConfig& cfg,
                                        const SolveMode& mode, const SolveOptions& options) {
  const Projector projector(grid, b.geometry);
  return sgp_solve(Problem(projector, b, cfg), mode, options);
}

bool compose_iterations_check(const Problem& problem, int k) {
  const SgpState start = sgp_initial_state(problem);
  const SolveReport straight = sgp_resume(problem, start, ToConvergence{});
  const SolveReport head = sgp_resume(problem, start, FixedK{k});
  const SolveReport tail = sgp_resume(problem, head.state, ToConvergence{});

  std::vector<double> joined = head.objective_history;
  joined.insert(joined.end(), tail.objective_history.begin(), tail.objective_history.end());
  std::vector<double> joined_alpha = head.steplength_history;
  joined_alpha.insert(joined_alpha.end(), tail.steplength_history.begin(), tail.steplength_history.end());

  return tail.state.k == straight.state.k && tail.state.x == straight.state.x &&
         joined == straight.objective_history && joined_alpha == straight.steplength_history;
}

bool compose_iterations_check(const Sinogram& b, const tomo::GridSpec& grid, const SolverConfig& cfg, int k) {
  const Projector projector(grid, b.geometry);
  return compose_iterations_check(Problem(projector, b, cfg), k);
}

}  // namespace rising::solver
