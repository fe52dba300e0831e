#include "rising/solver/sgp.hpp"

namespace rising::solver {

nlohmann::json to_json(const SolverConfig& c) {
  return {{"lambda", c.lambda},
          {"beta", c.beta},
          {"max_iters", c.max_iters},
          {"stop_tol", c.stop_tol},
          {"alpha_bounds", {c.alpha_min, c.alpha_max}},
          {"scaling_bounds", {c.scaling_min, c.scaling_max}},
          {"scaling_decay", c.scaling_decay},
          {"linesearch", {{"sigma", c.ls_sigma}, {"rho", c.ls_rho}, {"memory", c.ls_memory},
                          {"max_backtracks", c.ls_max_backtracks}}},
          {"bb_alternation", c.bb_alternation}};
}

SolverConfig solver_config_from_json(const nlohmann::json& doc) {
  SolverConfig c;
  try {
    c.lambda = doc.value("lambda", c.lambda);
    c.beta = doc.value("beta", c.beta);
    c.max_iters = doc.value("max_iters", c.max_iters);
    c.stop_tol = doc.value("stop_tol", c.stop_tol);
    if (doc.contains("alpha_bounds")) {
      c.alpha_min = doc["alpha_bounds"].at(0).get<double>();
      c.alpha_max = doc["alpha_bounds"].at(1).get<double>();
    }
    if (doc.contains("scaling_bounds")) {
      c.scaling_min = doc["scaling_bounds"].at(0).get<double>();
      c.scaling_max = doc["scaling_bounds"].at(1).get<double>();
    }
    c.scaling_decay = doc.value("scaling_decay", c.scaling_decay);
    if (doc.contains("linesearch")) {
      const auto& ls = doc["linesearch"];
      c.ls_sigma = ls.value("sigma", c.ls_sigma);
      c.ls_rho = ls.value("rho", c.ls_rho);
      c.ls_memory = ls.value("memory", c.ls_memory);
      c.ls_max_backtracks = ls.value("max_backtracks", c.ls_max_backtracks);
    }
    c.bb_alternation = doc.value("bb_alternation", c.bb_alternation);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("SolverConfig JSON: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace rising::solver
