#include "gcm/training.hpp"

#include <string>

#include "gcm/baselines.hpp"
#include "gcm/error.hpp"

namespace gcm {

const char* to_string(Algorithm algo) noexcept {
  switch (algo) {
    case Algorithm::kGcm: return "gcm";
    case Algorithm::kGcmNoGroup: return "gcm-nogroup";
    case Algorithm::kSvm: return "svm";
    case Algorithm::kMiSvm: return "misvm";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "gcm") return Algorithm::kGcm;
  if (name == "gcm-nogroup") return Algorithm::kGcmNoGroup;
  if (name == "svm") return Algorithm::kSvm;
  if (name == "misvm") return Algorithm::kMiSvm;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

TrainResult train_objective(const Dataset& data, const ObjectiveSpec& spec,
                            const SolverConfig& solver, EvalOptions eval) {
  spec.hyperparams.validate();
  TrainResult result;
  if (spec.hyperparams.lambda == 1.0) {
    result.warnings.push_back(
        "lambda = 1 removes the weight penalty; on separable data the minimum may not be "
        "attained and the run is bounded only by max_iterations");
  }

  GradientVector grad;
  auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const ObjectiveValue v = evaluate(LinearModel::unpack(x), data, spec, &grad, eval);
    g = grad.pack();
    return v.total;
  };
  SolveResult sol = minimize(fg, LinearModel(data.dim()).pack(), solver);
  result.model = LinearModel::unpack(sol.x);
  if (!result.model.finite()) throw NumericalError("training produced non-finite weights");
  result.trace = std::move(sol.trace);
  result.objective = sol.value;
  return result;
}

TrainResult train_gcm(const Dataset& data, const Hyperparams& hp, const SolverConfig& solver,
                      EvalOptions eval) {
  return train_objective(data, {hp, Aggregation::kGrouped}, solver, eval);
}

TrainResult train_gcm_nogroup(const Dataset& data, const Hyperparams& hp,
                              const SolverConfig& solver, EvalOptions eval) {
  return train_objective(data, {hp, Aggregation::kPerCandidate}, solver, eval);
}

TrainResult train(Algorithm algo, const Dataset& data, const Hyperparams& hp,
                  const TrainOptions& opts) {
  switch (algo) {
    case Algorithm::kGcm: return train_gcm(data, hp, opts.solver, opts.eval);
    case Algorithm::kGcmNoGroup: return train_gcm_nogroup(data, hp, opts.solver, opts.eval);
    case Algorithm::kSvm: return train_objective(data, {hp, Aggregation::kPerCandidate}, opts.solver, opts.eval);
    case Algorithm::kMiSvm: {
      hp.validate();
      if (hp.lambda >= 1.0) throw ConfigError("MI-SVM needs lambda < 1 (C = lambda / (1 - lambda))");
      MiSvmConfig cfg;
      cfg.c_tradeoff = hp.lambda / (1.0 - hp.lambda);
      cfg.inner_delta = hp.delta;
      cfg.epsilon = hp.epsilon;
      cfg.max_outer_iterations = opts.misvm_max_outer_iterations;
      cfg.inner_solver = opts.solver;
      MiSvmResult mi = train_mi_svm(data, cfg, opts.eval);
      TrainResult result;
      result.model = std::move(mi.model);
      result.trace = std::move(mi.last_trace);
      result.objective = mi_svm_objective(result.model, data, mi.selector, cfg.hyperparams()).total;
      result.outer_iterations = mi.outer_iterations;
      if (!mi.converged) {
        result.warnings.push_back("MI-SVM selector did not reach a fixed point within " +
                                  std::to_string(cfg.max_outer_iterations) + " outer iterations");
      }
      return result;
    }
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace gcm
