#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gcm/lbfgs.hpp"
#include "gcm/model.hpp"
#include "gcm/objectives.hpp"

namespace gcm {

enum class Algorithm { kGcm, kGcmNoGroup, kSvm, kMiSvm };

const char* to_string(Algorithm algo) noexcept;
// Accepts "gcm", "gcm-nogroup", "svm", "misvm". Throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view name);

struct TrainOptions {
  SolverConfig solver;
  EvalOptions eval;
  int misvm_max_outer_iterations = 50;
};

struct TrainResult {
  LinearModel model;
  SolveTrace trace;          // last (or only) solver run
  double objective = 0.0;    // final value of the trained objective
  int outer_iterations = 1;  // > 1 only for MI-SVM
  std::vector<std::string> warnings;
};

// Minimizes the chosen objective starting from w = 0, b = 0.
TrainResult train_objective(const Dataset& data, const ObjectiveSpec& spec,
                            const SolverConfig& solver = {}, EvalOptions eval = {});

// Group Classification Machine: the grouped objective.
TrainResult train_gcm(const Dataset& data, const Hyperparams& hp,
                      const SolverConfig& solver = {}, EvalOptions eval = {});

// The same penalties without grouping (per-candidate objective).
TrainResult train_gcm_nogroup(const Dataset& data, const Hyperparams& hp,
                              const SolverConfig& solver = {}, EvalOptions eval = {});

// Dispatch by algorithm. For kMiSvm, lambda maps to C = lambda / (1 - lambda)
// and hp.delta / hp.epsilon configure the inner problem.
TrainResult train(Algorithm algo, const Dataset& data, const Hyperparams& hp,
                  const TrainOptions& opts = {});

}  // namespace gcm
