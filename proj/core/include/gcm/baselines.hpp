#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "gcm/lbfgs.hpp"
#include "gcm/model.hpp"
#include "gcm/objectives.hpp"

namespace gcm {

// Huber width used by the SVM-style baselines. Weights of a trained linear
// classifier stay well inside |w| <= 10 on standardized features, so the
// penalty is the scaled squared norm w^2 / 20 there.
inline constexpr double kSvmEpsilon = 10.0;

// Hyperparameters of the normalized hinge-loss SVM: exact hinge (delta = 0)
// and squared-norm behaviour of the weight penalty.
inline Hyperparams svm_hyperparams(double lambda) { return {lambda, kSvmEpsilon, 0.0}; }

// Normalized SVM on every candidate independently (no grouping): the
// per-candidate objective with the given hyperparameters.
LinearModel train_svm_baseline(const Dataset& data, const Hyperparams& hp,
                               const SolverConfig& cfg = {}, EvalOptions eval = {});

struct MiSvmConfig {
  double c_tradeoff = 1.0;  // C; the inner objective uses lambda = C / (1 + C)
  double inner_delta = 0.0;
  double epsilon = kSvmEpsilon;
  int max_outer_iterations = 50;
  SolverConfig inner_solver;

  void validate() const;
  double lambda() const noexcept { return c_tradeoff / (1.0 + c_tradeoff); }
  Hyperparams hyperparams() const noexcept { return {lambda(), epsilon, inner_delta}; }
};

// Row chosen to represent each positive group.
struct SelectorState {
  std::map<std::uint64_t, std::size_t> selected_row_per_positive_group;

  bool operator==(const SelectorState&) const = default;
};

struct MiSvmResult {
  LinearModel model;
  SelectorState selector;  // argmax-margin rows under `model`
  int outer_iterations = 0;
  bool converged = false;  // selector reached a fixed point
  SolveTrace last_trace;
};

// Called after every outer iteration with the model just trained and the
// selector derived from it.
using MiSvmObserver =
    std::function<void(int outer_iteration, const LinearModel&, const SelectorState&)>;

// MI-SVM alternating heuristic. Key flags are ignored. The first inner
// problem represents each positive group by the mean of its rows; later ones
// by the row with the largest soft margin under the previous model. Negative
// rows always enter individually. Stops when the selector repeats or after
// max_outer_iterations inner solves.
MiSvmResult train_mi_svm(const Dataset& data, const MiSvmConfig& cfg, EvalOptions eval = {},
                         const MiSvmObserver& observer = {});

// Row of maximal soft margin per positive group (first one on ties).
SelectorState select_max_margin(const LinearModel& model, const Dataset& data);

// Selector pointing at the annotated key rows.
SelectorState key_selector(const Dataset& data);

// The MI-SVM inner objective for a fixed selector: per-candidate objective
// over the selected positive rows and every negative row.
ObjectiveValue mi_svm_objective(const LinearModel& model, const Dataset& data,
                                const SelectorState& selector, const Hyperparams& hp);

}  // namespace gcm
