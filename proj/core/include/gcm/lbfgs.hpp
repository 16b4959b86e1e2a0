#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace gcm {

struct SolverConfig {
  int memory_pairs = 10;
  int max_iterations = 1000;
  double grad_inf_tolerance = 1e-6;
  double rel_obj_tolerance = 1e-10;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  double initial_step = 1.0;

  void validate() const;
};

enum class Termination { kGradTolerance, kObjTolerance, kMaxIterations, kLineSearchFailure };

const char* to_string(Termination t) noexcept;

struct SolveTrace {
  int iterations = 0;
  std::vector<double> objective_history;  // includes the starting value
  double final_grad_inf_norm = 0.0;
  Termination termination_reason = Termination::kMaxIterations;
};

struct SolveResult {
  Eigen::VectorXd x;
  double value = 0.0;
  SolveTrace trace;
};

// f(x), writing the (sub)gradient at x into `grad`.
using ValueAndGradient = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Limited-memory BFGS with Armijo backtracking.
//
// The search direction comes from the two-loop recursion over the most recent
// `memory_pairs` curvature pairs (s, y); pairs with <s, y> <= 1e-10 |s| |y|
// are not stored. A step a is accepted when
//   f(x + a p) <= f(x) + c1 a <g, p>,
// shrinking a by `backtrack_factor` otherwise. When backtracking fails the
// memory is dropped and steepest descent is tried once more before giving up
// with kLineSearchFailure. The returned point is always the best one seen, and
// every accepted step strictly decreases f, so objective_history is
// non-increasing.
//
// Throws NumericalError if f is not finite at `start`.
SolveResult minimize(const ValueAndGradient& fg, const Eigen::VectorXd& start,
                     const SolverConfig& cfg = {});

SolveResult minimize(const ObjectiveFn& f, const GradientFn& grad, const Eigen::VectorXd& start,
                     const SolverConfig& cfg = {});

}  // namespace gcm
