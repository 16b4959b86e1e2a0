#include "gcm/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gcm/error.hpp"

namespace gcm {

void SolverConfig::validate() const {
  if (memory_pairs < 1) throw DomainError("memory_pairs must be >= 1");
  if (max_iterations < 0) throw DomainError("max_iterations must be >= 0");
  if (!(grad_inf_tolerance >= 0.0)) throw DomainError("grad_inf_tolerance must be >= 0");
  if (!(rel_obj_tolerance >= 0.0)) throw DomainError("rel_obj_tolerance must be >= 0");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw DomainError("armijo_c1 must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw DomainError("backtrack_factor must lie in (0, 1)");
  }
  if (max_backtracks < 1) throw DomainError("max_backtracks must be >= 1");
  if (!(initial_step > 0.0)) throw DomainError("initial_step must be > 0");
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::kGradTolerance: return "GradTolerance";
    case Termination::kObjTolerance: return "ObjTolerance";
    case Termination::kMaxIterations: return "MaxIterations";
    case Termination::kLineSearchFailure: return "LineSearchFailure";
  }
  return "Unknown";
}

namespace {

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion: returns -H g.
Eigen::VectorXd direction(const std::deque<CurvaturePair>& memory, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  if (!memory.empty()) {
    const CurvaturePair& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return -q;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

SolveResult minimize(const ValueAndGradient& fg, const Eigen::VectorXd& start,
                     const SolverConfig& cfg) {
  cfg.validate();
  SolveResult result;
  Eigen::VectorXd x = start;
  Eigen::VectorXd g(x.size());
  double f = fg(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw NumericalError("objective or gradient is not finite at the starting point");
  }

  SolveTrace& trace = result.trace;
  trace.objective_history.push_back(f);
  std::deque<CurvaturePair> memory;
  Eigen::VectorXd x_new(x.size());
  Eigen::VectorXd g_new(x.size());
  trace.termination_reason = Termination::kMaxIterations;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (inf_norm(g) <= cfg.grad_inf_tolerance) {
      trace.termination_reason = Termination::kGradTolerance;
      break;
    }

    bool accepted = false;
    double f_new = f;
    // Second attempt (if any) uses steepest descent with fresh memory.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        if (memory.empty()) break;
        memory.clear();
      }
      Eigen::VectorXd p = direction(memory, g);
      double slope = g.dot(p);
      if (!(slope < 0.0)) {
        memory.clear();
        p = -g;
        slope = -g.squaredNorm();
      }
      double step = cfg.initial_step;
      if (memory.empty()) step *= std::min(1.0, 1.0 / g.norm());

      for (int k = 0; k < cfg.max_backtracks; ++k) {
        x_new = x + step * p;
        f_new = fg(x_new, g_new);
        if (std::isfinite(f_new) && g_new.allFinite() &&
            f_new <= f + cfg.armijo_c1 * step * slope && f_new < f) {
          accepted = true;
          break;
        }
        step *= cfg.backtrack_factor;
      }
    }
    if (!accepted) {
      trace.termination_reason = Termination::kLineSearchFailure;
      break;
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (static_cast<int>(memory.size()) == cfg.memory_pairs) memory.pop_front();
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
    }

    const double decrease = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    trace.objective_history.push_back(f);
    ++trace.iterations;

    if (decrease <= cfg.rel_obj_tolerance * std::max(1.0, std::abs(f))) {
      trace.termination_reason = inf_norm(g) <= cfg.grad_inf_tolerance
                                     ? Termination::kGradTolerance
                                     : Termination::kObjTolerance;
      break;
    }
  }

  trace.final_grad_inf_norm = inf_norm(g);
  if (trace.termination_reason == Termination::kMaxIterations &&
      trace.final_grad_inf_norm <= cfg.grad_inf_tolerance) {
    trace.termination_reason = Termination::kGradTolerance;
  }
  result.x = std::move(x);
  result.value = f;
  return result;
}

SolveResult minimize(const ObjectiveFn& f, const GradientFn& grad, const Eigen::VectorXd& start,
                     const SolverConfig& cfg) {
  return minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = grad(x);
        return f(x);
      },
      start, cfg);
}

}  // namespace gcm
