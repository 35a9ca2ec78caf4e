#include "trajpred/constrained.hpp"

#include "trajpred/error.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace trajpred {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Evaluation {
  double kl = kInfinity;
  double cost = kInfinity;
  Eigen::VectorXd kl_grad;
  Eigen::VectorXd cost_grad;

  bool finite() const { return std::isfinite(kl) && std::isfinite(cost); }
};

class Objective {
 public:
  Objective(const OptimProblem& problem, const CostOperator& op) : problem_(problem), op_(op) {}

  Evaluation evaluate(const Eigen::VectorXd& x) const {
    Evaluation e;
    try {
      const TrajectoryMixture mix = unpack_parameters(x, problem_.prior);
      e.kl = mixture_kl(mix, problem_.prior);
      e.cost = op_.cost_and_gradient(mix, e.cost_grad);
      e.kl_grad = mixture_kl_gradient(mix, problem_.prior);
    } catch (const Error&) {
      return Evaluation{};
    }
    if (!e.kl_grad.allFinite() || !e.cost_grad.allFinite()) return Evaluation{};
    return e;
  }

 private:
  const OptimProblem& problem_;
  const CostOperator& op_;
};

// Augmented Lagrangian for the single constraint g = cost - target <= 0.
struct Penalty {
  double multiplier = 0.0;
  double rho = 1.0;
  double target = 0.0;

  double value(const Evaluation& e) const {
    const double g = e.cost - target;
    const double shifted = std::max(0.0, multiplier + rho * g);
    return e.kl + (shifted * shifted - multiplier * multiplier) / (2.0 * rho);
  }
  Eigen::VectorXd gradient(const Evaluation& e) const {
    const double shifted = std::max(0.0, multiplier + rho * (e.cost - target));
    return e.kl_grad + shifted * e.cost_grad;
  }
};

struct InnerResult {
  Eigen::VectorXd x;
  Evaluation eval;
  int iterations = 0;
};

// L-BFGS with a backtracking Armijo line search.
InnerResult minimize_inner(const Objective& objective, const Penalty& penalty, Eigen::VectorXd x, Evaluation eval,
                           const SolverConfig& config) {
  constexpr int kMemory = 8;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;
  double value = penalty.value(eval);
  Eigen::VectorXd grad = penalty.gradient(eval);
  int it = 0;
  for (; it < config.max_inner; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-7 * std::max(1.0, std::abs(value))) break;

    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alphas(history.size());
    for (size_t i = history.size(); i-- > 0;) {
      const auto& [s, y] = history[i];
      alphas[i] = s.dot(q) / y.dot(s);
      q -= alphas[i] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= s.dot(y) / y.squaredNorm();
    } else {
      q /= std::max(1.0, grad.norm());
    }
    for (size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alphas[i] - beta) * s;
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      history.clear();
      direction = -grad / std::max(1.0, grad.norm());
      slope = grad.dot(direction);
    }

    double step = 1.0;
    Eigen::VectorXd x_next;
    Evaluation e_next;
    double v_next = kInfinity;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_next = x + step * direction;
      e_next = objective.evaluate(x_next);
      if (e_next.finite()) {
        v_next = penalty.value(e_next);
        if (v_next <= value + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd g_next = penalty.gradient(e_next);
    Eigen::VectorXd s = x_next - x;
    Eigen::VectorXd y = g_next - grad;
    const double decrease = value - v_next;
    const double step_norm = s.norm();
    x = std::move(x_next);
    eval = std::move(e_next);
    grad = g_next;
    value = v_next;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      history.emplace_back(std::move(s), std::move(y));
      if (history.size() > static_cast<size_t>(kMemory)) history.pop_front();
    }
    if (step_norm <= config.step_tolerance * (1.0 + x.norm()) ||
        decrease <= 1e-12 * std::max(1.0, std::abs(value))) {
      ++it;
      break;
    }
  }
  return {std::move(x), std::move(eval), it};
}

}  // namespace

void SolverConfig::validate() const {
  require(max_outer >= 1 && max_inner >= 1, "solver iteration limits must be positive");
  require(initial_penalty > 0.0 && penalty_growth > 1.0, "solver penalty must be positive and grow");
  require(constraint_tolerance > 0.0 && step_tolerance > 0.0 && backoff >= 0.0, "solver tolerances must be positive");
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::FeasibleEarlyExit: return "feasible-early-exit";
    case SolveStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

OptimResult solve(const OptimProblem& problem) {
  require(problem.field != nullptr, "optimization problem needs an occupancy field");
  require(problem.epsilon > 0.0 && problem.epsilon < 1.0, "epsilon must lie in (0, 1)");
  problem.solver.validate();
  const SolverConfig& config = problem.solver;
  const CostOperator op(*problem.field, problem.cost, problem.prior.features());

  OptimResult result{problem.prior};
  result.prior_cost = op.cost(problem.prior);
  if (!std::isfinite(result.prior_cost)) fail(ErrorCategory::NumericalFailure, "prior cost is not finite");
  if (result.prior_cost <= problem.epsilon) {
    result.cost = result.prior_cost;
    result.feasible = true;
    result.status = SolveStatus::FeasibleEarlyExit;
    return result;
  }

  const Objective objective(problem, op);
  Eigen::VectorXd x = pack_parameters(problem.prior);
  Evaluation eval = objective.evaluate(x);
  if (!eval.finite()) fail(ErrorCategory::NumericalFailure, "objective is not finite at the prior");

  Penalty penalty;
  penalty.rho = config.initial_penalty;
  penalty.target = problem.epsilon - std::min(config.backoff, 0.5 * problem.epsilon);
  double last_violation = eval.cost - penalty.target;
  // Close enough to the shifted target that the iterate solves a problem whose
  // bound differs from the requested one by less than the backoff.
  const double band = 0.4 * config.backoff + 1e-12;

  for (int outer = 0; outer < config.max_outer; ++outer) {
    InnerResult inner = minimize_inner(objective, penalty, x, eval, config);
    x = std::move(inner.x);
    eval = std::move(inner.eval);
    result.iterations += inner.iterations;
    result.outer_iterations = outer + 1;

    const double g = eval.cost - penalty.target;
    const double next_multiplier = std::max(0.0, penalty.multiplier + penalty.rho * g);
    const bool within_bound = eval.cost <= problem.epsilon + config.constraint_tolerance;
    if (within_bound && (std::abs(g) <= band || (g <= 0.0 && next_multiplier == 0.0))) {
      result.status = SolveStatus::Converged;
      break;
    }
    penalty.multiplier = next_multiplier;
    if (g > 0.0 && g > 0.25 * last_violation) penalty.rho *= config.penalty_growth;
    if (g > 0.0) last_violation = g;
  }

  result.posterior = unpack_parameters(x, problem.prior);
  result.kl = eval.kl;
  result.cost = eval.cost;
  result.feasible = result.cost <= problem.epsilon + config.constraint_tolerance;
  return result;
}

}  // namespace trajpred
