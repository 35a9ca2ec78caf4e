#pragma once

#include "trajpred/matrix_normal.hpp"
#include "trajpred/occupancy.hpp"
#include "trajpred/parameters.hpp"
#include "trajpred/quadrature.hpp"

#include <string>

namespace trajpred {

struct SolverConfig {
  int max_outer = 12;
  int max_inner = 200;
  double initial_penalty = 10.0;
  double penalty_growth = 5.0;
  double constraint_tolerance = 1e-3;
  double step_tolerance = 1e-8;
  /// The inner problems target epsilon - backoff, so a converged posterior
  /// lands at or just below epsilon rather than just above it.
  double backoff = 5e-4;

  void validate() const;
};

/// min KL(posterior || prior) s.t. trajectory_cost(posterior) <= epsilon,
/// over locations and scales with the component weights fixed.
struct OptimProblem {
  TrajectoryMixture prior;
  const HilbertField* field = nullptr;
  double epsilon = 0.05;
  CostConfig cost;
  SolverConfig solver;
};

enum class SolveStatus { Converged, FeasibleEarlyExit, MaxIterations };

const char* status_name(SolveStatus status);

struct OptimResult {
  TrajectoryMixture posterior;
  double kl = 0.0;
  double cost = 0.0;        // of the posterior
  double prior_cost = 0.0;
  bool feasible = false;    // cost <= epsilon + constraint tolerance
  int iterations = 0;       // inner quasi-Newton iterations, summed
  int outer_iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;
};

/// Augmented-Lagrangian outer loop with L-BFGS inner solves, warm-started at
/// the packed prior. Returns the prior untouched when it already satisfies
/// the constraint. Throws NumericalFailure if the objective becomes
/// non-finite at the starting point.
OptimResult solve(const OptimProblem& problem);

}  // namespace trajpred
