#pragma once

#include "trajpred/matrix_normal.hpp"
#include "trajpred/mlp.hpp"
#include "trajpred/occupancy.hpp"
#include "trajpred/quadrature.hpp"
#include "trajpred/rbf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace trajpred {

struct Rect {
  double x0, y0, x1, y1;
  bool contains(const Eigen::Vector2d& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
};

/// Rasterizable floor plan with a route graph for simulated agents.
struct FloorPlan {
  double width_m = 0.0;
  double height_m = 0.0;
  double resolution = 0.5;
  std::vector<Rect> free;
  std::vector<Rect> obstacles;
  std::vector<std::string> node_names;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> terminals;

  bool is_free(const Eigen::Vector2d& p) const;
  OccupancyGrid rasterize() const;
  std::vector<int> neighbors(int node) const;
};

FloorPlan parse_floor_plan(const std::string& text);
/// The checked-in L-hallway plan (assets/hallway_plan.txt).
const FloorPlan& hallway_plan();

struct ScenarioConfig {
  std::string floor_plan = "hallway";
  int pairs = 200;
  int history = 10;
  int horizon = 15;
  double dt = 1.0;
  double noise = 0.05;  // meters, per-sample perturbation
  std::uint64_t seed = 42;

  void validate() const;
};

/// Observed history and ground-truth future on the same clock.
struct PathPair {
  std::string id;
  TimedPath history;
  TimedPath future;
};

struct SimulatedScenario {
  std::vector<PathPair> pairs;
  OccupancyGrid grid;
};

/// Agents follow a uniformly chosen simple route between two terminals of
/// the route graph, with jittered waypoints, rounded corners, a random speed
/// and Gaussian position noise. Agents whose
/// samples touch an occupied cell are redrawn. Each agent trace is cut into
/// non-overlapping history + future windows until `pairs` are collected;
/// pair order is shuffled.
SimulatedScenario generate_simulated(const ScenarioConfig& config);

/// Cuts long trajectories into (history, horizon) windows with the given
/// stride, skipping trajectories shorter than one window.
std::vector<PathPair> split_into_pairs(const std::vector<std::pair<std::string, TimedPath>>& paths, int history,
                                       int horizon, int stride);

/// Future of `pair` re-timed so the last observed sample is t = 0.
TimedPath future_frame(const PathPair& pair);

struct EvalReport {
  double ade = 0.0;
  double fde = 0.0;
  double al = 0.0;
  double cvp = 0.0;
};

/// Minimum over components of the mean distance between the component mean
/// path and the truth. Truth times are in the prediction frame.
double metric_ade(const TrajectoryMixture& mix, const TimedPath& truth);
double metric_fde(const TrajectoryMixture& mix, const TimedPath& truth);
/// Mean over truth samples of the time-slice mixture density at the truth.
double metric_al(const TrajectoryMixture& mix, const TimedPath& truth);
/// Percentage of mixtures with trajectory_cost > epsilon.
double metric_cvp(const std::vector<TrajectoryMixture>& mixtures, const HilbertField& field,
                  const CostConfig& config, double epsilon);
/// Same, from precomputed costs.
double violation_percentage(const std::vector<double>& costs, double epsilon);

struct DisplacementError {
  double ade = 0.0;
  double fde = 0.0;
};

/// Row-aligned error between a deterministic prediction and the truth.
DisplacementError displacement_error(const MatrixX2d& predicted, const MatrixX2d& truth);

/// Extrapolates the window's average velocity from the last sample.
TimedPath baseline_cv(const TimedPath& history, int horizon);

struct NaiveNnConfig {
  int epochs = 500;
  int batch_size = 32;
  double step = 1e-3;
  std::uint64_t seed = 3;
};

/// Deterministic regressor from the centered 20-d history encoding to the
/// centered future coordinates, hidden layers 560 -> 180 -> 180.
struct NaiveNnPredictor {
  Mlp net;
  int horizon = 0;

  /// One row per future step, world coordinates.
  MatrixX2d predict(const TimedPath& history) const;
  double mse(const std::vector<PathPair>& pairs) const;
};

NaiveNnPredictor baseline_nn_naive(const std::vector<PathPair>& dataset, const NaiveNnConfig& config);

}  // namespace trajpred
