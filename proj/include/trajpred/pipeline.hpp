#pragma once

#include "trajpred/bench.hpp"
#include "trajpred/constrained.hpp"
#include "trajpred/serialization.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trajpred {

/// Every tunable of a pipeline run. Read from a `key = value` file; the
/// resolved values are written to <out>/config.txt by every stage.
struct RunConfig {
  std::filesystem::path out = "out";
  std::uint64_t seed = 42;

  // dataset
  std::string source = "simulated";  // simulated | csv
  std::string floor_plan = "hallway";
  int pairs = 200;
  double noise = 0.05;
  std::filesystem::path trajectories_csv;
  std::filesystem::path grid_file;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 0.5;
  int horizon_steps = 15;
  double dt = 1.0;
  double train_fraction = 0.8;

  // occupancy field
  int field_spacing = 4;
  int field_iterations = 500;
  double field_gamma = 0.16;
  double field_regularization = 1e-4;

  // learner and baselines
  int m = 8;
  int r = 2;
  double gamma = 0.05;
  double lambda = 1e-4;
  int epochs = 500;
  int batch_size = 32;
  double step = 1e-3;
  double weight_decay = 1e-6;
  int nn_epochs = 500;

  // cost and optimizer
  double epsilon = 0.05;
  int nodes = 10;
  int time_samples = 15;
  SolverConfig solver;

  int plot_samples = 20;

  double horizon() const { return horizon_steps * dt; }
  MdnHyper hyper() const;
  CostConfig cost() const;
  /// InvalidArgument on non-positive hyperparameters; MissingArtifact when a
  /// referenced input file does not exist.
  void validate() const;

  KeyValueDocument to_document() const;
  /// Unknown keys are rejected.
  static RunConfig from_document(const KeyValueDocument& doc);
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Dataset artifacts written by cmd_simulate.
struct Dataset {
  std::vector<PathPair> pairs;
  OccupancyGrid grid;
  std::size_t train_count = 0;

  std::vector<PathPair> train() const;
  std::vector<PathPair> test() const;
};

Dataset load_dataset(const std::filesystem::path& out);

void cmd_simulate(const RunConfig& config);
void cmd_fit_map(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_optimize(const RunConfig& config);

struct MethodRow {
  std::string name;
  double ade = 0.0;
  double fde = 0.0;
  std::optional<double> al;
  std::optional<double> cvp;
};

struct EvaluationSummary {
  int test_count = 0;
  int violating_count = 0;
  std::vector<MethodRow> all;        // mixture, mixture-optimized, cv, nn-naive
  std::vector<MethodRow> violating;  // mixture, mixture-optimized on the violating subset
  std::string text;
};

/// Builds the report from the stage artifacts and writes <out>/report.txt.
EvaluationSummary cmd_evaluate(const RunConfig& config);

/// Writes one SVG per selected test case, or a before/after pair when the
/// prior violates the constraint. Without a selection the violating cases are
/// plotted. Returns the written files.
std::vector<std::filesystem::path> cmd_plot(const RunConfig& config,
                                            const std::optional<std::vector<std::string>>& cases);

/// simulate, fit-map, train, predict, optimize, evaluate.
EvaluationSummary run_pipeline(const RunConfig& config);

}  // namespace trajpred
