#include "trajpred/pipeline.hpp"

#include "trajpred/error.hpp"
#include "trajpred/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>

namespace trajpred {

namespace fs = std::filesystem;

namespace {

struct ConfigKey {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long value = std::stol(v, &used);
    if (used == v.size() && value >= std::numeric_limits<int>::min() && value <= std::numeric_limits<int>::max()) {
      return static_cast<int>(value);
    }
  } catch (const std::exception&) {
  }
  fail(ErrorCategory::InvalidArgument, "config key '" + key + "' expects an integer, got '" + v + "'");
}

std::uint64_t parse_seed(const std::string& v) {
  try {
    size_t used = 0;
    const unsigned long long value = std::stoull(v, &used);
    if (used == v.size() && v.front() != '-') return value;
  } catch (const std::exception&) {
  }
  fail(ErrorCategory::InvalidArgument, "seed must be a non-negative integer, got '" + v + "'");
}

template <typename Ref>
ConfigKey int_key(const char* name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_int(name, v); }};
}

template <typename Ref>
ConfigKey double_key(const char* name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) {
            try {
              ref(c) = parse_double(v);
            } catch (const Error&) {
              fail(ErrorCategory::InvalidArgument, std::string("config key '") + name + "' expects a number, got '" +
                                                       v + "'");
            }
          }};
}

template <typename Ref>
ConfigKey string_key(const char* name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = v; }};
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      string_key("out", [](RunConfig& c) -> std::string { return c.out.string(); }),
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = parse_seed(v); }},
      string_key("source", [](RunConfig& c) -> std::string& { return c.source; }),
      string_key("floor_plan", [](RunConfig& c) -> std::string& { return c.floor_plan; }),
      int_key("pairs", [](RunConfig& c) -> int& { return c.pairs; }),
      double_key("noise", [](RunConfig& c) -> double& { return c.noise; }),
      string_key("trajectories_csv", [](RunConfig& c) -> std::string { return c.trajectories_csv.string(); }),
      string_key("grid_file", [](RunConfig& c) -> std::string { return c.grid_file.string(); }),
      double_key("origin_x", [](RunConfig& c) -> double& { return c.origin_x; }),
      double_key("origin_y", [](RunConfig& c) -> double& { return c.origin_y; }),
      double_key("resolution", [](RunConfig& c) -> double& { return c.resolution; }),
      int_key("horizon_steps", [](RunConfig& c) -> int& { return c.horizon_steps; }),
      double_key("dt", [](RunConfig& c) -> double& { return c.dt; }),
      double_key("train_fraction", [](RunConfig& c) -> double& { return c.train_fraction; }),
      int_key("field_spacing", [](RunConfig& c) -> int& { return c.field_spacing; }),
      int_key("field_iterations", [](RunConfig& c) -> int& { return c.field_iterations; }),
      double_key("field_gamma", [](RunConfig& c) -> double& { return c.field_gamma; }),
      double_key("field_regularization", [](RunConfig& c) -> double& { return c.field_regularization; }),
      int_key("M", [](RunConfig& c) -> int& { return c.m; }),
      int_key("R", [](RunConfig& c) -> int& { return c.r; }),
      double_key("gamma", [](RunConfig& c) -> double& { return c.gamma; }),
      double_key("lambda", [](RunConfig& c) -> double& { return c.lambda; }),
      int_key("epochs", [](RunConfig& c) -> int& { return c.epochs; }),
      int_key("batch_size", [](RunConfig& c) -> int& { return c.batch_size; }),
      double_key("step", [](RunConfig& c) -> double& { return c.step; }),
      double_key("weight_decay", [](RunConfig& c) -> double& { return c.weight_decay; }),
      int_key("nn_epochs", [](RunConfig& c) -> int& { return c.nn_epochs; }),
      double_key("epsilon", [](RunConfig& c) -> double& { return c.epsilon; }),
      int_key("nodes", [](RunConfig& c) -> int& { return c.nodes; }),
      int_key("time_samples", [](RunConfig& c) -> int& { return c.time_samples; }),
      int_key("solver.max_outer", [](RunConfig& c) -> int& { return c.solver.max_outer; }),
      int_key("solver.max_inner", [](RunConfig& c) -> int& { return c.solver.max_inner; }),
      double_key("solver.initial_penalty", [](RunConfig& c) -> double& { return c.solver.initial_penalty; }),
      double_key("solver.penalty_growth", [](RunConfig& c) -> double& { return c.solver.penalty_growth; }),
      double_key("solver.constraint_tolerance",
                 [](RunConfig& c) -> double& { return c.solver.constraint_tolerance; }),
      double_key("solver.step_tolerance", [](RunConfig& c) -> double& { return c.solver.step_tolerance; }),
      double_key("solver.backoff", [](RunConfig& c) -> double& { return c.solver.backoff; }),
      int_key("plot_samples", [](RunConfig& c) -> int& { return c.plot_samples; }),
  };
  return keys;
}

// Path-valued keys go through a string temporary.
void set_path_key(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "out") c.out = v;
  if (key == "trajectories_csv") c.trajectories_csv = v;
  if (key == "grid_file") c.grid_file = v;
}

constexpr int kDatasetVersion = 1;

void snapshot_config(const RunConfig& config) {
  write_text_file(config.out / "config.txt", config.to_document().to_string());
}

void reset_directory(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::Io, "cannot create " + dir.string() + ": " + ec.message());
}

HilbertField load_field(const RunConfig& config) {
  return field_from_text(read_text_file(config.out / "map" / "field.txt"));
}

fs::path prediction_path(const RunConfig& config, const std::string& id) {
  return config.out / "predictions" / (id + ".mix");
}

fs::path optimized_path(const RunConfig& config, const std::string& id) {
  return config.out / "optimized" / (id + ".mix");
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct MixtureStats {
  double ade = 0.0, fde = 0.0, al = 0.0;
  std::vector<double> costs;

  void add(const TrajectoryMixture& mix, const TimedPath& truth, double cost) {
    ade += metric_ade(mix, truth);
    fde += metric_fde(mix, truth);
    al += metric_al(mix, truth);
    costs.push_back(cost);
  }

  MethodRow row(const std::string& name, double epsilon) const {
    const double n = static_cast<double>(costs.size());
    if (costs.empty()) return {name, 0.0, 0.0, 0.0, 0.0};
    return {name, ade / n, fde / n, al / n, violation_percentage(costs, epsilon)};
  }
};

std::string format_table(const std::vector<MethodRow>& rows) {
  std::string out = "method             ADE       FDE       AL        CVP\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %-9s %-9s %-9s %s\n", r.name.c_str(), fixed(r.ade).c_str(),
                  fixed(r.fde).c_str(), r.al ? fixed(*r.al).c_str() : "-", r.cvp ? fixed(*r.cvp).c_str() : "-");
    out += line;
  }
  return out;
}

MatrixX2d path_points(const ContinuousTrajectory& traj, const Eigen::VectorXd& times, const Eigen::Vector2d& origin) {
  MatrixX2d pts = eval_trajectory(traj, times);
  pts.rowwise() += origin.transpose();
  return pts;
}

PlotScene make_scene(const std::string& title, const OccupancyGrid& grid, const PathPair& pair,
                     const TrajectoryMixture& mix, const HilbertField& field, const RunConfig& config) {
  PlotScene scene;
  scene.title = title;
  scene.grid = &grid;
  scene.history = pair.history.points;
  scene.truth = pair.future.points;
  const Eigen::VectorXd times = future_frame(pair).times;
  for (int s = 0; s < config.plot_samples; ++s) {
    scene.samples.push_back(path_points(sample_trajectory(mix, config.seed + static_cast<std::uint64_t>(s)), times,
                                        mix.origin()));
  }
  const CostOperator op(field, config.cost(), mix.features());
  std::vector<Eigen::Matrix2Xd> blocks;
  Eigen::Index total = 0;
  for (int r = 0; r < mix.size(); ++r) {
    blocks.push_back(op.abscissae(mix, r));
    total += blocks.back().cols();
  }
  scene.abscissae.resize(2, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    scene.abscissae.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  for (Eigen::Index k = 0; k < total; ++k) scene.colliding.push_back(field.query(scene.abscissae.col(k)) >= 0.5);
  return scene;
}

}  // namespace

MdnHyper RunConfig::hyper() const {
  MdnHyper h;
  h.m = m;
  h.r = r;
  h.gamma = gamma;
  h.horizon = horizon();
  return h;
}

CostConfig RunConfig::cost() const {
  CostConfig c;
  c.nodes = nodes;
  c.time_samples = time_samples;
  c.horizon = horizon();
  return c;
}

void RunConfig::validate() const {
  require(source == "simulated" || source == "csv", "source must be 'simulated' or 'csv'");
  require(pairs >= 1 && horizon_steps >= 1 && dt > 0.0, "pairs, horizon_steps and dt must be positive");
  require(noise >= 0.0 && resolution > 0.0, "noise must be non-negative and resolution positive");
  require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
  require(field_spacing >= 1 && field_iterations >= 1 && field_gamma >= 0.0 && field_regularization >= 0.0,
          "field settings must be positive");
  require(m >= 1 && r >= 1 && gamma > 0.0 && lambda > 0.0, "M, R, gamma and lambda must be positive");
  require(epochs >= 1 && nn_epochs >= 1 && batch_size >= 1 && step > 0.0 && weight_decay >= 0.0,
          "training settings must be positive");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  require(plot_samples >= 0, "plot_samples must be non-negative");
  cost().validate();
  solver.validate();
  if (source == "csv") {
    require(!trajectories_csv.empty() && !grid_file.empty(), "csv source needs trajectories_csv and grid_file");
    for (const auto& p : {trajectories_csv, grid_file}) {
      if (!fs::exists(p)) fail(ErrorCategory::MissingArtifact, "input file " + p.string() + " does not exist");
    }
  }
}

KeyValueDocument RunConfig::to_document() const {
  KeyValueDocument doc;
  for (const auto& k : config_keys()) doc.set(k.name, k.get(*this));
  return doc;
}

RunConfig RunConfig::from_document(const KeyValueDocument& doc) {
  RunConfig c;
  for (const auto& [key, value] : doc.entries()) {
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.name; });
    if (it == keys.end()) fail(ErrorCategory::InvalidArgument, "unknown config key '" + key + "'");
    if (key == "out" || key == "trajectories_csv" || key == "grid_file") {
      set_path_key(c, key, value);
    } else {
      it->set(c, value);
    }
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig c = RunConfig::from_document(KeyValueDocument::parse(read_text_file(path)));
  // Relative input paths are taken relative to the config file.
  const fs::path base = path.parent_path();
  for (fs::path* p : {&c.trajectories_csv, &c.grid_file}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

std::vector<PathPair> Dataset::train() const {
  return {pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(train_count)};
}

std::vector<PathPair> Dataset::test() const {
  return {pairs.begin() + static_cast<std::ptrdiff_t>(train_count), pairs.end()};
}

Dataset load_dataset(const fs::path& out) {
  const fs::path dir = out / "dataset";
  const KeyValueDocument manifest = KeyValueDocument::parse(read_text_file(dir / "manifest.txt"));
  manifest.expect_schema("trajpred-dataset", kDatasetVersion);
  const int history = manifest.get_int("history");
  const int horizon = manifest.get_int("horizon_steps");
  Dataset data;
  for (const auto& [id, path] : parse_paths_csv(read_text_file(dir / "trajectories.csv"))) {
    if (path.size() != history + horizon) {
      fail(ErrorCategory::MalformedFile, "pair '" + id + "' does not have history + horizon samples");
    }
    data.pairs.push_back({id, path.segment(0, history), path.segment(history, horizon)});
  }
  const int train_count = manifest.get_int("train_count");
  if (static_cast<int>(data.pairs.size()) != manifest.get_int("pairs") || train_count < 1 ||
      train_count >= static_cast<int>(data.pairs.size())) {
    fail(ErrorCategory::MalformedFile, "dataset manifest does not match trajectories.csv");
  }
  data.train_count = static_cast<std::size_t>(train_count);
  const Eigen::VectorXd origin = manifest.get_vector("grid_origin", 2);
  data.grid = parse_grid_csv(read_text_file(dir / "grid.csv"), {origin, manifest.get_double("grid_resolution")});
  return data;
}

void cmd_simulate(const RunConfig& config) {
  config.validate();
  std::vector<PathPair> pairs;
  OccupancyGrid grid;
  if (config.source == "simulated") {
    ScenarioConfig sc;
    sc.floor_plan = config.floor_plan;
    sc.pairs = config.pairs;
    sc.history = kHistorySteps;
    sc.horizon = config.horizon_steps;
    sc.dt = config.dt;
    sc.noise = config.noise;
    sc.seed = config.seed;
    SimulatedScenario scenario = generate_simulated(sc);
    pairs = std::move(scenario.pairs);
    grid = std::move(scenario.grid);
  } else {
    const auto paths = parse_paths_csv(read_text_file(config.trajectories_csv));
    pairs = split_into_pairs(paths, kHistorySteps, config.horizon_steps, kHistorySteps + config.horizon_steps);
    std::mt19937_64 rng(config.seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    if (static_cast<int>(pairs.size()) > config.pairs) pairs.resize(static_cast<size_t>(config.pairs));
    grid = load_grid(config.grid_file, {Eigen::Vector2d(config.origin_x, config.origin_y), config.resolution});
  }
  const auto train_count = static_cast<int>(std::lround(config.train_fraction * static_cast<double>(pairs.size())));
  if (pairs.size() < 2 || train_count < 1 || train_count >= static_cast<int>(pairs.size())) {
    fail(ErrorCategory::InvalidArgument, "dataset needs at least one training and one test pair");
  }

  const fs::path dir = config.out / "dataset";
  reset_directory(dir);
  std::vector<std::pair<std::string, TimedPath>> rows;
  for (const auto& p : pairs) {
    Eigen::VectorXd t(p.history.size() + p.future.size());
    t << p.history.times, p.future.times;
    MatrixX2d xy(t.size(), 2);
    xy << p.history.points, p.future.points;
    rows.emplace_back(p.id, TimedPath(t, xy));
  }
  write_text_file(dir / "trajectories.csv", paths_to_csv(rows));
  save_grid_csv(grid, dir / "grid.csv");

  KeyValueDocument manifest;
  manifest.set("format", std::string("trajpred-dataset"));
  manifest.set("version", kDatasetVersion);
  manifest.set("source", config.source);
  manifest.set("pairs", static_cast<int>(pairs.size()));
  manifest.set("train_count", train_count);
  manifest.set("split", std::string("80:20"));
  manifest.set("history", kHistorySteps);
  manifest.set("horizon_steps", config.horizon_steps);
  manifest.set("dt", config.dt);
  manifest.set("grid_width", grid.width);
  manifest.set("grid_height", grid.height);
  manifest.set("grid_resolution", grid.resolution);
  manifest.set("grid_origin", Eigen::VectorXd(grid.origin));
  if (std::abs(config.train_fraction - 0.8) > 1e-12) {
    manifest.set("split", format_double(config.train_fraction));
  }
  write_text_file(dir / "manifest.txt", manifest.to_string());
  snapshot_config(config);
}

void cmd_fit_map(const RunConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config.out);
  FieldTrainConfig fc;
  fc.inducing_spacing = config.field_spacing;
  fc.iterations = config.field_iterations;
  fc.gamma = config.field_gamma;
  fc.regularization = config.field_regularization;
  fc.seed = config.seed + 1;
  const HilbertField field = train_field(data.grid, fc);
  write_text_file(config.out / "map" / "field.txt", field_to_text(field));
  snapshot_config(config);
}

void cmd_train(const RunConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config.out);
  const MdnHyper hyper = config.hyper();
  std::vector<TrainingPair> training;
  const std::vector<PathPair> train_pairs = data.train();
  for (const auto& p : train_pairs) training.push_back(make_training_pair(p.history, p.future, hyper, config.lambda));

  TrainConfig tc;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.step = config.step;
  tc.weight_decay = config.weight_decay;
  tc.seed = config.seed + 2;
  const TrainResult result = train(training, tc, hyper);

  const fs::path dir = config.out / "model";
  reset_directory(dir);
  write_text_file(dir / "mdn.ckpt", mdn_to_text(result.network));
  std::string log = "epoch,loss\n";
  for (size_t e = 0; e < result.loss_trace.size(); ++e) {
    log += std::to_string(e) + "," + format_double(result.loss_trace[e]) + "\n";
  }
  write_text_file(dir / "train_log.csv", log);

  NaiveNnConfig nc;
  nc.epochs = config.nn_epochs;
  nc.batch_size = config.batch_size;
  nc.step = config.step;
  nc.seed = config.seed + 3;
  write_text_file(dir / "nn_naive.ckpt", naive_nn_to_text(baseline_nn_naive(train_pairs, nc)));
  snapshot_config(config);
}

void cmd_predict(const RunConfig& config) {
  config.validate();
  const MdnNetwork net = mdn_from_text(read_text_file(config.out / "model" / "mdn.ckpt"));
  const Dataset data = load_dataset(config.out);
  reset_directory(config.out / "predictions");
  for (const auto& p : data.test()) {
    save_mixture(predict_prior(net, encode_history(p.history, net.hyper.center_inputs)), prediction_path(config, p.id));
  }
  snapshot_config(config);
}

void cmd_optimize(const RunConfig& config) {
  config.validate();
  const HilbertField field = load_field(config);
  const Dataset data = load_dataset(config.out);
  std::vector<std::pair<std::string, TrajectoryMixture>> priors;
  for (const auto& p : data.test()) priors.emplace_back(p.id, load_mixture(prediction_path(config, p.id)));

  reset_directory(config.out / "optimized");
  std::string log = "id,status,kl,cost_before,cost_after,iterations,outer_iterations,seconds\n";
  for (const auto& [id, prior] : priors) {
    OptimProblem problem{prior, &field, config.epsilon, config.cost(), config.solver};
    const auto start = std::chrono::steady_clock::now();
    const OptimResult result = solve(problem);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_mixture(result.posterior, optimized_path(config, id));
    char tail[64];
    std::snprintf(tail, sizeof tail, "%.3f", seconds);
    log += id + "," + status_name(result.status) + "," + format_double(result.kl) + "," +
           format_double(result.prior_cost) + "," + format_double(result.cost) + "," +
           std::to_string(result.iterations) + "," + std::to_string(result.outer_iterations) + "," + tail + "\n";
  }
  write_text_file(config.out / "optimized" / "run_log.csv", log);
  snapshot_config(config);
}

EvaluationSummary cmd_evaluate(const RunConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config.out);
  const HilbertField field = load_field(config);
  const NaiveNnPredictor nn = naive_nn_from_text(read_text_file(config.out / "model" / "nn_naive.ckpt"));
  const std::vector<PathPair> test = data.test();

  MixtureStats prior_all, post_all, prior_bad, post_bad;
  DisplacementError cv_sum, nn_sum;
  std::vector<std::string> violating_ids;
  for (const auto& p : test) {
    const TrajectoryMixture prior = load_mixture(prediction_path(config, p.id));
    const TrajectoryMixture post = load_mixture(optimized_path(config, p.id));
    const TimedPath truth = future_frame(p);
    const CostOperator op(field, config.cost(), prior.features());
    const double prior_cost = op.cost(prior);
    const double post_cost = op.cost(post);
    prior_all.add(prior, truth, prior_cost);
    post_all.add(post, truth, post_cost);
    if (prior_cost > config.epsilon) {
      violating_ids.push_back(p.id);
      prior_bad.add(prior, truth, prior_cost);
      post_bad.add(post, truth, post_cost);
    }
    const DisplacementError cv = displacement_error(baseline_cv(p.history, config.horizon_steps).points,
                                                    p.future.points);
    const DisplacementError nd = displacement_error(nn.predict(p.history), p.future.points);
    cv_sum.ade += cv.ade;
    cv_sum.fde += cv.fde;
    nn_sum.ade += nd.ade;
    nn_sum.fde += nd.fde;
  }

  EvaluationSummary s;
  const double n = static_cast<double>(test.size());
  s.test_count = static_cast<int>(test.size());
  s.violating_count = static_cast<int>(violating_ids.size());
  s.all = {prior_all.row("mixture", config.epsilon), post_all.row("mixture-optimized", config.epsilon),
           {"constant-velocity", cv_sum.ade / n, cv_sum.fde / n, std::nullopt, std::nullopt},
           {"nn-naive", nn_sum.ade / n, nn_sum.fde / n, std::nullopt, std::nullopt}};
  s.violating = {prior_bad.row("mixture", config.epsilon), post_bad.row("mixture-optimized", config.epsilon)};

  s.text = "trajpred evaluation report\n\n";
  s.text += "test_pairs = " + std::to_string(s.test_count) + "\n";
  s.text += "violating_pairs = " + std::to_string(s.violating_count) + "\n";
  s.text += "epsilon = " + format_double(config.epsilon) + "\n";
  s.text += "M = " + std::to_string(config.m) + ", R = " + std::to_string(config.r) +
            ", gamma = " + format_double(config.gamma) + ", horizon = " + format_double(config.horizon()) + " s\n\n";
  s.text += "[all test pairs]\n" + format_table(s.all) + "\n";
  s.text += "[violating subset]\n" + format_table(s.violating);
  write_text_file(config.out / "report.txt", s.text);
  snapshot_config(config);
  return s;
}

std::vector<fs::path> cmd_plot(const RunConfig& config, const std::optional<std::vector<std::string>>& cases) {
  config.validate();
  const Dataset data = load_dataset(config.out);
  const HilbertField field = load_field(config);
  const std::vector<PathPair> test = data.test();

  std::vector<const PathPair*> selected;
  if (cases) {
    for (const auto& id : *cases) {
      const auto it = std::find_if(test.begin(), test.end(), [&](const PathPair& p) { return p.id == id; });
      if (it == test.end()) fail(ErrorCategory::InvalidArgument, "'" + id + "' is not a test case");
      selected.push_back(&*it);
    }
  }

  std::vector<fs::path> written;
  for (const auto& p : test) {
    const bool chosen = std::find(selected.begin(), selected.end(), &p) != selected.end();
    if (cases && !chosen) continue;
    const TrajectoryMixture prior = load_mixture(prediction_path(config, p.id));
    const bool violating = trajectory_cost(prior, field, config.cost()) > config.epsilon;
    if (!cases && !violating) continue;
    const fs::path dir = config.out / "plots";
    if (violating && fs::exists(optimized_path(config, p.id))) {
      const TrajectoryMixture post = load_mixture(optimized_path(config, p.id));
      written.push_back(dir / (p.id + "_before.svg"));
      write_text_file(written.back(), render_svg(make_scene(p.id + " before", data.grid, p, prior, field, config)));
      written.push_back(dir / (p.id + "_after.svg"));
      write_text_file(written.back(), render_svg(make_scene(p.id + " after", data.grid, p, post, field, config)));
    } else {
      written.push_back(dir / (p.id + ".svg"));
      write_text_file(written.back(), render_svg(make_scene(p.id, data.grid, p, prior, field, config)));
    }
  }
  return written;
}

EvaluationSummary run_pipeline(const RunConfig& config) {
  cmd_simulate(config);
  cmd_fit_map(config);
  cmd_train(config);
  cmd_predict(config);
  cmd_optimize(config);
  return cmd_evaluate(config);
}

}  // namespace trajpred
