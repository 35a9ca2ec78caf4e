#include "trajpred/bench.hpp"

#include "trajpred/error.hpp"
#include "trajpred/floor_plan_asset.hpp"
#include "trajpred/mdn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace trajpred {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Rect parse_rect(const std::string& value) {
  std::istringstream in(value);
  Rect r{};
  if (!(in >> r.x0 >> r.y0 >> r.x1 >> r.y1) || r.x1 <= r.x0 || r.y1 <= r.y0) {
    fail(ErrorCategory::MalformedFile, "floor plan rectangle '" + value + "' is malformed");
  }
  return r;
}

// Chaikin corner cutting, endpoints kept.
std::vector<Eigen::Vector2d> smooth_polyline(const std::vector<Eigen::Vector2d>& pts, int rounds) {
  std::vector<Eigen::Vector2d> cur = pts;
  for (int k = 0; k < rounds && cur.size() > 2; ++k) {
    std::vector<Eigen::Vector2d> next{cur.front()};
    for (size_t i = 0; i + 1 < cur.size(); ++i) {
      next.push_back(0.75 * cur[i] + 0.25 * cur[i + 1]);
      next.push_back(0.25 * cur[i] + 0.75 * cur[i + 1]);
    }
    next.push_back(cur.back());
    cur = std::move(next);
  }
  return cur;
}

// Points spaced `spacing` apart along the polyline, starting `start` in.
std::vector<Eigen::Vector2d> resample(const std::vector<Eigen::Vector2d>& pts, double start, double spacing) {
  std::vector<Eigen::Vector2d> out;
  double target = start;
  double travelled = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = (pts[i + 1] - pts[i]).norm();
    while (len > 0.0 && target <= travelled + len) {
      out.push_back(pts[i] + (target - travelled) / len * (pts[i + 1] - pts[i]));
      target += spacing;
    }
    travelled += len;
  }
  return out;
}

void collect_routes(const FloorPlan& plan, std::vector<int>& route, std::vector<bool>& visited,
                    std::vector<std::vector<int>>& out) {
  const int here = route.back();
  const bool terminal = std::find(plan.terminals.begin(), plan.terminals.end(), here) != plan.terminals.end();
  if (route.size() > 1 && terminal) {
    out.push_back(route);
    return;
  }
  for (int n : plan.neighbors(here)) {
    if (visited[static_cast<size_t>(n)]) continue;
    visited[static_cast<size_t>(n)] = true;
    route.push_back(n);
    collect_routes(plan, route, visited, out);
    route.pop_back();
    visited[static_cast<size_t>(n)] = false;
  }
}

// Every simple path of the route graph between two distinct terminals.
std::vector<std::vector<int>> terminal_routes(const FloorPlan& plan) {
  std::vector<std::vector<int>> out;
  for (int start : plan.terminals) {
    std::vector<int> route{start};
    std::vector<bool> visited(plan.nodes.size(), false);
    visited[static_cast<size_t>(start)] = true;
    collect_routes(plan, route, visited, out);
  }
  return out;
}

double mean_distance(const TrajectoryMixture& mix, int r, const TimedPath& truth) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < truth.size(); ++k) total += (mix.mean_position(r, truth.times[k]) - truth.point(k)).norm();
  return total / static_cast<double>(truth.size());
}

}  // namespace

bool FloorPlan::is_free(const Eigen::Vector2d& p) const {
  const bool in_free = std::any_of(free.begin(), free.end(), [&](const Rect& r) { return r.contains(p); });
  return in_free && std::none_of(obstacles.begin(), obstacles.end(), [&](const Rect& r) { return r.contains(p); });
}

OccupancyGrid FloorPlan::rasterize() const {
  const int w = static_cast<int>(std::lround(width_m / resolution));
  const int h = static_cast<int>(std::lround(height_m / resolution));
  OccupancyGrid grid(w, h, resolution, Eigen::Vector2d::Zero(), Eigen::VectorXd::Ones(static_cast<Eigen::Index>(w) * h));
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) grid.at(i, j) = is_free(grid.cell_center(i, j)) ? 0.0 : 1.0;
  return grid;
}

std::vector<int> FloorPlan::neighbors(int node) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.push_back(b);
    if (b == node) out.push_back(a);
  }
  return out;
}

FloorPlan parse_floor_plan(const std::string& text) {
  FloorPlan plan;
  std::map<std::string, int> index;
  std::istringstream lines(text);
  std::string line;
  auto node_index = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) fail(ErrorCategory::MalformedFile, "floor plan references unknown node " + name);
    return it->second;
  };
  while (std::getline(lines, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCategory::MalformedFile, "floor plan line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream in(value);
    if (key == "width_m") {
      in >> plan.width_m;
    } else if (key == "height_m") {
      in >> plan.height_m;
    } else if (key == "resolution") {
      in >> plan.resolution;
    } else if (key == "free") {
      plan.free.push_back(parse_rect(value));
    } else if (key == "obstacle") {
      plan.obstacles.push_back(parse_rect(value));
    } else if (key == "node") {
      std::string name;
      double x = 0, y = 0;
      if (!(in >> name >> x >> y)) fail(ErrorCategory::MalformedFile, "floor plan node is malformed: " + value);
      index[name] = static_cast<int>(plan.nodes.size());
      plan.node_names.push_back(name);
      plan.nodes.emplace_back(x, y);
    } else if (key == "edge") {
      std::string a, b;
      if (!(in >> a >> b)) fail(ErrorCategory::MalformedFile, "floor plan edge is malformed: " + value);
      plan.edges.emplace_back(node_index(a), node_index(b));
    } else if (key == "terminal") {
      plan.terminals.push_back(node_index(value));
    } else {
      fail(ErrorCategory::MalformedFile, "unknown floor plan key " + key);
    }
  }
  if (!(plan.width_m > 0 && plan.height_m > 0 && plan.resolution > 0) || plan.free.empty() ||
      plan.terminals.size() < 2) {
    fail(ErrorCategory::MalformedFile, "floor plan needs extents, free space and two terminals");
  }
  return plan;
}

const FloorPlan& hallway_plan() {
  static const FloorPlan plan = parse_floor_plan(detail::kHallwayPlan);
  return plan;
}

void ScenarioConfig::validate() const {
  require(pairs >= 1 && history >= 1 && horizon >= 1, "scenario counts must be positive");
  require(dt > 0.0 && noise >= 0.0, "scenario timestep must be positive");
  require(floor_plan == "hallway", "unknown floor plan '" + floor_plan + "'");
}

SimulatedScenario generate_simulated(const ScenarioConfig& config) {
  config.validate();
  const FloorPlan& plan = hallway_plan();
  SimulatedScenario out{{}, plan.rasterize()};
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> speed_dist(1.0, 1.4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::vector<std::vector<int>> routes = terminal_routes(plan);
  if (routes.empty()) fail(ErrorCategory::InvalidArgument, "floor plan has no route between terminals");
  std::uniform_int_distribution<size_t> pick_route(0, routes.size() - 1);
  const int window = config.history + config.horizon;

  int agent = 0;
  for (int attempt = 0; static_cast<int>(out.pairs.size()) < config.pairs; ++attempt) {
    if (attempt > 100 * config.pairs + 1000) fail(ErrorCategory::NumericalFailure, "simulator cannot place agents");
    const std::vector<int>& route = routes[pick_route(rng)];
    std::vector<Eigen::Vector2d> pts;
    for (int n : route) {
      // Jitter each waypoint inside a disk of radius 0.6 m.
      const double radius = 0.6 * std::sqrt(unit(rng));
      const double angle = 2.0 * M_PI * unit(rng);
      pts.push_back(plan.nodes[static_cast<size_t>(n)] + radius * Eigen::Vector2d(std::cos(angle), std::sin(angle)));
    }
    const double speed = speed_dist(rng);
    const double step = speed * config.dt;
    std::vector<Eigen::Vector2d> samples = resample(smooth_polyline(pts, 3), step * unit(rng), step);
    for (auto& p : samples) p += config.noise * Eigen::Vector2d(noise(rng), noise(rng));

    const bool clear = std::all_of(samples.begin(), samples.end(),
                                   [&](const Eigen::Vector2d& p) { return out.grid.value_at(p) < 0.5; });
    if (!clear || static_cast<int>(samples.size()) < window) continue;

    for (int start = 0; start + window <= static_cast<int>(samples.size()); start += window) {
      Eigen::VectorXd t(window);
      MatrixX2d xy(window, 2);
      for (int k = 0; k < window; ++k) {
        t[k] = (start + k) * config.dt;
        xy.row(k) = samples[static_cast<size_t>(start + k)].transpose();
      }
      const TimedPath whole(t, xy);
      out.pairs.push_back({"a" + std::to_string(agent) + "_w" + std::to_string(start / window),
                           whole.segment(0, config.history), whole.segment(config.history, config.horizon)});
    }
    ++agent;
  }
  out.pairs.resize(static_cast<size_t>(config.pairs));
  std::shuffle(out.pairs.begin(), out.pairs.end(), rng);
  return out;
}

std::vector<PathPair> split_into_pairs(const std::vector<std::pair<std::string, TimedPath>>& paths, int history,
                                       int horizon, int stride) {
  require(history >= 1 && horizon >= 1 && stride >= 1, "pair split needs positive lengths");
  std::vector<PathPair> out;
  const int window = history + horizon;
  for (const auto& [id, path] : paths) {
    for (int start = 0; start + window <= path.size(); start += stride) {
      out.push_back({id + "_" + std::to_string(start), path.segment(start, history),
                     path.segment(start + history, horizon)});
    }
  }
  return out;
}

TimedPath future_frame(const PathPair& pair) {
  return pair.future.shifted_time(pair.history.times[pair.history.size() - 1]);
}

double metric_ade(const TrajectoryMixture& mix, const TimedPath& truth) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < mix.size(); ++r) best = std::min(best, mean_distance(mix, r, truth));
  return best;
}

double metric_fde(const TrajectoryMixture& mix, const TimedPath& truth) {
  const Eigen::Index last = truth.size() - 1;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < mix.size(); ++r) {
    best = std::min(best, (mix.mean_position(r, truth.times[last]) - truth.point(last)).norm());
  }
  return best;
}

double metric_al(const TrajectoryMixture& mix, const TimedPath& truth) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    total += point_mixture_density(project_at_time(mix, truth.times[k]), truth.point(k));
  }
  return total / static_cast<double>(truth.size());
}

double violation_percentage(const std::vector<double>& costs, double epsilon) {
  require(!costs.empty(), "violation percentage needs at least one prediction");
  const auto violating = std::count_if(costs.begin(), costs.end(), [&](double c) { return c > epsilon; });
  return 100.0 * static_cast<double>(violating) / static_cast<double>(costs.size());
}

double metric_cvp(const std::vector<TrajectoryMixture>& mixtures, const HilbertField& field,
                  const CostConfig& config, double epsilon) {
  require(!mixtures.empty(), "CVP needs at least one mixture");
  std::vector<double> costs;
  costs.reserve(mixtures.size());
  for (const auto& m : mixtures) costs.push_back(trajectory_cost(m, field, config));
  return violation_percentage(costs, epsilon);
}

DisplacementError displacement_error(const MatrixX2d& predicted, const MatrixX2d& truth) {
  require(predicted.rows() == truth.rows() && truth.rows() >= 1, "displacement error needs aligned paths");
  const Eigen::VectorXd d = (predicted - truth).rowwise().norm();
  return {d.mean(), d[d.size() - 1]};
}

TimedPath baseline_cv(const TimedPath& history, int horizon) {
  require(history.size() >= 2, "constant velocity needs at least two samples");
  require(horizon >= 1, "constant velocity horizon must be positive");
  const Eigen::Index n = history.size();
  const double elapsed = history.times[n - 1] - history.times[0];
  const Eigen::Vector2d velocity = (history.point(n - 1) - history.point(0)) / elapsed;
  const double dt = elapsed / static_cast<double>(n - 1);
  Eigen::VectorXd t(horizon);
  MatrixX2d xy(horizon, 2);
  for (int k = 0; k < horizon; ++k) {
    const double ahead = (k + 1) * dt;
    t[k] = history.times[n - 1] + ahead;
    xy.row(k) = (history.point(n - 1) + ahead * velocity).transpose();
  }
  return TimedPath(t, xy);
}

MatrixX2d NaiveNnPredictor::predict(const TimedPath& history) const {
  const HistoryEncoding enc = encode_history(history, true);
  const Eigen::VectorXd out = net.forward(enc.values);
  MatrixX2d xy(horizon, 2);
  for (int k = 0; k < horizon; ++k) xy.row(k) = (out.segment<2>(2 * k) + enc.reference).transpose();
  return xy;
}

double NaiveNnPredictor::mse(const std::vector<PathPair>& pairs) const {
  double total = 0.0;
  for (const auto& p : pairs) total += (predict(p.history) - p.future.points).squaredNorm();
  return total / static_cast<double>(pairs.size() * 2 * static_cast<size_t>(horizon));
}

NaiveNnPredictor baseline_nn_naive(const std::vector<PathPair>& dataset, const NaiveNnConfig& config) {
  require(!dataset.empty(), "naive network needs a non-empty dataset");
  const int horizon = static_cast<int>(dataset.front().future.size());
  NaiveNnPredictor model{Mlp({kEncodingSize, 560, 180, 180, 2 * horizon}, config.seed), horizon};

  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  Eigen::MatrixXd inputs(kEncodingSize, n), targets(2 * horizon, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pair = dataset[static_cast<size_t>(i)];
    require(pair.future.size() == horizon, "naive network needs equal horizons");
    const HistoryEncoding enc = encode_history(pair.history, true);
    inputs.col(i) = enc.values;
    for (int k = 0; k < horizon; ++k) targets.col(i).segment<2>(2 * k) = pair.future.point(k) - enc.reference;
  }

  std::mt19937_64 rng(config.seed ^ 0x51ed270b2f1e4c3dULL);
  Eigen::VectorXd params = model.net.parameters();
  Adam adam(params.size(), config.step);
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Mlp::Tape tape;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd x(kEncodingSize, count), y(2 * horizon, count);
      for (Eigen::Index b = 0; b < count; ++b) {
        x.col(b) = inputs.col(order[static_cast<size_t>(start + b)]);
        y.col(b) = targets.col(order[static_cast<size_t>(start + b)]);
      }
      const Eigen::MatrixXd pred = model.net.forward(x, tape);
      const Eigen::MatrixXd d_out = 2.0 * (pred - y) / static_cast<double>(pred.size());
      adam.update(params, model.net.backward(tape, d_out));
      model.net.set_parameters(params);
    }
  }
  return model;
}

}  // namespace trajpred
