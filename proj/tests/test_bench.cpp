#include "trajpred/bench.hpp"
#include "trajpred/error.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <set>

namespace trajpred {
namespace {

const SimulatedScenario& scenario() {
  static const SimulatedScenario s = generate_simulated(ScenarioConfig{});
  return s;
}

// One-component mixture with the given weights and unit scales.
TrajectoryMixture single(const MatrixX2d& w, const RbfFeatureMap& fmap, const Eigen::Vector2d& origin = {0, 0}) {
  const MatrixNormalComponent c(w, Eigen::VectorXd::Ones(w.rows()), Eigen::Matrix2d::Identity());
  return TrajectoryMixture(Eigen::VectorXd::Ones(1), {c}, fmap, origin);
}

// Truth sampled exactly from a mixture component's mean path.
TimedPath mean_path(const TrajectoryMixture& mix, int r) {
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(15, 1.0, 15.0);
  MatrixX2d xy(15, 2);
  for (int k = 0; k < 15; ++k) xy.row(k) = mix.mean_position(r, t[k]).transpose();
  return TimedPath(t, xy);
}

TEST(FloorPlan, HallwayRasterizes) {
  const OccupancyGrid g = hallway_plan().rasterize();
  EXPECT_EQ(g.width, 80);
  EXPECT_EQ(g.height, 60);
  EXPECT_EQ(g.value_at(Eigen::Vector2d(4.0, 7.0)), 0.0);
  EXPECT_EQ(g.value_at(Eigen::Vector2d(12.0, 7.0)), 1.0);  // first obstacle
  EXPECT_EQ(g.value_at(Eigen::Vector2d(1.0, 1.0)), 1.0);   // outside the hallway
  EXPECT_EQ(hallway_plan().terminals.size(), 2u);
}

TEST(FloorPlan, ParseErrors) {
  auto category = [](const std::string& text) {
    try {
      parse_floor_plan(text);
    } catch (const Error& e) {
      return e.category();
    }
    return ErrorCategory::Io;
  };
  const std::string base = "width_m = 10\nheight_m = 10\nresolution = 0.5\nfree = 0 0 10 10\n"
                           "node = A 1 1\nnode = B 9 9\nedge = A B\n";
  EXPECT_NO_THROW(parse_floor_plan(base + "terminal = A\nterminal = B\n"));
  EXPECT_EQ(category(base + "terminal = A\n"), ErrorCategory::MalformedFile);
  EXPECT_EQ(category(base + "terminal = A\nterminal = B\ncolour = red\n"), ErrorCategory::MalformedFile);
  EXPECT_EQ(category(base + "edge = A Z\nterminal = A\nterminal = B\n"), ErrorCategory::MalformedFile);
}

TEST(Simulation, DefaultScenarioShape) {
  const auto& s = scenario();
  ASSERT_EQ(s.pairs.size(), 200u);
  std::set<std::string> ids;
  for (const auto& p : s.pairs) {
    EXPECT_EQ(p.history.size(), 10);
    EXPECT_EQ(p.future.size(), 15);
    EXPECT_DOUBLE_EQ(p.future.times[0] - p.history.times[9], 1.0);
    ids.insert(p.id);
  }
  EXPECT_EQ(ids.size(), 200u);
}

TEST(Simulation, FuturesStayInFreeSpace) {
  const auto& s = scenario();
  for (const auto& p : s.pairs) {
    for (Eigen::Index i = 0; i < p.future.size(); ++i) EXPECT_LT(s.grid.value_at(p.future.point(i)), 0.5) << p.id;
    for (Eigen::Index i = 0; i < p.history.size(); ++i) EXPECT_LT(s.grid.value_at(p.history.point(i)), 0.5);
  }
}

TEST(Simulation, DeterministicPerSeed) {
  ScenarioConfig cfg;
  cfg.pairs = 30;
  const SimulatedScenario a = generate_simulated(cfg), b = generate_simulated(cfg);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].id, b.pairs[i].id);
    EXPECT_EQ(a.pairs[i].history.points, b.pairs[i].history.points);
    EXPECT_EQ(a.pairs[i].future.points, b.pairs[i].future.points);
  }
  cfg.seed = 43;
  EXPECT_NE(generate_simulated(cfg).pairs[0].history.points, a.pairs[0].history.points);
}

TEST(Simulation, RejectsUnknownPlan) {
  ScenarioConfig cfg;
  cfg.floor_plan = "office";
  EXPECT_THROW(generate_simulated(cfg), Error);
  cfg = {};
  cfg.dt = 0.0;
  EXPECT_THROW(generate_simulated(cfg), Error);
}

TEST(SplitIntoPairs, WindowsAndStride) {
  MatrixX2d xy(30, 2);
  for (int i = 0; i < 30; ++i) xy.row(i) << i, 0;
  const TimedPath path(Eigen::VectorXd::LinSpaced(30, 0.0, 29.0), xy);
  const auto pairs = split_into_pairs({{"p", path}, {"short", path.segment(0, 20)}}, 10, 15, 5);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].id, "p_5");
  EXPECT_EQ(pairs[1].history.point(0).x(), 5.0);
  EXPECT_EQ(pairs[1].future.point(0).x(), 15.0);
  EXPECT_EQ(future_frame(pairs[1]).times[0], 1.0);
}

TEST(Metrics, AdeAndFdeHandCases) {
  std::mt19937_64 rng(1);
  const TrajectoryMixture mix = testing::random_mixture(rng, 8, 2).translated(Eigen::Vector2d(2.0, -1.0));
  const TimedPath truth = mean_path(mix, 1);
  EXPECT_NEAR(metric_ade(mix, truth), 0.0, 1e-12);
  EXPECT_NEAR(metric_fde(mix, truth), 0.0, 1e-12);
  const TimedPath shifted = truth.translated(Eigen::Vector2d(3.0, 4.0));
  const TrajectoryMixture one = single(mix.component(1).location(), mix.features(), mix.origin());
  EXPECT_NEAR(metric_ade(one, shifted), 5.0, 1e-12);
  EXPECT_NEAR(metric_fde(one, shifted), 5.0, 1e-12);

  // Final offset (0, 2) only.
  TimedPath end = truth;
  end.points(14, 1) += 2.0;
  EXPECT_NEAR(metric_fde(one, end), 2.0, 1e-12);
  // Earlier points do not affect FDE.
  TimedPath early = truth;
  early.points(3, 0) += 7.0;
  EXPECT_NEAR(metric_fde(one, early), 0.0, 1e-12);
  EXPECT_NEAR(metric_ade(one, early), 7.0 / 15.0, 1e-12);
}

TEST(Metrics, AdeIsTranslationInvariant) {
  std::mt19937_64 rng(2);
  const TrajectoryMixture mix = testing::random_mixture(rng, 8, 2);
  const TimedPath truth = mean_path(mix, 0).translated(Eigen::Vector2d(0.3, -0.8));
  const Eigen::Vector2d d(11.0, -4.0);
  EXPECT_NEAR(metric_ade(mix, truth), metric_ade(mix.translated(d), truth.translated(d)), 1e-12);
  EXPECT_NEAR(metric_fde(mix, truth), metric_fde(mix.translated(d), truth.translated(d)), 1e-12);
}

TEST(Metrics, AverageLikelihood) {
  const RbfFeatureMap fmap = RbfFeatureMap::uniform(1, 15.0, 1e-12);
  // Flat basis: phi = 1 everywhere, so Sigma = U V.
  const MatrixNormalComponent c(MatrixX2d::Zero(1, 2), Eigen::VectorXd::Ones(1), Eigen::Matrix2d::Identity());
  const TrajectoryMixture mix(Eigen::VectorXd::Ones(1), {c}, fmap);
  const TimedPath truth(Eigen::VectorXd::LinSpaced(15, 1.0, 15.0), MatrixX2d::Zero(15, 2));
  EXPECT_NEAR(metric_al(mix, truth), 1.0 / (2.0 * std::numbers::pi), 1e-9);
  const MatrixNormalComponent wide(MatrixX2d::Zero(1, 2), Eigen::VectorXd::Constant(1, 4.0), Eigen::Matrix2d::Identity());
  const TrajectoryMixture wmix(Eigen::VectorXd::Ones(1), {wide}, fmap);
  EXPECT_NEAR(metric_al(wmix, truth), 1.0 / (8.0 * std::numbers::pi), 1e-9);
}

TEST(Metrics, AverageLikelihoodMatchesExtendedPrecision) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const TrajectoryMixture mix = testing::random_mixture(rng, 8, 3);
    const TimedPath truth = mean_path(mix, k % 3).translated(Eigen::Vector2d(0.5, 0.2));
    long double total = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
      const PointGaussianMixture pgm = project_at_time(mix, truth.times[i]);
      for (int r = 0; r < pgm.size(); ++r) {
        const Eigen::Matrix2d& s = pgm.covariances[static_cast<size_t>(r)];
        const long double det = static_cast<long double>(s(0, 0)) * s(1, 1) - static_cast<long double>(s(0, 1)) * s(1, 0);
        const long double dx = truth.points(i, 0) - pgm.means[static_cast<size_t>(r)].x();
        const long double dy = truth.points(i, 1) - pgm.means[static_cast<size_t>(r)].y();
        const long double q = (s(1, 1) * dx * dx - 2.0L * s(0, 1) * dx * dy + s(0, 0) * dy * dy) / det;
        total += pgm.weights[r] * std::exp(-0.5L * q) / (2.0L * std::numbers::pi_v<long double> * std::sqrt(det));
      }
    }
    EXPECT_NEAR(metric_al(mix, truth), static_cast<double>(total / truth.size()), 1e-9);
  }
}

TEST(Metrics, ViolationPercentage) {
  EXPECT_EQ(violation_percentage({0.01, 0.2, 0.03, 0.04}, 0.05), 25.0);
  EXPECT_EQ(violation_percentage({0.2, 0.01, 0.03, 0.04}, 0.05), 25.0);
  EXPECT_EQ(violation_percentage({0.05}, 0.05), 0.0);  // strict
  std::mt19937_64 rng(4);
  std::vector<TrajectoryMixture> mixes;
  for (int k = 0; k < 3; ++k) mixes.push_back(testing::random_mixture(rng, 8, 2));
  EXPECT_EQ(metric_cvp(mixes, HilbertField::constant(0.01), CostConfig{}, 0.05), 0.0);
  EXPECT_EQ(metric_cvp(mixes, HilbertField::constant(0.5), CostConfig{}, 0.05), 100.0);
}

TEST(Baselines, ConstantVelocity) {
  MatrixX2d still = MatrixX2d::Constant(10, 2, 2.0);
  const TimedPath stationary(Eigen::VectorXd::LinSpaced(10, 0.0, 9.0), still);
  const TimedPath a = baseline_cv(stationary, 15);
  EXPECT_EQ(a.size(), 15);
  EXPECT_EQ(a.points, MatrixX2d::Constant(15, 2, 2.0));
  EXPECT_EQ(a.times[0], 10.0);

  MatrixX2d line(10, 2);
  for (int i = 0; i < 10; ++i) line.row(i) << i, 1.0;
  const TimedPath b = baseline_cv(TimedPath(Eigen::VectorXd::LinSpaced(10, 0.0, 9.0), line), 3);
  EXPECT_TRUE(b.point(2).isApprox(Eigen::Vector2d(12.0, 1.0)));

  // Arc of radius 5: velocity is the chord over the elapsed time.
  MatrixX2d arc(10, 2);
  for (int i = 0; i < 10; ++i) arc.row(i) << 5.0 * std::cos(0.1 * i), 5.0 * std::sin(0.1 * i);
  const TimedPath c = baseline_cv(TimedPath(Eigen::VectorXd::LinSpaced(10, 0.0, 9.0), arc), 4);
  const Eigen::Vector2d v = (arc.row(9) - arc.row(0)).transpose() / 9.0;
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(c.point(k).isApprox(arc.row(9).transpose() + (k + 1) * v, 1e-14));
  // The chord of a circular arc is parallel to the tangent at its midpoint.
  const Eigen::Vector2d tangent(-std::sin(0.45), std::cos(0.45));
  EXPECT_NEAR(std::abs(v.normalized().dot(tangent)), 1.0, 1e-12);

  EXPECT_THROW(baseline_cv(stationary.segment(0, 1), 3), Error);
}

TEST(Baselines, DisplacementError) {
  MatrixX2d p = MatrixX2d::Zero(3, 2), t = MatrixX2d::Zero(3, 2);
  t.row(2) << 3.0, 4.0;
  const DisplacementError e = displacement_error(p, t);
  EXPECT_DOUBLE_EQ(e.ade, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(e.fde, 5.0);
}

TEST(Baselines, NaiveNnOverfitsOnePair) {
  NaiveNnConfig cfg;
  cfg.epochs = 1500;
  const std::vector<PathPair> one{scenario().pairs.front()};
  const NaiveNnPredictor nn = baseline_nn_naive(one, cfg);
  EXPECT_LT(nn.mse(one), 1e-3);
  EXPECT_EQ(nn.predict(one[0].history).rows(), 15);
  const NaiveNnPredictor again = baseline_nn_naive(one, cfg);
  EXPECT_EQ(again.net, nn.net);
}

}  // namespace
}  // namespace trajpred
