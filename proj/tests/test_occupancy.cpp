#include "trajpred/error.hpp"
#include "trajpred/occupancy.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

namespace trajpred {
namespace {

// Direct sum over every inducing point, no windowing.
double dense_logit(const HilbertField& f, const Eigen::Vector2d& x) {
  const Eigen::Matrix2Xd c = f.inducing_points();
  const Eigen::VectorXd w = f.weights();
  double z = f.bias();
  for (Eigen::Index k = 0; k < c.cols(); ++k) z += w[k] * std::exp(-f.gamma() * (x - c.col(k)).squaredNorm());
  return z;
}

HilbertField random_field(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 2.0);
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(9, 0.0, 8.0);
  const Eigen::VectorXd ys = Eigen::VectorXd::LinSpaced(7, -1.0, 5.0);
  Eigen::MatrixXd w(7, 9);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = n(rng);
  return HilbertField(xs, ys, w, -1.0, 0.8);
}

TEST(GridFiles, CsvRowsAreLowestYFirst) {
  const OccupancyGrid g = parse_grid_csv("0,1,0\n1,0.5,0\n", {Eigen::Vector2d(1.0, 2.0), 0.5});
  EXPECT_EQ(g.width, 3);
  EXPECT_EQ(g.height, 2);
  EXPECT_EQ(g.at(1, 0), 1.0);
  EXPECT_EQ(g.at(0, 1), 1.0);
  EXPECT_TRUE(g.cell_center(0, 0).isApprox(Eigen::Vector2d(1.25, 2.25)));
  EXPECT_EQ(g.value_at(Eigen::Vector2d(1.6, 2.1)), 1.0);
  EXPECT_EQ(g.value_at(Eigen::Vector2d(-3.0, 0.0)), 1.0);  // off the grid
  EXPECT_TRUE(g.occupied(1, 1));
}

TEST(GridFiles, PgmDarkIsOccupied) {
  const OccupancyGrid g = parse_grid_pgm("P2\n# comment\n2 2\n255\n0 255\n255 51\n");
  EXPECT_EQ(g.at(0, 0), 1.0);
  EXPECT_EQ(g.at(1, 0), 0.0);
  EXPECT_NEAR(g.at(1, 1), 0.8, 1e-12);
}

TEST(GridFiles, MalformedInputs) {
  auto category = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.category();
    }
    return ErrorCategory::Io;
  };
  EXPECT_EQ(category([] { parse_grid_csv(""); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { parse_grid_csv("0,1\n0\n"); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { parse_grid_csv("0,x\n"); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { parse_grid_csv("0,1.5\n"); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { parse_grid_pgm("P5\n1 1\n255\n0\n"); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { parse_grid_pgm("P2\n2 1\n255\n0\n"); }), ErrorCategory::MalformedFile);
  EXPECT_EQ(category([] { load_grid("/nonexistent/grid.csv"); }), ErrorCategory::MissingArtifact);
  const auto dir = testing::scratch_dir("grid_empty");
  std::ofstream(dir / "empty.csv").close();
  EXPECT_EQ(category([&] { load_grid(dir / "empty.csv"); }), ErrorCategory::MalformedFile);
}

TEST(GridFiles, CsvRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd cells(12);
  for (auto& v : cells) v = u(rng);
  const OccupancyGrid g(4, 3, 0.25, Eigen::Vector2d(-1.0, 3.0), cells);
  const auto dir = testing::scratch_dir("grid_round");
  save_grid_csv(g, dir / "g.csv");
  const OccupancyGrid back = load_grid(dir / "g.csv", {g.origin, g.resolution});
  EXPECT_EQ(back.cells, g.cells);
  EXPECT_EQ(back.width, 4);
}

TEST(HilbertField, WindowedQueryMatchesDenseSum) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.0, 12.0);
  for (int f = 0; f < 5; ++f) {
    const HilbertField field = random_field(rng);
    for (int k = 0; k < 200; ++k) {
      const Eigen::Vector2d x(u(rng), u(rng));
      EXPECT_NEAR(field.logit(x), dense_logit(field, x), 1e-12);
    }
  }
}

TEST(HilbertField, ZeroWeightsGiveSigmoidOfBias) {
  const HilbertField z(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1), Eigen::Matrix2d::Zero(), 0.0, 1.0);
  EXPECT_EQ(z.query(Eigen::Vector2d(0.3, 0.7)), 0.5);
  const HilbertField low(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1), Eigen::Matrix2d::Zero(), -50.0, 1.0);
  EXPECT_LT(low.query(Eigen::Vector2d(0.3, 0.7)), 1e-20);
  EXPECT_GT(low.query(Eigen::Vector2d(0.3, 0.7)), 0.0);
  EXPECT_NEAR(HilbertField::constant(0.3).query(Eigen::Vector2d(100.0, -4.0)), 0.3, 1e-15);
}

TEST(HilbertField, RejectsUnsortedLattice) {
  EXPECT_THROW(HilbertField(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Matrix2d::Zero(), 0.0, 1.0),
               Error);
  EXPECT_THROW(HilbertField(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1), Eigen::Matrix2d::Zero(), 0.0, -1.0),
               Error);
}

TEST(HilbertField, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 9.0);
  const double h = 1e-6;
  for (int f = 0; f < 4; ++f) {
    const HilbertField field = random_field(rng);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector2d x(u(rng), u(rng));
      const Eigen::Vector2d g = field.query_gradient(x);
      for (int d = 0; d < 2; ++d) {
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        e[d] = h;
        const double fd = (field.query(x + e) - field.query(x - e)) / (2 * h);
        EXPECT_NEAR(g[d], fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
      Eigen::Vector2d g2;
      EXPECT_EQ(field.query_with_gradient(x, g2), field.query(x));
      EXPECT_EQ(g2, g);
    }
  }
}

TEST(HilbertField, LipschitzBoundHolds) {
  std::mt19937_64 rng(4);
  const HilbertField field = random_field(rng);
  // |dp/dx| <= 1/4 sum_k |w_k| |d/dx k(x, c_k)| <= 1/4 sum |w| sqrt(2 gamma / e).
  const double bound = 0.25 * field.weights().cwiseAbs().sum() * std::sqrt(2.0 * field.gamma() / std::exp(1.0));
  std::uniform_real_distribution<double> u(-2.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Vector2d a(u(rng), u(rng)), b(u(rng), u(rng));
    EXPECT_LE(std::abs(field.query(a) - field.query(b)), bound * (a - b).norm() + 1e-15);
  }
}

TEST(FieldTraining, AllFreeGridIsLow) {
  const OccupancyGrid g(12, 10, 0.5, Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(120));
  const HilbertField f = train_field(g);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) EXPECT_LE(f.query(g.cell_center(i, j)), 0.1);
}

TEST(FieldTraining, HalfPlaneSeparatesAwayFromBoundary) {
  const OccupancyGrid g = testing::half_plane_grid();
  const FieldTrainResult res = train_field_with_trace(g);
  const int edge = g.width / 2;  // first free column
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const double p = res.field.query(g.cell_center(i, j));
      if (i <= edge - 3) {
        EXPECT_GE(p, 0.9) << i << "," << j;
      }
      if (i >= edge + 2) {
        EXPECT_LE(p, 0.1) << i << "," << j;
      }
    }
  }
  EXPECT_GE(field_accuracy(res.field, g), 0.95);
  // Probability rises toward the obstacle across the boundary.
  const Eigen::Vector2d mid(edge * g.resolution, 0.5 * g.height * g.resolution);
  EXPECT_LT(res.field.query_gradient(mid).x(), 0.0);
}

TEST(FieldTraining, LossTraceNeverIncreases) {
  const FieldTrainResult res = train_field_with_trace(testing::half_plane_grid());
  ASSERT_GE(res.loss_trace.size(), 2u);
  for (size_t k = 1; k < res.loss_trace.size(); ++k) EXPECT_LE(res.loss_trace[k], res.loss_trace[k - 1]);
  EXPECT_LT(res.loss_trace.back(), 0.25 * res.loss_trace.front());
}

TEST(FieldTraining, DeterministicForFixedSeed) {
  const OccupancyGrid g = testing::half_plane_grid(10, 8);
  FieldTrainConfig cfg;
  cfg.iterations = 100;
  EXPECT_EQ(train_field(g, cfg), train_field(g, cfg));
  FieldTrainConfig other = cfg;
  other.seed = 8;
  EXPECT_FALSE(train_field(g, cfg) == train_field(g, other));
}

}  // namespace
}  // namespace trajpred
