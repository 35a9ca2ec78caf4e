#include "trajpred/error.hpp"
#include "trajpred/parameters.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace trajpred {
namespace {

TEST(Parameters, LayoutSizes) {
  std::mt19937_64 rng(1);
  const TrajectoryMixture mix = testing::random_mixture(rng, 8, 2);
  const ParameterLayout layout = layout_of(mix);
  EXPECT_EQ(layout.per_component(), 27);
  EXPECT_EQ(layout.size(), 54);
  EXPECT_EQ(layout.log_row_scale(1), 27 + 16);
  EXPECT_EQ(layout.col_factor(1), 27 + 24);
  EXPECT_EQ(pack_parameters(mix).size(), 54);
}

TEST(Parameters, PackUnpackRoundTrip) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const TrajectoryMixture mix =
        testing::random_mixture(rng, 1 + k % 8, 1 + k % 3).translated(Eigen::Vector2d(k, -k));
    const TrajectoryMixture back = unpack_parameters(pack_parameters(mix), mix);
    EXPECT_EQ(back.weights(), mix.weights());
    EXPECT_EQ(back.origin(), mix.origin());
    for (int r = 0; r < mix.size(); ++r) {
      EXPECT_EQ(back.component(r).location(), mix.component(r).location());
      EXPECT_TRUE(back.component(r).row_scale().isApprox(mix.component(r).row_scale(), 1e-14));
      EXPECT_TRUE(back.component(r).col_scale().isApprox(mix.component(r).col_scale(), 1e-14));
    }
    const Eigen::VectorXd p = pack_parameters(mix);
    EXPECT_TRUE(pack_parameters(unpack_parameters(p, mix)).isApprox(p, 1e-13));
  }
}

TEST(Parameters, IdentityScalesPackToZeros) {
  const MatrixNormalComponent c(MatrixX2d::Zero(3, 2), Eigen::VectorXd::Ones(3), Eigen::Matrix2d::Identity());
  const TrajectoryMixture mix(Eigen::VectorXd::Ones(1), {c}, RbfFeatureMap::uniform(3, 15.0, 0.05));
  EXPECT_EQ(pack_parameters(mix), Eigen::VectorXd::Zero(12));
}

TEST(Parameters, EveryVectorIsValid) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  const TrajectoryMixture like = testing::random_mixture(rng, 4, 2);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd p(layout_of(like).size());
    for (auto& v : p) v = n(rng);
    const TrajectoryMixture mix = unpack_parameters(p, like);
    for (const auto& c : mix.components()) {
      EXPECT_GT(c.row_scale().minCoeff(), 0.0);
      EXPECT_GT(c.col_scale().determinant(), 0.0);
    }
  }
  EXPECT_THROW(unpack_parameters(Eigen::VectorXd::Zero(3), like), Error);
  Eigen::VectorXd bad = pack_parameters(like);
  bad[0] = std::nan("");
  EXPECT_THROW(unpack_parameters(bad, like), Error);
}

TEST(Parameters, KlGradientMatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const TrajectoryMixture prior = testing::random_mixture(rng, 8, 2);
    std::vector<MatrixNormalComponent> comps;
    for (int r = 0; r < 2; ++r) comps.push_back(testing::random_component(rng, 8));
    const TrajectoryMixture post = prior.with_components(comps);
    const Eigen::VectorXd g = mixture_kl_gradient(post, prior);
    const Eigen::VectorXd theta = pack_parameters(post);
    for (int d = 0; d < 10; ++d) {
      Eigen::VectorXd dir(theta.size());
      for (auto& v : dir) v = n(rng);
      dir.normalize();
      const double h = 1e-5;
      const double fd = (mixture_kl(unpack_parameters(theta + h * dir, prior), prior) -
                         mixture_kl(unpack_parameters(theta - h * dir, prior), prior)) /
                        (2 * h);
      EXPECT_NEAR(g.dot(dir), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Parameters, KlGradientVanishesAtPrior) {
  std::mt19937_64 rng(5);
  const TrajectoryMixture prior = testing::random_mixture(rng, 8, 2);
  EXPECT_LT(mixture_kl_gradient(prior, prior).cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace
}  // namespace trajpred
