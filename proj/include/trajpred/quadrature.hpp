#pragma once

#include "trajpred/error.hpp"
#include "trajpred/matrix_normal.hpp"
#include "trajpred/occupancy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace trajpred {

/// Physicists' Gauss-Hermite rule: int f(z) e^{-z^2} dz ~ sum_i w_i f(z_i).
template <typename Scalar>
struct HermiteRuleT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> abscissae;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  int order() const { return static_cast<int>(abscissae.size()); }
};

using HermiteRule = HermiteRuleT<double>;

inline constexpr int kMaxHermiteOrder = 64;

/// Newton iteration on the orthonormal Hermite recurrence with the usual
/// asymptotic initial guesses for each root. Roots are found in long double
/// and rounded to Scalar.
template <typename Scalar>
HermiteRuleT<Scalar> hermite_rule_t(int order);

HermiteRule hermite_rule(int order);

struct CostConfig {
  int nodes = 10;         // I = J per axis
  int time_samples = 15;  // K_t
  double horizon = 15.0;  // T, seconds

  void validate() const;
  /// Midpoints (k - 1/2) T / K_t.
  Eigen::VectorXd sample_times() const;
};

/// sum_r alpha_r / pi sum_ij b_i b_j p(sqrt(2) L_r [z_i, z_j] + mu_r).
/// Throws NumericalFailure when a covariance has no Cholesky factor.
double point_cost(const PointGaussianMixture& pgm, const HilbertField& field, const HermiteRule& rule);

/// Time-averaged collision chance of a trajectory mixture, integrated with
/// the midpoint rule over the horizon.
///
/// The value is the raw quadrature sum and is not clamped to [0, 1].
class CostOperator {
 public:
  CostOperator(const HilbertField& field, const CostConfig& config, const RbfFeatureMap& features);

  double cost(const TrajectoryMixture& mix) const;
  /// Cost and its gradient with respect to pack_parameters(mix).
  double cost_and_gradient(const TrajectoryMixture& mix, Eigen::VectorXd& gradient) const;

  /// World-space abscissae of component r at every sample time, 2 x (K_t I^2).
  Eigen::Matrix2Xd abscissae(const TrajectoryMixture& mix, int r) const;

  const CostConfig& config() const { return config_; }
  const HermiteRule& rule() const { return rule_; }

 private:
  const HilbertField* field_;
  CostConfig config_;
  HermiteRule rule_;
  Eigen::VectorXd times_;
  Eigen::MatrixXd phi_;     // K_t x M
  Eigen::Matrix2Xd nodes_;  // 2 x I^2 grid of [z_i, z_j]
  Eigen::VectorXd node_weights_;  // b_i b_j / pi
};

double trajectory_cost(const TrajectoryMixture& mix, const HilbertField& field, const CostConfig& config);

/// Gradient of trajectory_cost in pack_parameters coordinates; alpha is not
/// a free parameter.
Eigen::VectorXd cost_gradient(const TrajectoryMixture& mix, const HilbertField& field, const CostConfig& config);

// ---------------------------------------------------------------------------

template <typename Scalar>
HermiteRuleT<Scalar> hermite_rule_t(int order) {
  using Long = long double;
  require(order >= 1 && order <= kMaxHermiteOrder, "Gauss-Hermite order must lie in [1, 64]");
  const int n = order;
  const Long pim4 = 0.7511255444649424828587030047762276930510L;  // pi^{-1/4}
  std::vector<Long> x(static_cast<size_t>(n)), w(static_cast<size_t>(n));
  Long z = 0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(Long(2 * n + 1)) - 1.85575L * std::pow(Long(2 * n + 1), -0.16667L);
    } else if (i == 1) {
      z -= 1.14L * std::pow(Long(n), 0.426L) / z;
    } else if (i == 2) {
      z = 1.86L * z - 0.86L * x[0];
    } else if (i == 3) {
      z = 1.91L * z - 0.91L * x[1];
    } else {
      z = 2.0L * z - x[static_cast<size_t>(i - 2)];
    }
    Long derivative = 0;
    for (int it = 0; it < 100; ++it) {
      Long p1 = pim4, p2 = 0;
      for (int j = 0; j < n; ++j) {
        const Long p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(Long(2) / Long(j + 1)) * p2 - std::sqrt(Long(j) / Long(j + 1)) * p3;
      }
      derivative = std::sqrt(Long(2 * n)) * p2;
      const Long previous = z;
      z = previous - p1 / derivative;
      if (std::abs(z - previous) <= 1e-17L * std::max(Long(1), std::abs(z))) break;
    }
    x[static_cast<size_t>(i)] = z;
    x[static_cast<size_t>(n - 1 - i)] = -z;
    w[static_cast<size_t>(i)] = w[static_cast<size_t>(n - 1 - i)] = Long(2) / (derivative * derivative);
  }
  if (n % 2 == 1) x[static_cast<size_t>(n / 2)] = 0;

  HermiteRuleT<Scalar> rule;
  rule.abscissae.resize(n);
  rule.weights.resize(n);
  // Roots were generated largest first.
  for (int i = 0; i < n; ++i) {
    rule.abscissae[i] = static_cast<Scalar>(x[static_cast<size_t>(n - 1 - i)]);
    rule.weights[i] = static_cast<Scalar>(w[static_cast<size_t>(n - 1 - i)]);
  }
  return rule;
}

}  // namespace trajpred
