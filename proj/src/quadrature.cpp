#include "trajpred/quadrature.hpp"

#include "trajpred/error.hpp"
#include "trajpred/parameters.hpp"

#include <cmath>
#include <numbers>

namespace trajpred {

HermiteRule hermite_rule(int order) { return hermite_rule_t<double>(order); }

void CostConfig::validate() const {
  require(nodes >= 1 && nodes <= kMaxHermiteOrder, "quadrature node count must lie in [1, 64]");
  require(time_samples >= 1, "cost needs at least one time sample");
  require(std::isfinite(horizon) && horizon > 0.0, "cost horizon must be positive");
}

Eigen::VectorXd CostConfig::sample_times() const {
  Eigen::VectorXd t(time_samples);
  for (int k = 0; k < time_samples; ++k) t[k] = (k + 0.5) * horizon / time_samples;
  return t;
}

double point_cost(const PointGaussianMixture& pgm, const HilbertField& field, const HermiteRule& rule) {
  const int n = rule.order();
  double total = 0.0;
  for (int r = 0; r < pgm.size(); ++r) {
    Eigen::LLT<Eigen::Matrix2d> llt(pgm.covariances[static_cast<size_t>(r)]);
    if (llt.info() != Eigen::Success) fail(ErrorCategory::NumericalFailure, "covariance is not positive definite");
    const Eigen::Matrix2d scaled = std::numbers::sqrt2 * Eigen::Matrix2d(llt.matrixL());
    double component = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::Vector2d z(rule.abscissae[i], rule.abscissae[j]);
        component += rule.weights[i] * rule.weights[j] * field.query(scaled * z + pgm.means[static_cast<size_t>(r)]);
      }
    }
    total += pgm.weights[r] * component / std::numbers::pi;
  }
  return total;
}

CostOperator::CostOperator(const HilbertField& field, const CostConfig& config, const RbfFeatureMap& features)
    : field_(&field), config_(config) {
  config_.validate();
  rule_ = hermite_rule(config_.nodes);
  times_ = config_.sample_times();
  phi_ = feature_matrix(features, times_);
  const int n = rule_.order();
  nodes_.resize(2, n * n);
  node_weights_.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      nodes_.col(i * n + j) = Eigen::Vector2d(rule_.abscissae[i], rule_.abscissae[j]);
      node_weights_[i * n + j] = rule_.weights[i] * rule_.weights[j] / std::numbers::pi;
    }
  }
}

double CostOperator::cost(const TrajectoryMixture& mix) const {
  require(mix.features().size() == phi_.cols(), "cost operator built for a different feature map");
  double total = 0.0;
  for (int r = 0; r < mix.size(); ++r) {
    const auto& c = mix.component(r);
    for (Eigen::Index k = 0; k < phi_.rows(); ++k) {
      const Eigen::VectorXd phi = phi_.row(k).transpose();
      const double spread = phi.cwiseAbs2().dot(c.row_scale());
      const Eigen::Matrix2d map = std::sqrt(2.0 * spread) * c.col_factor();
      const Eigen::Vector2d mu = c.location().transpose() * phi + mix.origin();
      double slice = 0.0;
      for (Eigen::Index q = 0; q < nodes_.cols(); ++q) slice += node_weights_[q] * field_->query(map * nodes_.col(q) + mu);
      total += mix.weights()[r] * slice;
    }
  }
  return total / static_cast<double>(phi_.rows());
}

double CostOperator::cost_and_gradient(const TrajectoryMixture& mix, Eigen::VectorXd& gradient) const {
  require(mix.features().size() == phi_.cols(), "cost operator built for a different feature map");
  const ParameterLayout layout = layout_of(mix);
  const int m = layout.rows;
  gradient.setZero(layout.size());
  const double inv_k = 1.0 / static_cast<double>(phi_.rows());
  double total = 0.0;

  for (int r = 0; r < mix.size(); ++r) {
    const auto& c = mix.component(r);
    const Eigen::Matrix2d& lv = c.col_factor();
    MatrixX2d g_location = MatrixX2d::Zero(m, 2);
    Eigen::VectorXd g_log_u = Eigen::VectorXd::Zero(m);
    Eigen::Matrix2d g_lv = Eigen::Matrix2d::Zero();

    for (Eigen::Index k = 0; k < phi_.rows(); ++k) {
      const Eigen::VectorXd phi = phi_.row(k).transpose();
      const double spread = phi.cwiseAbs2().dot(c.row_scale());
      const double root = std::sqrt(spread);
      const Eigen::Matrix2d map = std::numbers::sqrt2 * root * lv;
      const Eigen::Vector2d mu = c.location().transpose() * phi + mix.origin();

      double slice = 0.0;
      Eigen::Vector2d g_mu = Eigen::Vector2d::Zero();
      Eigen::Matrix2d g_map = Eigen::Matrix2d::Zero();
      for (Eigen::Index q = 0; q < nodes_.cols(); ++q) {
        Eigen::Vector2d grad;
        const double p = field_->query_with_gradient(map * nodes_.col(q) + mu, grad);
        slice += node_weights_[q] * p;
        g_mu += node_weights_[q] * grad;
        g_map += node_weights_[q] * grad * nodes_.col(q).transpose();
      }
      const double scale = mix.weights()[r] * inv_k;
      total += scale * slice;
      g_mu *= scale;
      g_map *= scale;

      g_location += phi * g_mu.transpose();
      // map = sqrt(2) * root * L_V with root = sqrt(phi^T U phi).
      const double g_root = std::numbers::sqrt2 * g_map.cwiseProduct(lv).sum();
      g_lv += std::numbers::sqrt2 * root * g_map;
      g_log_u += (g_root / (2.0 * root)) * phi.cwiseAbs2().cwiseProduct(c.row_scale());
    }

    gradient.segment(layout.location(r), m) = g_location.col(0);
    gradient.segment(layout.location(r) + m, m) = g_location.col(1);
    gradient.segment(layout.log_row_scale(r), m) = g_log_u;
    const int f = layout.col_factor(r);
    gradient[f] = g_lv(0, 0) * lv(0, 0);
    gradient[f + 1] = g_lv(1, 0);
    gradient[f + 2] = g_lv(1, 1) * lv(1, 1);
  }
  return total;
}

Eigen::Matrix2Xd CostOperator::abscissae(const TrajectoryMixture& mix, int r) const {
  const auto& c = mix.component(r);
  Eigen::Matrix2Xd out(2, phi_.rows() * nodes_.cols());
  for (Eigen::Index k = 0; k < phi_.rows(); ++k) {
    const Eigen::VectorXd phi = phi_.row(k).transpose();
    const Eigen::Matrix2d map = std::sqrt(2.0 * phi.cwiseAbs2().dot(c.row_scale())) * c.col_factor();
    const Eigen::Vector2d mu = c.location().transpose() * phi + mix.origin();
    out.middleCols(k * nodes_.cols(), nodes_.cols()) = (map * nodes_).colwise() + mu;
  }
  return out;
}

double trajectory_cost(const TrajectoryMixture& mix, const HilbertField& field, const CostConfig& config) {
  return CostOperator(field, config, mix.features()).cost(mix);
}

Eigen::VectorXd cost_gradient(const TrajectoryMixture& mix, const HilbertField& field, const CostConfig& config) {
  Eigen::VectorXd g;
  CostOperator(field, config, mix.features()).cost_and_gradient(mix, g);
  return g;
}

}  // namespace trajpred
