#pragma once

#include "trajpred/rbf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace trajpred {

/// Smallest admissible diagonal entry of U and eigenvalue of V.
inline constexpr double kScaleFloor = 1e-10;

/// MN(location, U, V) over M x 2 weight matrices, with U diagonal. Equivalent
/// to N(vec(location), V kron U) under column stacking.
class MatrixNormalComponent {
 public:
  /// Rejects non-finite input, non-positive diag(U), asymmetric or
  /// non-positive-definite V. Positive values below kScaleFloor are raised to it.
  MatrixNormalComponent(MatrixX2d location, Eigen::VectorXd row_scale, Eigen::Matrix2d col_scale);

  const MatrixX2d& location() const { return location_; }
  const Eigen::VectorXd& row_scale() const { return row_scale_; }
  const Eigen::Matrix2d& col_scale() const { return col_scale_; }
  /// Lower Cholesky factor of V.
  const Eigen::Matrix2d& col_factor() const { return col_factor_; }
  int rows() const { return static_cast<int>(location_.rows()); }

  bool operator==(const MatrixNormalComponent& other) const {
    return location_ == other.location_ && row_scale_ == other.row_scale_ && col_scale_ == other.col_scale_;
  }

 private:
  MatrixX2d location_;
  Eigen::VectorXd row_scale_;
  Eigen::Matrix2d col_scale_;
  Eigen::Matrix2d col_factor_;
};

/// Mixture of matrix normal weight distributions over a shared time basis.
///
/// `origin` is a world-space translation added to every mean path. Priors
/// predicted from centered histories carry the reference coordinate here, so
/// de-centering is exact rather than approximated through the RBF weights.
class TrajectoryMixture {
 public:
  TrajectoryMixture(Eigen::VectorXd weights, std::vector<MatrixNormalComponent> components,
                    RbfFeatureMap features, Eigen::Vector2d origin = Eigen::Vector2d::Zero());

  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<MatrixNormalComponent>& components() const { return components_; }
  const MatrixNormalComponent& component(int r) const { return components_[static_cast<size_t>(r)]; }
  const RbfFeatureMap& features() const { return features_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  int size() const { return static_cast<int>(components_.size()); }

  /// Same weights, basis and origin with new components.
  TrajectoryMixture with_components(std::vector<MatrixNormalComponent> components) const;
  TrajectoryMixture translated(const Eigen::Vector2d& offset) const;

  /// World-space mean of component r at time t.
  Eigen::Vector2d mean_position(int r, double t) const;

  bool operator==(const TrajectoryMixture&) const = default;

 private:
  Eigen::VectorXd weights_;
  std::vector<MatrixNormalComponent> components_;
  RbfFeatureMap features_;
  Eigen::Vector2d origin_;
};

/// Time slice of a trajectory mixture: sum_r alpha_r N(mu_r, Sigma_r).
struct PointGaussianMixture {
  Eigen::VectorXd weights;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covariances;

  int size() const { return static_cast<int>(means.size()); }
};

double mn_logpdf(const MatrixNormalComponent& comp, const MatrixX2d& w);

/// -log sum_r alpha_r MN(w | component r), evaluated with log-sum-exp. The
/// mixture origin does not enter: w lives in the weight frame.
double mixture_nll(const TrajectoryMixture& mix, const MatrixX2d& w);

/// mu_r = M_r^T phi(t) + origin, Sigma_r = (phi^T U_r phi) V_r.
PointGaussianMixture project_at_time(const TrajectoryMixture& mix, double t);

double point_mixture_density(const PointGaussianMixture& pgm, const Eigen::Vector2d& x);

/// Draws a component index from alpha, then W = M + U^1/2 Z L_V^T.
MatrixX2d sample_weights(const TrajectoryMixture& mix, std::mt19937_64& rng, int* component = nullptr);

/// Deterministic single draw. The returned trajectory is in the weight frame;
/// add mix.origin() to its positions for world coordinates.
ContinuousTrajectory sample_trajectory(const TrajectoryMixture& mix, std::uint64_t rng_seed);

/// KL(p || q) between the equivalent 2M-dimensional Gaussians.
double component_kl(const MatrixNormalComponent& p, const MatrixNormalComponent& q);

/// sum_r alpha_r KL(p_r || q_r); p and q must share alpha, basis and origin.
double mixture_kl(const TrajectoryMixture& p, const TrajectoryMixture& q);

}  // namespace trajpred
