#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace trajpred {

using Matrix2Xd = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using MatrixX2d = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kDefaultRidge = 1e-4;

/// Squared-exponential kernels exp(-gamma (t - c_i)^2) against a list of
/// time centers. Templated so tests can evaluate the same kernel in extended
/// precision.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rbf_kernels(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& centers, Scalar gamma, Scalar t) {
  using std::exp;
  return (centers.array() - t).square().unaryExpr([gamma](Scalar d2) { return exp(-gamma * d2); });
}

/// First and second time derivatives of rbf_kernels.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rbf_kernel_derivatives(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& centers, Scalar gamma, Scalar t, int order) {
  using std::exp;
  const auto d = (t - centers.array()).eval();
  const auto k = (-gamma * d.square()).exp().eval();
  if (order == 1) return (Scalar(-2) * gamma * d * k).matrix();
  return ((Scalar(4) * gamma * gamma * d.square() - Scalar(2) * gamma) * k).matrix();
}

/// Fixed basis phi(t) of M time kernels sharing one length-scale.
class RbfFeatureMap {
 public:
  RbfFeatureMap(Eigen::VectorXd centers, double gamma);

  /// M centers spaced uniformly on [0, horizon], endpoints included. A single
  /// center sits at t = 0.
  static RbfFeatureMap uniform(int m, double horizon, double gamma);

  const Eigen::VectorXd& centers() const { return centers_; }
  double gamma() const { return gamma_; }
  int size() const { return static_cast<int>(centers_.size()); }

  bool operator==(const RbfFeatureMap&) const = default;

 private:
  Eigen::VectorXd centers_;
  double gamma_;
};

/// Timestamped 2-D samples (seconds, meters).
struct TimedPath {
  Eigen::VectorXd times;
  MatrixX2d points;

  TimedPath() = default;
  TimedPath(Eigen::VectorXd t, MatrixX2d xy);

  Eigen::Index size() const { return times.size(); }
  Eigen::Vector2d point(Eigen::Index i) const { return points.row(i).transpose(); }

  /// Samples [first, first + count).
  TimedPath segment(Eigen::Index first, Eigen::Index count) const;
  /// Same samples with time shifted so that `origin` maps to t = 0.
  TimedPath shifted_time(double origin) const;
  TimedPath translated(const Eigen::Vector2d& offset) const;
};

/// xi(t) = [wx^T phi(t), wy^T phi(t)]; column 0 of `weights` is wx.
struct ContinuousTrajectory {
  MatrixX2d weights;
  RbfFeatureMap features;

  ContinuousTrajectory(MatrixX2d w, RbfFeatureMap fmap);
};

Eigen::VectorXd eval_features(const RbfFeatureMap& fmap, double t);

/// d^order phi / dt^order for order 1 or 2.
Eigen::VectorXd eval_feature_derivative(const RbfFeatureMap& fmap, double t, int order);

/// Rows are phi(t_n)^T.
Eigen::MatrixXd feature_matrix(const RbfFeatureMap& fmap, const Eigen::VectorXd& times);

/// Closed-form ridge fit W = (Phi^T Phi + lambda I)^-1 Phi^T Y. Throws
/// IllConditionedFit when lambda = 0 and Phi has rank < M.
ContinuousTrajectory fit_ridge(const TimedPath& path, const RbfFeatureMap& fmap,
                               double lambda = kDefaultRidge);

/// Sum of squared residuals plus lambda ||W||_F^2.
double ridge_objective(const TimedPath& path, const RbfFeatureMap& fmap, double lambda,
                       const MatrixX2d& weights);

Eigen::Vector2d eval_trajectory(const ContinuousTrajectory& traj, double t);

/// Positions at each time, one row per time.
MatrixX2d eval_trajectory(const ContinuousTrajectory& traj, const Eigen::VectorXd& times);

}  // namespace trajpred
