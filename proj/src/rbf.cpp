#include "trajpred/rbf.hpp"

#include "trajpred/error.hpp"

#include <string>

namespace trajpred {

RbfFeatureMap::RbfFeatureMap(Eigen::VectorXd centers, double gamma)
    : centers_(std::move(centers)), gamma_(gamma) {
  require(centers_.size() >= 1, "feature map needs at least one center");
  require(std::isfinite(gamma_) && gamma_ > 0.0, "feature map gamma must be positive");
  for (Eigen::Index i = 0; i < centers_.size(); ++i) {
    require(std::isfinite(centers_[i]), "feature map centers must be finite");
    if (i > 0) require(centers_[i] > centers_[i - 1], "feature map centers must be strictly increasing");
  }
}

RbfFeatureMap RbfFeatureMap::uniform(int m, double horizon, double gamma) {
  require(m >= 1, "feature map needs at least one center");
  require(horizon > 0.0, "horizon must be positive");
  if (m == 1) return RbfFeatureMap(Eigen::VectorXd::Zero(1), gamma);
  return RbfFeatureMap(Eigen::VectorXd::LinSpaced(m, 0.0, horizon), gamma);
}

TimedPath::TimedPath(Eigen::VectorXd t, MatrixX2d xy) : times(std::move(t)), points(std::move(xy)) {
  require(times.size() >= 1, "timed path needs at least one sample");
  require(times.size() == points.rows(), "timed path times/points length mismatch");
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1],
            "timed path timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
  }
  require(times.allFinite() && points.allFinite(), "timed path samples must be finite");
}

TimedPath TimedPath::segment(Eigen::Index first, Eigen::Index count) const {
  require(first >= 0 && count >= 1 && first + count <= size(), "path segment out of range");
  return TimedPath(times.segment(first, count), points.middleRows(first, count));
}

TimedPath TimedPath::shifted_time(double origin) const {
  return TimedPath(times.array() - origin, points);
}

TimedPath TimedPath::translated(const Eigen::Vector2d& offset) const {
  MatrixX2d moved = points.rowwise() + offset.transpose();
  return TimedPath(times, std::move(moved));
}

ContinuousTrajectory::ContinuousTrajectory(MatrixX2d w, RbfFeatureMap fmap)
    : weights(std::move(w)), features(std::move(fmap)) {
  require(weights.rows() == features.size(), "trajectory weights must have one row per feature");
}

Eigen::VectorXd eval_features(const RbfFeatureMap& fmap, double t) {
  return rbf_kernels<double>(fmap.centers(), fmap.gamma(), t);
}

Eigen::VectorXd eval_feature_derivative(const RbfFeatureMap& fmap, double t, int order) {
  require(order == 1 || order == 2, "feature derivative order must be 1 or 2");
  return rbf_kernel_derivatives<double>(fmap.centers(), fmap.gamma(), t, order);
}

Eigen::MatrixXd feature_matrix(const RbfFeatureMap& fmap, const Eigen::VectorXd& times) {
  Eigen::MatrixXd phi(times.size(), fmap.size());
  for (Eigen::Index n = 0; n < times.size(); ++n) phi.row(n) = eval_features(fmap, times[n]).transpose();
  return phi;
}

ContinuousTrajectory fit_ridge(const TimedPath& path, const RbfFeatureMap& fmap, double lambda) {
  require(path.size() >= 1, "ridge fit needs at least one sample");
  require(std::isfinite(lambda) && lambda >= 0.0, "ridge lambda must be non-negative");
  const Eigen::MatrixXd phi = feature_matrix(fmap, path.times);
  const int m = fmap.size();

  if (lambda == 0.0) {
    // Unregularized: solve the least-squares problem on Phi directly so the
    // normal equations do not square its condition number.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    if (qr.rank() < m) {
      fail(ErrorCategory::IllConditionedFit,
           "ridge fit with lambda = 0 has rank " + std::to_string(qr.rank()) + " < M = " + std::to_string(m));
    }
    return ContinuousTrajectory(qr.solve(path.points), fmap);
  }

  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = phi.transpose() * path.points;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) return ContinuousTrajectory(llt.solve(rhs), fmap);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) fail(ErrorCategory::IllConditionedFit, "ridge normal equations are singular");
  return ContinuousTrajectory(lu.solve(rhs), fmap);
}

double ridge_objective(const TimedPath& path, const RbfFeatureMap& fmap, double lambda,
                       const MatrixX2d& weights) {
  const Eigen::MatrixXd phi = feature_matrix(fmap, path.times);
  return (path.points - phi * weights).squaredNorm() + lambda * weights.squaredNorm();
}

Eigen::Vector2d eval_trajectory(const ContinuousTrajectory& traj, double t) {
  return traj.weights.transpose() * eval_features(traj.features, t);
}

MatrixX2d eval_trajectory(const ContinuousTrajectory& traj, const Eigen::VectorXd& times) {
  return feature_matrix(traj.features, times) * traj.weights;
}

}  // namespace trajpred
