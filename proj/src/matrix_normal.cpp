#include "trajpred/matrix_normal.hpp"

#include "trajpred/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace trajpred {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log|V| from the lower Cholesky factor.
double log_det_factor(const Eigen::Matrix2d& l) { return 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1))); }

}  // namespace

MatrixNormalComponent::MatrixNormalComponent(MatrixX2d location, Eigen::VectorXd row_scale,
                                             Eigen::Matrix2d col_scale)
    : location_(std::move(location)), row_scale_(std::move(row_scale)), col_scale_(col_scale) {
  require(location_.rows() >= 1, "matrix normal component needs M >= 1");
  require(row_scale_.size() == location_.rows(), "row scale must have one entry per location row");
  require(location_.allFinite() && row_scale_.allFinite() && col_scale_.allFinite(),
          "matrix normal parameters must be finite");
  require((row_scale_.array() > 0.0).all(), "row scale diagonal must be strictly positive");
  row_scale_ = row_scale_.cwiseMax(kScaleFloor);

  const double asym = std::abs(col_scale_(0, 1) - col_scale_(1, 0));
  require(asym <= 1e-12 * std::max(1.0, col_scale_.cwiseAbs().maxCoeff()), "column scale must be symmetric");
  col_scale_(1, 0) = col_scale_(0, 1);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(col_scale_);
  require(eig.eigenvalues().minCoeff() > 0.0, "column scale must be positive definite");
  if (eig.eigenvalues().minCoeff() < kScaleFloor) {
    const Eigen::Vector2d clamped = eig.eigenvalues().cwiseMax(kScaleFloor);
    col_scale_ = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    col_scale_(1, 0) = col_scale_(0, 1);
  }

  Eigen::LLT<Eigen::Matrix2d> llt(col_scale_);
  require(llt.info() == Eigen::Success, "column scale failed Cholesky factorization");
  col_factor_ = llt.matrixL();
}

TrajectoryMixture::TrajectoryMixture(Eigen::VectorXd weights, std::vector<MatrixNormalComponent> components,
                                     RbfFeatureMap features, Eigen::Vector2d origin)
    : weights_(std::move(weights)),
      components_(std::move(components)),
      features_(std::move(features)),
      origin_(origin) {
  require(!components_.empty(), "mixture needs at least one component");
  require(weights_.size() == static_cast<Eigen::Index>(components_.size()),
          "mixture needs one weight per component");
  require(weights_.allFinite() && (weights_.array() >= 0.0).all(), "mixture weights must be non-negative");
  require(std::abs(weights_.sum() - 1.0) <= 1e-9, "mixture weights must sum to 1");
  require(origin_.allFinite(), "mixture origin must be finite");
  for (const auto& c : components_) {
    require(c.rows() == features_.size(), "mixture component dimension must match the feature map");
  }
}

TrajectoryMixture TrajectoryMixture::with_components(std::vector<MatrixNormalComponent> components) const {
  return TrajectoryMixture(weights_, std::move(components), features_, origin_);
}

TrajectoryMixture TrajectoryMixture::translated(const Eigen::Vector2d& offset) const {
  return TrajectoryMixture(weights_, components_, features_, origin_ + offset);
}

Eigen::Vector2d TrajectoryMixture::mean_position(int r, double t) const {
  return component(r).location().transpose() * eval_features(features_, t) + origin_;
}

double mn_logpdf(const MatrixNormalComponent& comp, const MatrixX2d& w) {
  require(w.rows() == comp.rows(), "weight matrix dimension mismatch");
  const int m = comp.rows();
  // Whiten rows by U^-1/2 and columns by L_V^-T; the quadratic form is the
  // squared Frobenius norm of the result.
  const MatrixX2d rows_whitened = (w - comp.location()).array().colwise() / comp.row_scale().array().sqrt();
  const MatrixX2d whitened =
      comp.col_factor().triangularView<Eigen::Lower>().solve(rows_whitened.transpose()).transpose();
  const double log_det_u = comp.row_scale().array().log().sum();
  return -0.5 * whitened.squaredNorm() - m * kLog2Pi - 0.5 * m * log_det_factor(comp.col_factor()) - log_det_u;
}

double mixture_nll(const TrajectoryMixture& mix, const MatrixX2d& w) {
  Eigen::VectorXd terms(mix.size());
  for (int r = 0; r < mix.size(); ++r) terms[r] = std::log(mix.weights()[r]) + mn_logpdf(mix.component(r), w);
  const double peak = terms.maxCoeff();
  if (!std::isfinite(peak)) return -peak;
  return -(peak + std::log((terms.array() - peak).exp().sum()));
}

PointGaussianMixture project_at_time(const TrajectoryMixture& mix, double t) {
  const Eigen::VectorXd phi = eval_features(mix.features(), t);
  PointGaussianMixture out;
  out.weights = mix.weights();
  out.means.reserve(static_cast<size_t>(mix.size()));
  out.covariances.reserve(static_cast<size_t>(mix.size()));
  for (const auto& c : mix.components()) {
    out.means.emplace_back(c.location().transpose() * phi + mix.origin());
    const double spread = phi.cwiseAbs2().dot(c.row_scale());
    out.covariances.emplace_back(spread * c.col_scale());
  }
  return out;
}

double point_mixture_density(const PointGaussianMixture& pgm, const Eigen::Vector2d& x) {
  double density = 0.0;
  for (int r = 0; r < pgm.size(); ++r) {
    const Eigen::Matrix2d& s = pgm.covariances[static_cast<size_t>(r)];
    const Eigen::Vector2d d = x - pgm.means[static_cast<size_t>(r)];
    const double det = s.determinant();
    const double quad = d.dot(s.inverse() * d);
    density += pgm.weights[r] * std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
  }
  return density;
}

MatrixX2d sample_weights(const TrajectoryMixture& mix, std::mt19937_64& rng, int* component) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  int r = 0;
  double acc = mix.weights()[0];
  while (r + 1 < mix.size() && u >= acc) acc += mix.weights()[++r];
  if (component) *component = r;

  const auto& c = mix.component(r);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixX2d z(c.rows(), 2);
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  return c.location() + c.row_scale().cwiseSqrt().asDiagonal() * z * c.col_factor().transpose();
}

ContinuousTrajectory sample_trajectory(const TrajectoryMixture& mix, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return ContinuousTrajectory(sample_weights(mix, rng), mix.features());
}

double component_kl(const MatrixNormalComponent& p, const MatrixNormalComponent& q) {
  require(p.rows() == q.rows(), "KL between components of different dimension");
  const int m = p.rows();
  const auto& lq = q.col_factor();
  // tr(Vq^-1 Vp), with Vq^-1 Vp computed through the factor of Vq.
  const Eigen::Matrix2d lq_inv_lp = lq.triangularView<Eigen::Lower>().solve(p.col_factor());
  const double trace_v = lq_inv_lp.squaredNorm();
  const double trace_u = (p.row_scale().array() / q.row_scale().array()).sum();

  const MatrixX2d delta = p.location() - q.location();
  const MatrixX2d rows_whitened = delta.array().colwise() / q.row_scale().array().sqrt();
  const double mahalanobis =
      lq.triangularView<Eigen::Lower>().solve(rows_whitened.transpose()).squaredNorm();

  const double log_det_q = m * log_det_factor(lq) + 2.0 * q.row_scale().array().log().sum();
  const double log_det_p = m * log_det_factor(p.col_factor()) + 2.0 * p.row_scale().array().log().sum();
  return 0.5 * (trace_v * trace_u + mahalanobis - 2.0 * m + log_det_q - log_det_p);
}

double mixture_kl(const TrajectoryMixture& p, const TrajectoryMixture& q) {
  require(p.size() == q.size(), "mixture KL needs matching component counts");
  require((p.weights() - q.weights()).cwiseAbs().maxCoeff() <= 1e-12, "mixture KL needs identical weights");
  require(p.features() == q.features(), "mixture KL needs a shared feature map");
  require(p.origin() == q.origin(), "mixture KL needs a shared origin");
  double kl = 0.0;
  for (int r = 0; r < p.size(); ++r) kl += p.weights()[r] * component_kl(p.component(r), q.component(r));
  return kl;
}

}  // namespace trajpred
