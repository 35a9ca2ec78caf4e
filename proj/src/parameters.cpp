#include "trajpred/parameters.hpp"

#include "trajpred/error.hpp"

#include <cmath>

namespace trajpred {

ParameterLayout layout_of(const TrajectoryMixture& mix) { return {mix.features().size(), mix.size()}; }

Eigen::VectorXd pack_parameters(const TrajectoryMixture& mix) {
  const ParameterLayout layout = layout_of(mix);
  const int m = layout.rows;
  Eigen::VectorXd params(layout.size());
  for (int r = 0; r < mix.size(); ++r) {
    const auto& c = mix.component(r);
    params.segment(layout.location(r), m) = c.location().col(0);
    params.segment(layout.location(r) + m, m) = c.location().col(1);
    params.segment(layout.log_row_scale(r), m) = c.row_scale().array().log();
    const Eigen::Matrix2d& l = c.col_factor();
    const int f = layout.col_factor(r);
    params[f] = std::log(l(0, 0));
    params[f + 1] = l(1, 0);
    params[f + 2] = std::log(l(1, 1));
  }
  return params;
}

TrajectoryMixture unpack_parameters(const Eigen::VectorXd& params, const TrajectoryMixture& like) {
  const ParameterLayout layout = layout_of(like);
  require(params.size() == layout.size(), "packed parameter vector has the wrong length");
  if (!params.allFinite()) fail(ErrorCategory::NumericalFailure, "packed parameters are not finite");
  const int m = layout.rows;
  std::vector<MatrixNormalComponent> comps;
  comps.reserve(static_cast<size_t>(layout.components));
  for (int r = 0; r < layout.components; ++r) {
    MatrixX2d location(m, 2);
    location.col(0) = params.segment(layout.location(r), m);
    location.col(1) = params.segment(layout.location(r) + m, m);
    Eigen::VectorXd row_scale = params.segment(layout.log_row_scale(r), m).array().exp();
    const int f = layout.col_factor(r);
    Eigen::Matrix2d l;
    l << std::exp(params[f]), 0.0, params[f + 1], std::exp(params[f + 2]);
    const Eigen::Matrix2d v = l * l.transpose();
    if (!row_scale.allFinite() || !v.allFinite() || (row_scale.array() <= 0.0).any()) {
      fail(ErrorCategory::NumericalFailure, "packed scale parameters overflow");
    }
    comps.emplace_back(std::move(location), std::move(row_scale), v);
  }
  return like.with_components(std::move(comps));
}

Eigen::VectorXd mixture_kl_gradient(const TrajectoryMixture& posterior, const TrajectoryMixture& prior) {
  require(posterior.size() == prior.size(), "KL gradient needs matching component counts");
  const ParameterLayout layout = layout_of(posterior);
  const int m = layout.rows;
  Eigen::VectorXd grad(layout.size());
  for (int r = 0; r < posterior.size(); ++r) {
    const auto& p = posterior.component(r);
    const auto& q = prior.component(r);
    const double alpha = posterior.weights()[r];
    const Eigen::Matrix2d vq_inv = q.col_scale().inverse();
    const Eigen::Matrix2d& lp = p.col_factor();

    const MatrixX2d g_loc = (p.location() - q.location()).array().colwise() / q.row_scale().array();
    const MatrixX2d g_location = g_loc * vq_inv;
    const double trace_v = (vq_inv * p.col_scale()).trace();
    const double trace_u = (p.row_scale().array() / q.row_scale().array()).sum();
    const Eigen::VectorXd g_log_u = 0.5 * (trace_v * p.row_scale().array() / q.row_scale().array() - 2.0);
    const Eigen::Matrix2d g_l = trace_u * vq_inv * lp - m * Eigen::Matrix2d(lp.inverse().transpose());

    grad.segment(layout.location(r), m) = alpha * g_location.col(0);
    grad.segment(layout.location(r) + m, m) = alpha * g_location.col(1);
    grad.segment(layout.log_row_scale(r), m) = alpha * g_log_u;
    const int f = layout.col_factor(r);
    grad[f] = alpha * g_l(0, 0) * lp(0, 0);
    grad[f + 1] = alpha * g_l(1, 0);
    grad[f + 2] = alpha * g_l(1, 1) * lp(1, 1);
  }
  return grad;
}

}  // namespace trajpred
