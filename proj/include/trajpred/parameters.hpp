#pragma once

#include "trajpred/matrix_normal.hpp"

#include <Eigen/Dense>

namespace trajpred {

/// Unconstrained coordinates for the components of a mixture with alpha held
/// fixed. Per component, in order: the 2M location entries (x column then y
/// column), log diag(U) (M entries), then the lower Cholesky factor of V as
/// (log L00, L10, log L11). Every real vector maps to a valid mixture.
struct ParameterLayout {
  int rows = 0;        // M
  int components = 0;  // R

  int per_component() const { return 3 * rows + 3; }
  int size() const { return components * per_component(); }
  int offset(int r) const { return r * per_component(); }
  int location(int r) const { return offset(r); }
  int log_row_scale(int r) const { return offset(r) + 2 * rows; }
  int col_factor(int r) const { return offset(r) + 3 * rows; }
};

ParameterLayout layout_of(const TrajectoryMixture& mix);

Eigen::VectorXd pack_parameters(const TrajectoryMixture& mix);

/// Inverse of pack_parameters; weights, basis and origin come from `like`.
TrajectoryMixture unpack_parameters(const Eigen::VectorXd& params, const TrajectoryMixture& like);

/// Gradient of mixture_kl(unpack(params), prior) in packed coordinates.
Eigen::VectorXd mixture_kl_gradient(const TrajectoryMixture& posterior, const TrajectoryMixture& prior);

}  // namespace trajpred
