#pragma once

#include "trajpred/occupancy.hpp"
#include "trajpred/rbf.hpp"

#include <string>
#include <vector>

namespace trajpred {

/// Layers of one prediction overlay, all in world coordinates.
struct PlotScene {
  std::string title;
  const OccupancyGrid* grid = nullptr;
  MatrixX2d history;
  MatrixX2d truth;
  std::vector<MatrixX2d> samples;
  Eigen::Matrix2Xd abscissae;
  std::vector<bool> colliding;  // one flag per abscissa column
};

/// Static SVG: occupancy raster, sampled futures, history, truth, then the
/// quadrature abscissae (red when flagged as colliding). y points up.
std::string render_svg(const PlotScene& scene);

}  // namespace trajpred
