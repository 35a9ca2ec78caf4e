#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace trajpred {

/// Row-major occupancy values in [0, 1]. Row j spans y in
/// [origin.y + j res, origin.y + (j + 1) res); column i likewise in x. File
/// loaders keep this order: the first line of a file is row 0 (lowest y).
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::VectorXd cells;

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, double res, Eigen::Vector2d org, Eigen::VectorXd values);

  double at(int col, int row) const { return cells[static_cast<Eigen::Index>(row) * width + col]; }
  double& at(int col, int row) { return cells[static_cast<Eigen::Index>(row) * width + col]; }
  Eigen::Vector2d cell_center(int col, int row) const;
  bool contains(const Eigen::Vector2d& x) const;
  /// Value of the cell containing x; points off the grid read as occupied.
  double value_at(const Eigen::Vector2d& x) const;
  bool occupied(int col, int row) const { return at(col, row) >= 0.5; }
};

struct GridPlacement {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 1.0;
};

/// Reads a grid from CSV (values in [0,1]) or, for a `.pgm` extension, from
/// an ASCII P2 image where dark means occupied: value = 1 - gray / maxval.
OccupancyGrid load_grid(const std::filesystem::path& path, const GridPlacement& placement = {});
OccupancyGrid parse_grid_csv(const std::string& text, const GridPlacement& placement = {});
OccupancyGrid parse_grid_pgm(const std::string& text, const GridPlacement& placement = {});
void save_grid_csv(const OccupancyGrid& grid, const std::filesystem::path& path);

/// Continuous occupancy p(m = 1 | x) = sigmoid(bias + sum_k w_k exp(-gamma |x - c_k|^2)).
///
/// Inducing points c_k lie on the lattice xs x ys. Because the squared
/// exponential separates over axes, a query costs a few exponentials per axis
/// and one small matrix-vector product. Weights are stored with one row per
/// y coordinate; the flattened K-vector order is row-major (x fastest).
/// Lattice axes must be strictly increasing. Inducing points whose kernel
/// along either axis falls below exp(-kKernelCutoff) are skipped.
class HilbertField {
 public:
  static constexpr double kKernelCutoff = 40.0;

  HilbertField(Eigen::VectorXd xs, Eigen::VectorXd ys, Eigen::MatrixXd weights, double bias, double gamma);

  /// Field with no inducing influence: p = sigmoid(bias) everywhere.
  static HilbertField constant(double probability);

  const Eigen::VectorXd& lattice_x() const { return xs_; }
  const Eigen::VectorXd& lattice_y() const { return ys_; }
  const Eigen::MatrixXd& weight_grid() const { return weights_; }
  double bias() const { return bias_; }
  double gamma() const { return gamma_; }

  int inducing_count() const { return static_cast<int>(xs_.size() * ys_.size()); }
  /// 2 x K, row-major lattice order.
  Eigen::Matrix2Xd inducing_points() const;
  Eigen::VectorXd weights() const;

  /// bias + sum_k w_k k(x, c_k).
  double logit(const Eigen::Vector2d& x) const;
  double query(const Eigen::Vector2d& x) const;
  Eigen::Vector2d query_gradient(const Eigen::Vector2d& x) const;
  /// Probability and its spatial gradient from one kernel evaluation.
  double query_with_gradient(const Eigen::Vector2d& x, Eigen::Vector2d& grad) const;

  bool operator==(const HilbertField&) const = default;

 private:
  struct Window {
    Eigen::Index first;
    Eigen::Index count;
  };
  // Lattice entries within sqrt(kKernelCutoff / gamma) of v.
  Window window(const Eigen::VectorXd& axis, double v) const;

  Eigen::VectorXd xs_;
  Eigen::VectorXd ys_;
  Eigen::MatrixXd weights_;
  double bias_;
  double gamma_;
};

double query(const HilbertField& field, const Eigen::Vector2d& x);
Eigen::Vector2d query_gradient(const HilbertField& field, const Eigen::Vector2d& x);

struct FieldTrainConfig {
  int inducing_spacing = 4;  // cells between lattice points
  double gamma = 0.16;       // 1/m^2; 0 picks 1 / (spacing in meters)^2
  int iterations = 500;
  double step = 0.5;
  double step_growth = 1.25;  // after every accepted step
  double regularization = 1e-4;
  double tolerance = 1e-9;  // early stop on relative loss decrease
  std::uint64_t seed = 7;
};

struct FieldTrainResult {
  HilbertField field;
  std::vector<double> loss_trace;
};

/// Regularized logistic regression on cell centers, labels occupied >= 0.5:
/// mean per-cell log loss plus (regularization / 2) |w|^2. Full-batch
/// gradient descent; a step that would raise the loss is halved until it
/// does not, so the recorded loss never increases.
FieldTrainResult train_field_with_trace(const OccupancyGrid& grid, const FieldTrainConfig& config = {});
HilbertField train_field(const OccupancyGrid& grid, const FieldTrainConfig& config = {});

/// Fraction of cell centers whose thresholded prediction matches the label.
double field_accuracy(const HilbertField& field, const OccupancyGrid& grid);

}  // namespace trajpred
