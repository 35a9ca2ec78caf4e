#include "trajpred/occupancy.hpp"

#include "trajpred/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace trajpred {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

template <typename Axis>
Eigen::VectorXd axis_kernels(const Axis& axis, double gamma, double v) {
  return (-gamma * (axis.array() - v).square()).exp();
}

// Rows: sample coordinate, columns: lattice coordinate.
Eigen::MatrixXd axis_kernel_matrix(const Eigen::VectorXd& samples, const Eigen::VectorXd& axis, double gamma) {
  Eigen::MatrixXd k(samples.size(), axis.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) k.row(i) = axis_kernels(axis, gamma, samples[i]).transpose();
  return k;
}

Eigen::VectorXd lattice_axis(double first_center, int cells, int spacing, double res) {
  const int steps = (cells - 1 + spacing - 1) / spacing;
  Eigen::VectorXd axis(steps + 1);
  for (int k = 0; k <= steps; ++k) axis[k] = first_center + static_cast<double>(k) * spacing * res;
  return axis;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::MissingArtifact, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OccupancyGrid make_grid(int width, int height, const std::vector<double>& values, const GridPlacement& placement) {
  Eigen::VectorXd cells = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return OccupancyGrid(width, height, placement.resolution, placement.origin, std::move(cells));
}

}  // namespace

OccupancyGrid::OccupancyGrid(int w, int h, double res, Eigen::Vector2d org, Eigen::VectorXd values)
    : width(w), height(h), resolution(res), origin(org), cells(std::move(values)) {
  require(width >= 1 && height >= 1, "grid dimensions must be positive");
  require(static_cast<Eigen::Index>(width) * height == cells.size(), "grid cell count does not match dimensions");
  require(std::isfinite(resolution) && resolution > 0.0, "grid resolution must be positive");
  require(cells.allFinite() && (cells.array() >= 0.0).all() && (cells.array() <= 1.0).all(),
          "grid cell values must lie in [0, 1]");
}

Eigen::Vector2d OccupancyGrid::cell_center(int col, int row) const {
  return origin + resolution * Eigen::Vector2d(col + 0.5, row + 0.5);
}

bool OccupancyGrid::contains(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d local = (x - origin) / resolution;
  return local.x() >= 0.0 && local.y() >= 0.0 && local.x() < width && local.y() < height;
}

double OccupancyGrid::value_at(const Eigen::Vector2d& x) const {
  if (!contains(x)) return 1.0;
  const Eigen::Vector2d local = (x - origin) / resolution;
  return at(static_cast<int>(local.x()), static_cast<int>(local.y()));
}

OccupancyGrid parse_grid_csv(const std::string& text, const GridPlacement& placement) {
  std::vector<double> values;
  int width = -1;
  int height = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string field;
    int count = 0;
    while (std::getline(fields, field, ',')) {
      try {
        size_t used = 0;
        const double v = std::stod(field, &used);
        if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        fail(ErrorCategory::MalformedFile, "grid CSV: cannot parse '" + field + "' on row " + std::to_string(height));
      }
      ++count;
    }
    if (width < 0) width = count;
    if (count != width) {
      fail(ErrorCategory::MalformedFile, "grid CSV: row " + std::to_string(height) + " has " +
                                             std::to_string(count) + " values, expected " + std::to_string(width));
    }
    ++height;
  }
  if (height == 0 || width <= 0) fail(ErrorCategory::MalformedFile, "grid CSV is empty");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCategory::MalformedFile, "grid CSV value outside [0, 1]");
  }
  return make_grid(width, height, values, placement);
}

OccupancyGrid parse_grid_pgm(const std::string& text, const GridPlacement& placement) {
  // Strip comments, then read whitespace-separated tokens.
  std::string cleaned;
  cleaned.reserve(text.size());
  bool comment = false;
  for (char c : text) {
    if (c == '#') comment = true;
    if (c == '\n') comment = false;
    cleaned.push_back(comment ? ' ' : c);
  }
  std::istringstream in(cleaned);
  std::string magic;
  if (!(in >> magic)) fail(ErrorCategory::MalformedFile, "PGM file is empty");
  if (magic != "P2") fail(ErrorCategory::MalformedFile, "only ASCII PGM (P2) grids are supported");
  long width = 0, height = 0, maxval = 0;
  if (!(in >> width >> height >> maxval) || width <= 0 || height <= 0 || maxval <= 0) {
    fail(ErrorCategory::MalformedFile, "PGM header is malformed");
  }
  std::vector<double> values;
  values.reserve(static_cast<size_t>(width * height));
  for (long i = 0; i < width * height; ++i) {
    long gray = 0;
    if (!(in >> gray)) fail(ErrorCategory::MalformedFile, "PGM has fewer pixels than its header states");
    if (gray < 0 || gray > maxval) fail(ErrorCategory::MalformedFile, "PGM pixel exceeds maxval");
    values.push_back(1.0 - static_cast<double>(gray) / static_cast<double>(maxval));
  }
  std::string extra;
  if (in >> extra) fail(ErrorCategory::MalformedFile, "PGM has more pixels than its header states");
  return make_grid(static_cast<int>(width), static_cast<int>(height), values, placement);
}

OccupancyGrid load_grid(const std::filesystem::path& path, const GridPlacement& placement) {
  const std::string text = read_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    fail(ErrorCategory::MalformedFile, "grid file " + path.string() + " is empty");
  }
  if (path.extension() == ".pgm") return parse_grid_pgm(text, placement);
  return parse_grid_csv(text, placement);
}

void save_grid_csv(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (!out) fail(ErrorCategory::Io, "cannot write " + path.string());
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      if (col) out << ',';
      out << grid.at(col, row);
    }
    out << '\n';
  }
}

HilbertField::HilbertField(Eigen::VectorXd xs, Eigen::VectorXd ys, Eigen::MatrixXd weights, double bias,
                           double gamma)
    : xs_(std::move(xs)), ys_(std::move(ys)), weights_(std::move(weights)), bias_(bias), gamma_(gamma) {
  require(xs_.size() >= 1 && ys_.size() >= 1, "Hilbert field needs at least one inducing point");
  require(weights_.rows() == ys_.size() && weights_.cols() == xs_.size(),
          "Hilbert field weight grid must be |ys| x |xs|");
  require(std::isfinite(gamma_) && gamma_ > 0.0, "Hilbert field gamma must be positive");
  const auto ascending = [](const Eigen::VectorXd& a) {
    for (Eigen::Index i = 1; i < a.size(); ++i)
      if (!(a[i] > a[i - 1])) return false;
    return true;
  };
  require(ascending(xs_) && ascending(ys_), "Hilbert field lattice axes must be strictly increasing");
  require(std::isfinite(bias_) && weights_.allFinite() && xs_.allFinite() && ys_.allFinite(),
          "Hilbert field parameters must be finite");
}

HilbertField HilbertField::constant(double probability) {
  require(probability > 0.0 && probability < 1.0, "constant field probability must lie in (0, 1)");
  return HilbertField(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1),
                      std::log(probability / (1.0 - probability)), 1.0);
}

Eigen::Matrix2Xd HilbertField::inducing_points() const {
  Eigen::Matrix2Xd pts(2, inducing_count());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < ys_.size(); ++j)
    for (Eigen::Index i = 0; i < xs_.size(); ++i) pts.col(k++) = Eigen::Vector2d(xs_[i], ys_[j]);
  return pts;
}

Eigen::VectorXd HilbertField::weights() const {
  Eigen::VectorXd w(inducing_count());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < ys_.size(); ++j)
    for (Eigen::Index i = 0; i < xs_.size(); ++i) w[k++] = weights_(j, i);
  return w;
}

HilbertField::Window HilbertField::window(const Eigen::VectorXd& axis, double v) const {
  const double reach = std::sqrt(kKernelCutoff / gamma_);
  const double* begin = axis.data();
  const double* end = begin + axis.size();
  const double* lo = std::lower_bound(begin, end, v - reach);
  const double* hi = std::upper_bound(lo, end, v + reach);
  return {lo - begin, hi - lo};
}

double HilbertField::logit(const Eigen::Vector2d& x) const {
  const Window wx = window(xs_, x.x());
  const Window wy = window(ys_, x.y());
  if (wx.count == 0 || wy.count == 0) return bias_;
  const Eigen::VectorXd ex = axis_kernels(xs_.segment(wx.first, wx.count), gamma_, x.x());
  const Eigen::VectorXd ey = axis_kernels(ys_.segment(wy.first, wy.count), gamma_, x.y());
  return bias_ + ey.dot(weights_.block(wy.first, wx.first, wy.count, wx.count) * ex);
}

double HilbertField::query(const Eigen::Vector2d& x) const { return sigmoid(logit(x)); }

double HilbertField::query_with_gradient(const Eigen::Vector2d& x, Eigen::Vector2d& grad) const {
  const Window wx = window(xs_, x.x());
  const Window wy = window(ys_, x.y());
  if (wx.count == 0 || wy.count == 0) {
    grad.setZero();
    return sigmoid(bias_);
  }
  const auto axs = xs_.segment(wx.first, wx.count);
  const auto ays = ys_.segment(wy.first, wy.count);
  const auto w = weights_.block(wy.first, wx.first, wy.count, wx.count);
  const Eigen::VectorXd ex = axis_kernels(axs, gamma_, x.x());
  const Eigen::VectorXd ey = axis_kernels(ays, gamma_, x.y());
  const Eigen::VectorXd dex = (-2.0 * gamma_) * (x.x() - axs.array()) * ex.array();
  const Eigen::VectorXd dey = (-2.0 * gamma_) * (x.y() - ays.array()) * ey.array();
  const Eigen::VectorXd w_ex = w * ex;
  const double z = bias_ + ey.dot(w_ex);
  const double p = sigmoid(z);
  const double slope = p * sigmoid(-z);
  grad.x() = slope * ey.dot(w * dex);
  grad.y() = slope * dey.dot(w_ex);
  return p;
}

Eigen::Vector2d HilbertField::query_gradient(const Eigen::Vector2d& x) const {
  Eigen::Vector2d g;
  query_with_gradient(x, g);
  return g;
}

double query(const HilbertField& field, const Eigen::Vector2d& x) { return field.query(x); }

Eigen::Vector2d query_gradient(const HilbertField& field, const Eigen::Vector2d& x) {
  return field.query_gradient(x);
}

FieldTrainResult train_field_with_trace(const OccupancyGrid& grid, const FieldTrainConfig& config) {
  require(grid.cells.size() > 0, "cannot train a field on an empty grid");
  require(config.inducing_spacing >= 1, "inducing spacing must be at least one cell");
  require(config.iterations >= 0 && config.step > 0.0, "field training needs a positive step");

  const double spacing_m = config.inducing_spacing * grid.resolution;
  const double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / (spacing_m * spacing_m);
  const Eigen::Vector2d first = grid.cell_center(0, 0);
  const Eigen::VectorXd xs = lattice_axis(first.x(), grid.width, config.inducing_spacing, grid.resolution);
  const Eigen::VectorXd ys = lattice_axis(first.y(), grid.height, config.inducing_spacing, grid.resolution);

  Eigen::VectorXd cx(grid.width), cy(grid.height);
  for (int i = 0; i < grid.width; ++i) cx[i] = grid.cell_center(i, 0).x();
  for (int j = 0; j < grid.height; ++j) cy[j] = grid.cell_center(0, j).y();
  // Cell-center logits separate as Ky W Kx^T + bias.
  const Eigen::MatrixXd kx = axis_kernel_matrix(cx, xs, gamma);
  const Eigen::MatrixXd ky = axis_kernel_matrix(cy, ys, gamma);

  Eigen::MatrixXd labels(grid.height, grid.width);
  for (int j = 0; j < grid.height; ++j)
    for (int i = 0; i < grid.width; ++i) labels(j, i) = grid.occupied(i, j) ? 1.0 : 0.0;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  Eigen::MatrixXd w(ys.size(), xs.size());
  for (Eigen::Index j = 0; j < w.rows(); ++j)
    for (Eigen::Index i = 0; i < w.cols(); ++i) w(j, i) = init(rng);
  double bias = 0.0;

  const double inv_cells = 1.0 / static_cast<double>(grid.cells.size());
  auto loss_of = [&](const Eigen::MatrixXd& weights, double b, Eigen::MatrixXd* logits) {
    Eigen::MatrixXd z = ky * weights * kx.transpose();
    z.array() += b;
    double total = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) total += softplus(z(k)) - labels(k) * z(k);
    if (logits) *logits = std::move(z);
    return total * inv_cells + 0.5 * config.regularization * weights.squaredNorm();
  };

  Eigen::MatrixXd logits;
  double loss = loss_of(w, bias, &logits);
  std::vector<double> trace{loss};
  double step = config.step;
  for (int it = 0; it < config.iterations; ++it) {
    const Eigen::MatrixXd residual =
        (logits.unaryExpr([](double z) { return sigmoid(z); }) - labels) * inv_cells;
    const Eigen::MatrixXd grad_w = ky.transpose() * residual * kx + config.regularization * w;
    const double grad_b = residual.sum();

    Eigen::MatrixXd next_logits;
    Eigen::MatrixXd next_w;
    double next_bias = bias;
    double next_loss = loss;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      next_w = w - step * grad_w;
      next_bias = bias - step * grad_b;
      next_loss = loss_of(next_w, next_bias, &next_logits);
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double decrease = loss - next_loss;
    w = std::move(next_w);
    bias = next_bias;
    logits = std::move(next_logits);
    loss = next_loss;
    trace.push_back(loss);
    step *= config.step_growth;
    if (decrease <= config.tolerance * std::max(1.0, std::abs(loss))) break;
  }
  return {HilbertField(xs, ys, std::move(w), bias, gamma), std::move(trace)};
}

HilbertField train_field(const OccupancyGrid& grid, const FieldTrainConfig& config) {
  return train_field_with_trace(grid, config).field;
}

double field_accuracy(const HilbertField& field, const OccupancyGrid& grid) {
  int correct = 0;
  for (int j = 0; j < grid.height; ++j) {
    for (int i = 0; i < grid.width; ++i) {
      const bool predicted = field.query(grid.cell_center(i, j)) >= 0.5;
      correct += predicted == grid.occupied(i, j) ? 1 : 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(grid.cells.size());
}

}  // namespace trajpred
