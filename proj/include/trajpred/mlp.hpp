#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace trajpred {

/// y = weight * x + bias, weight is (out x in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Fully connected network: ReLU on every hidden layer, linear output.
/// Batches are column-major: one column per sample.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}. Weights and biases are drawn from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(const std::vector<int>& sizes, std::uint64_t seed);
  explicit Mlp(std::vector<DenseLayer> layers);

  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer (post-activation of the previous)
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Tape& tape) const;

  /// Reverse pass: given dLoss/dOutput, returns dLoss/dParameters in
  /// parameters() order.
  Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& d_output) const;

  int input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::vector<int> sizes() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Layer by layer: weight (column-major) then bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  Eigen::Index parameter_count() const;
  /// Mask selecting weight entries (1) but not biases (0), for weight decay.
  Eigen::VectorXd weight_mask() const;

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Adam with bias correction over a flat parameter vector.
class Adam {
 public:
  explicit Adam(Eigen::Index size, double step, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double step_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace trajpred
