#include "trajpred/mlp.hpp"

#include "trajpred/error.hpp"

#include <cmath>
#include <random>

namespace trajpred {

Mlp::Mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  require(sizes.size() >= 2, "network needs input and output sizes");
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    require(sizes[l] > 0 && sizes[l + 1] > 0, "layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(sizes[l + 1], sizes[l]), Eigen::VectorXd(sizes[l + 1])};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), "network needs at least one layer");
  for (size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].bias.size() == layers_[l].weight.rows(), "layer bias size mismatch");
    if (l > 0) require(layers_[l].weight.cols() == layers_[l - 1].weight.rows(), "layer shapes do not chain");
  }
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s{input_size()};
  for (const auto& l : layers_) s.push_back(static_cast<int>(l.weight.rows()));
  return s;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch) const {
  Tape tape;
  return forward(batch, tape);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch, Tape& tape) const {
  require(batch.rows() == input_size(), "network input has the wrong dimension");
  tape.inputs.clear();
  Eigen::MatrixXd x = batch;
  for (size_t l = 0; l < layers_.size(); ++l) {
    tape.inputs.push_back(x);
    Eigen::MatrixXd y = layers_[l].weight * x;
    y.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) y = y.cwiseMax(0.0);
    x = std::move(y);
  }
  return x;
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& d_output) const {
  Eigen::VectorXd grad(parameter_count());
  // Offsets of each layer's block in the flat vector.
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& l : layers_) {
    offsets.push_back(off);
    off += l.weight.size() + l.bias.size();
  }
  Eigen::MatrixXd delta = d_output;
  for (size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const Eigen::MatrixXd g_w = delta * tape.inputs[l].transpose();
    Eigen::Map<Eigen::MatrixXd>(grad.data() + offsets[l], layer.weight.rows(), layer.weight.cols()) = g_w;
    grad.segment(offsets[l] + layer.weight.size(), layer.bias.size()) = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layer.weight.transpose() * delta;
    // tape.inputs[l] is the ReLU output of layer l-1; its derivative is the
    // indicator of a positive value.
    delta = back.cwiseProduct((tape.inputs[l].array() > 0.0).cast<double>().matrix());
  }
  return grad;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index off = 0;
  for (const auto& l : layers_) {
    flat.segment(off, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    off += l.weight.size();
    flat.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  require(flat.size() == parameter_count(), "parameter vector has the wrong length");
  Eigen::Index off = 0;
  for (auto& l : layers_) {
    l.weight = Eigen::Map<const Eigen::MatrixXd>(flat.data() + off, l.weight.rows(), l.weight.cols());
    off += l.weight.size();
    l.bias = flat.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::VectorXd Mlp::weight_mask() const {
  Eigen::VectorXd mask(parameter_count());
  Eigen::Index off = 0;
  for (const auto& l : layers_) {
    mask.segment(off, l.weight.size()).setOnes();
    off += l.weight.size();
    mask.segment(off, l.bias.size()).setZero();
    off += l.bias.size();
  }
  return mask;
}

Adam::Adam(Eigen::Index size, double step, double beta1, double beta2, double eps)
    : step_(step), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::update(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= step_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace trajpred
