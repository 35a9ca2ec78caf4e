#include "trajpred/mdn.hpp"

#include "trajpred/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace trajpred {

namespace {

constexpr double kScaleLogitLimit = 11.5;
constexpr double kLowerLimit = 1e6;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double clip(double v, double limit) { return std::clamp(v, -limit, limit); }
double clip_slope(double v, double limit) { return std::abs(v) < limit ? 1.0 : 0.0; }

Eigen::MatrixXd batch_inputs(const std::vector<TrainingPair>& batch) {
  Eigen::MatrixXd x(kEncodingSize, static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = batch[i].encoding.values;
  return x;
}

// NLL of one target under the decoded head and its gradient with respect to
// the raw head outputs.
double head_nll(const MdnHyper& hyper, const Eigen::VectorXd& z, const MatrixX2d& target, Eigen::VectorXd& dz) {
  const int m = hyper.m;
  const int width = hyper.head_width();
  dz.setZero(z.size());

  Eigen::VectorXd alpha_logits(hyper.r);
  for (int r = 0; r < hyper.r; ++r) alpha_logits[r] = z[r * width + 3 * m + 3];
  const double alpha_max = alpha_logits.maxCoeff();
  const double alpha_lse = alpha_max + std::log((alpha_logits.array() - alpha_max).exp().sum());
  const Eigen::VectorXd log_alpha = alpha_logits.array() - alpha_lse;

  Eigen::VectorXd terms(hyper.r);
  std::vector<MatrixX2d> d_location(static_cast<size_t>(hyper.r));
  std::vector<Eigen::VectorXd> d_u(static_cast<size_t>(hyper.r));
  std::vector<Eigen::Vector3d> d_v(static_cast<size_t>(hyper.r));

  for (int r = 0; r < hyper.r; ++r) {
    const int b = r * width;
    MatrixX2d location(m, 2);
    location.col(0) = z.segment(b, m);
    location.col(1) = z.segment(b + m, m);
    Eigen::VectorXd zu(m);
    for (int k = 0; k < m; ++k) zu[k] = clip(z[b + 2 * m + k], kScaleLogitLimit);
    const Eigen::VectorXd u = (2.0 * zu.array()).exp();
    const double a = clip(z[b + 3 * m], kScaleLogitLimit);
    const double c = clip(z[b + 3 * m + 1], kScaleLogitLimit);
    const double lower = clip(z[b + 3 * m + 2], kLowerLimit);
    Eigen::Matrix2d l;
    l << std::exp(a), 0.0, lower, std::exp(c);
    const Eigen::Matrix2d l_inv = l.inverse();
    const Eigen::Matrix2d v_inv = l_inv.transpose() * l_inv;

    const MatrixX2d d = target - location;
    const MatrixX2d d_scaled = d.array().colwise() / u.array();  // U^-1 D
    const Eigen::Matrix2d s = d.transpose() * d_scaled;           // D^T U^-1 D
    const double quad = (v_inv * s).trace();
    terms[r] = log_alpha[r] - 0.5 * quad - m * kLog2Pi - m * (a + c) - 2.0 * zu.sum();

    d_location[static_cast<size_t>(r)] = d_scaled * v_inv;
    const Eigen::VectorXd q = (d * v_inv).cwiseProduct(d).rowwise().sum();
    d_u[static_cast<size_t>(r)] = q.array() / u.array() - 2.0;
    const Eigen::Matrix2d g = v_inv * s * v_inv * l;
    d_v[static_cast<size_t>(r)] = Eigen::Vector3d(g(0, 0) * l(0, 0) - m, g(1, 1) * l(1, 1) - m, g(1, 0));
  }

  const double peak = terms.maxCoeff();
  const double lse = peak + std::log((terms.array() - peak).exp().sum());
  const Eigen::VectorXd resp = (terms.array() - lse).exp();
  const Eigen::VectorXd alpha = log_alpha.array().exp();

  for (int r = 0; r < hyper.r; ++r) {
    const int b = r * width;
    const double w = -resp[r];  // dNLL / dlogpdf_r
    const auto& dl = d_location[static_cast<size_t>(r)];
    dz.segment(b, m) = w * dl.col(0);
    dz.segment(b + m, m) = w * dl.col(1);
    for (int k = 0; k < m; ++k) {
      dz[b + 2 * m + k] = w * d_u[static_cast<size_t>(r)][k] * clip_slope(z[b + 2 * m + k], kScaleLogitLimit);
    }
    const auto& dv = d_v[static_cast<size_t>(r)];
    dz[b + 3 * m] = w * dv[0] * clip_slope(z[b + 3 * m], kScaleLogitLimit);
    dz[b + 3 * m + 1] = w * dv[1] * clip_slope(z[b + 3 * m + 1], kScaleLogitLimit);
    dz[b + 3 * m + 2] = w * dv[2] * clip_slope(z[b + 3 * m + 2], kLowerLimit);
    dz[b + 3 * m + 3] = alpha[r] - resp[r];
  }
  return -lse;
}

}  // namespace

HistoryEncoding encode_history(const TimedPath& path, bool center) {
  if (path.size() < kHistorySteps) {
    fail(ErrorCategory::InvalidArgument,
         "history needs at least " + std::to_string(kHistorySteps) + " samples, got " + std::to_string(path.size()));
  }
  const Eigen::Index first = path.size() - kHistorySteps;
  HistoryEncoding enc;
  enc.reference = center ? path.point(path.size() - 1) : Eigen::Vector2d::Zero();
  enc.values.resize(kEncodingSize);
  for (int i = 0; i < kHistorySteps; ++i) {
    enc.values.segment<2>(2 * i) = path.point(first + i) - enc.reference;
  }
  require(enc.values.allFinite(), "history encoding must be finite");
  return enc;
}

std::vector<int> MdnHyper::layer_sizes() const {
  return {kEncodingSize, 15 * m * r, 5 * m * r, 5 * m * r, output_size()};
}

MdnNetwork::MdnNetwork(MdnHyper h, std::uint64_t seed) : hyper(h), net(h.layer_sizes(), seed) {
  require(hyper.m >= 1 && hyper.r >= 1, "network needs M >= 1 and R >= 1");
}

MdnNetwork::MdnNetwork(MdnHyper h, Mlp network) : hyper(h), net(std::move(network)) {
  require(net.sizes() == hyper.layer_sizes(), "network layer shapes do not match M and R");
}

TrajectoryMixture decode_head(const MdnHyper& hyper, const Eigen::VectorXd& outputs) {
  require(outputs.size() == hyper.output_size(), "network head has the wrong width");
  const int m = hyper.m;
  const int width = hyper.head_width();
  Eigen::VectorXd logits(hyper.r);
  std::vector<MatrixNormalComponent> comps;
  for (int r = 0; r < hyper.r; ++r) {
    const int b = r * width;
    MatrixX2d location(m, 2);
    location.col(0) = outputs.segment(b, m);
    location.col(1) = outputs.segment(b + m, m);
    Eigen::VectorXd u(m);
    for (int k = 0; k < m; ++k) u[k] = std::exp(2.0 * clip(outputs[b + 2 * m + k], kScaleLogitLimit));
    Eigen::Matrix2d l;
    l << std::exp(clip(outputs[b + 3 * m], kScaleLogitLimit)), 0.0, clip(outputs[b + 3 * m + 2], kLowerLimit),
        std::exp(clip(outputs[b + 3 * m + 1], kScaleLogitLimit));
    comps.emplace_back(std::move(location), std::move(u), l * l.transpose());
    logits[r] = outputs[b + 3 * m + 3];
  }
  const double peak = logits.maxCoeff();
  Eigen::VectorXd alpha = (logits.array() - peak).exp();
  alpha /= alpha.sum();
  return TrajectoryMixture(std::move(alpha), std::move(comps), hyper.features());
}

TrajectoryMixture forward(const MdnNetwork& net, const HistoryEncoding& enc) {
  return decode_head(net.hyper, net.net.forward(enc.values));
}

TrajectoryMixture predict_prior(const MdnNetwork& net, const HistoryEncoding& enc) {
  return forward(net, enc).translated(enc.reference);
}

TrainingPair make_training_pair(const TimedPath& history, const TimedPath& future, const MdnHyper& hyper,
                                double lambda) {
  TrainingPair pair;
  pair.encoding = encode_history(history, hyper.center_inputs);
  const double t_last = history.times[history.size() - 1];
  const TimedPath local = future.shifted_time(t_last).translated(-pair.encoding.reference);
  pair.target = fit_ridge(local, hyper.features(), lambda).weights;
  return pair;
}

double nll_loss(const MdnNetwork& net, const std::vector<TrainingPair>& batch, double weight_decay) {
  require(!batch.empty(), "loss needs a non-empty batch");
  const Eigen::MatrixXd out = net.net.forward(batch_inputs(batch));
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    total += mixture_nll(decode_head(net.hyper, out.col(static_cast<Eigen::Index>(i))), batch[i].target);
  }
  const Eigen::VectorXd params = net.net.parameters();
  return total / static_cast<double>(batch.size()) +
         0.5 * weight_decay * params.cwiseProduct(net.net.weight_mask()).squaredNorm();
}

double nll_loss_and_gradient(const MdnNetwork& net, const std::vector<TrainingPair>& batch, double weight_decay,
                             Eigen::VectorXd& gradient) {
  require(!batch.empty(), "loss needs a non-empty batch");
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net.net.forward(batch_inputs(batch), tape);
  Eigen::MatrixXd d_out(out.rows(), out.cols());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  Eigen::VectorXd dz;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    total += head_nll(net.hyper, out.col(i), batch[static_cast<size_t>(i)].target, dz);
    d_out.col(i) = dz * inv_b;
  }
  gradient = net.net.backward(tape, d_out);
  const Eigen::VectorXd decayed = net.net.parameters().cwiseProduct(net.net.weight_mask());
  gradient += weight_decay * decayed;
  return total * inv_b + 0.5 * weight_decay * decayed.squaredNorm();
}

void TrainConfig::validate() const {
  require(epochs >= 1 && batch_size >= 1, "training needs positive epoch and batch counts");
  require(step > 0.0 && weight_decay >= 0.0, "training needs a positive step size");
}

TrainResult train(const std::vector<TrainingPair>& dataset, const TrainConfig& config, const MdnHyper& hyper) {
  require(!dataset.empty(), "training needs a non-empty dataset");
  config.validate();
  MdnNetwork net(hyper, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd params = net.net.parameters();
  Adam adam(params.size(), config.step);

  std::vector<double> trace{nll_loss(net, dataset, config.weight_decay)};
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<TrainingPair> batch;
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      batch.clear();
      for (size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
      nll_loss_and_gradient(net, batch, config.weight_decay, grad);
      if (!grad.allFinite()) fail(ErrorCategory::NumericalFailure, "non-finite gradient during training");
      adam.update(params, grad);
      net.net.set_parameters(params);
    }
    trace.push_back(nll_loss(net, dataset, config.weight_decay));
  }
  return {std::move(net), std::move(trace)};
}

}  // namespace trajpred
