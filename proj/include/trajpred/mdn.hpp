#pragma once

#include "trajpred/matrix_normal.hpp"
#include "trajpred/mlp.hpp"
#include "trajpred/rbf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace trajpred {

inline constexpr int kHistorySteps = 10;
inline constexpr int kEncodingSize = 2 * kHistorySteps;

/// Last ten observed coordinates flattened [x1, y1, ..., x10, y10], optionally
/// relative to `reference` (the final observed coordinate).
struct HistoryEncoding {
  Eigen::VectorXd values;
  Eigen::Vector2d reference = Eigen::Vector2d::Zero();
};

HistoryEncoding encode_history(const TimedPath& path, bool center = true);

struct MdnHyper {
  int m = 8;
  int r = 2;
  double gamma = 0.05;
  double horizon = 15.0;
  bool center_inputs = true;

  /// Head width per component: 2M location + M diag(U^1/2) + 2 diag(V^1/2)
  /// + 1 lower(V^1/2) + 1 alpha logit.
  int head_width() const { return 3 * m + 4; }
  int output_size() const { return r * head_width(); }
  RbfFeatureMap features() const { return RbfFeatureMap::uniform(m, horizon, gamma); }
  /// {20, 15MR, 5MR, 5MR, R(3M+4)}
  std::vector<int> layer_sizes() const;

  bool operator==(const MdnHyper&) const = default;
};

/// Mixture density network from a history encoding to a TrajectoryMixture.
struct MdnNetwork {
  MdnHyper hyper;
  Mlp net;

  MdnNetwork(MdnHyper h, std::uint64_t seed);
  MdnNetwork(MdnHyper h, Mlp network);

  bool operator==(const MdnNetwork&) const = default;
};

/// Decodes raw network outputs into a mixture in the weight frame (origin 0).
/// Scale logits are clipped to [-11.5, 11.5] so exp(2 z) stays within
/// [1e-10, 1e10]; the lower factor entry is clipped to +-1e6.
TrajectoryMixture decode_head(const MdnHyper& hyper, const Eigen::VectorXd& outputs);

TrajectoryMixture forward(const MdnNetwork& net, const HistoryEncoding& enc);

/// forward() translated back to world coordinates by the encoding reference.
TrajectoryMixture predict_prior(const MdnNetwork& net, const HistoryEncoding& enc);

struct TrainingPair {
  HistoryEncoding encoding;
  MatrixX2d target;  // ridge weights of the centered future
};

/// Encodes `history`, then fits the future (times measured from the last
/// observed sample, positions relative to the encoding reference).
TrainingPair make_training_pair(const TimedPath& history, const TimedPath& future, const MdnHyper& hyper,
                                double lambda = kDefaultRidge);

/// Mean mixture NLL over the batch plus (decay / 2) * sum of squared weights.
double nll_loss(const MdnNetwork& net, const std::vector<TrainingPair>& batch, double weight_decay = 0.0);

/// Loss and gradient with respect to net.net.parameters().
double nll_loss_and_gradient(const MdnNetwork& net, const std::vector<TrainingPair>& batch, double weight_decay,
                             Eigen::VectorXd& gradient);

struct TrainConfig {
  int epochs = 500;
  int batch_size = 32;
  double step = 1e-3;
  std::uint64_t seed = 1;
  double weight_decay = 1e-6;

  void validate() const;
};

struct TrainResult {
  MdnNetwork network;
  std::vector<double> loss_trace;  // full-dataset loss after each epoch, index 0 before training
};

TrainResult train(const std::vector<TrainingPair>& dataset, const TrainConfig& config, const MdnHyper& hyper);

}  // namespace trajpred
