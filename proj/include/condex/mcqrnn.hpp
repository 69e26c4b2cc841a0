#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "condex/curve.hpp"

namespace condex {

struct McqrnnConfig {
  int hidden_layers = 2;
  int hidden_nodes = 2;
  std::vector<double> taus{0.5, 0.6, 0.7, 0.8, 0.9};
  int epochs = 1000;
  double learning_rate = 0.1;
  /// Learning rate at the last epoch is learning_rate * final_lr_fraction,
  /// decaying geometrically in between.
  double final_lr_fraction = 0.05;
  double smoothing = 0.00390625;  // 2^-8, on the standardized response scale
  int restarts = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One dense layer. Weights are row-major (outputs x inputs). A weight with
/// its mask bit set is stored as a log and used as exp(raw).
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> raw_weights;
  std::vector<std::uint8_t> constrained;
  std::vector<double> biases;

  [[nodiscard]] double weight(int out, int in) const;
};

/// Network over (standardized x1, tau). tanh hidden units, identity output.
/// Every path from the tau input to the output runs through exp-mapped
/// weights, so predictions are non-decreasing in tau for any x1.
struct McqrnnModel {
  std::vector<DenseLayer> layers;  // hidden layers then the output layer
  double x_mean = 0.0;
  double x_scale = 1.0;
  double y_mean = 0.0;
  double y_scale = 1.0;
  bool constant = false;
  McqrnnConfig config;
  std::vector<double> restart_losses;
  double loss = 0.0;
  std::vector<std::string> warnings;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch) : std::runtime_error(what), epoch_(epoch) {}
  [[nodiscard]] int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Huber-smoothed pinball loss; quadratic on |r| <= eps, exact pinball
/// minus eps/2 outside.
[[nodiscard]] double smoothed_pinball(double residual, double tau, double eps);
[[nodiscard]] double pinball(double residual, double tau);

[[nodiscard]] McqrnnModel train_mcqrnn(const PairData& pairs, const McqrnnConfig& config = {});

/// Mean composite smoothed loss of `model` on `pairs` (standardized scale).
[[nodiscard]] double mcqrnn_loss(const McqrnnModel& model, const PairData& pairs);

[[nodiscard]] double mcqrnn_predict(const McqrnnModel& model, double x1, double tau);

/// Throws std::logic_error if any row decreases in tau by more than 1e-9.
[[nodiscard]] ConditionalQuantileCurve predict_quantiles(const McqrnnModel& model,
                                                         std::span<const double> x1_grid,
                                                         std::span<const double> taus);

}  // namespace condex
