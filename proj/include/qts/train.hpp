#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace qts::train {

enum class OptimizerKind { SGD, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.01;
  int epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static AdamState zeros(Eigen::Index n);
};

// Standard Adam with bias correction. Throws std::invalid_argument on shape
// mismatch and NumericError when a gradient entry is not finite.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state, const OptimizerConfig& cfg);

void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
              const OptimizerConfig& cfg);

// Dispatches on cfg.kind.
void optimizer_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                    AdamState& state, const OptimizerConfig& cfg);

// Pooled over all entries (channels jointly for multivariate).
double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual);
double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

// Diagnostic per-channel breakdown (column-wise).
Eigen::VectorXd rmse_per_channel(const Eigen::MatrixXd& pred,
                                 const Eigen::MatrixXd& actual);

double pseudo_accuracy(double rmse_value);

struct Metrics {
  double rmse = 0.0;
  double pseudo_accuracy = 1.0;

  static Metrics from_rmse(double rmse_value);
};

}  // namespace qts::train
