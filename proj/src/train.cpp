#include "qts/train.hpp"

#include <cmath>
#include <stdexcept>

#include "qts/common.hpp"

namespace qts::train {

void OptimizerConfig::validate() const {
  // Zero is allowed so a no-op pass can evaluate the loss at fixed params.
  if (learning_rate < 0 || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be >= 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

AdamState AdamState::zeros(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

namespace {

void check_grads(const Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("param/gradient shape mismatch");
  if (!grads.allFinite())
    throw NumericError("optimizer received a non-finite gradient");
}

}  // namespace

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state, const OptimizerConfig& cfg) {
  check_grads(params, grads);
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("optimizer state shape mismatch");
  state.step += 1;
  state.m = cfg.beta1 * state.m + (1 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v.array().matrix() +
            (1 - cfg.beta2) * grads.array().square().matrix();
  double bc1 = 1 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1 - std::pow(cfg.beta2, static_cast<double>(state.step));
  Eigen::ArrayXd m_hat = state.m.array() / bc1;
  Eigen::ArrayXd v_hat = state.v.array() / bc2;
  params.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
}

void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
              const OptimizerConfig& cfg) {
  check_grads(params, grads);
  params -= cfg.learning_rate * grads;
}

void optimizer_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                    AdamState& state, const OptimizerConfig& cfg) {
  if (cfg.kind == OptimizerKind::Adam)
    adam_step(params, grads, state, cfg);
  else
    sgd_step(params, grads, cfg);
}

double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual) {
  if (pred.rows() != actual.rows() || pred.cols() != actual.cols())
    throw std::invalid_argument("rmse: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((pred - actual).array().square().mean());
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  return rmse(Eigen::MatrixXd(pred), Eigen::MatrixXd(actual));
}

Eigen::VectorXd rmse_per_channel(const Eigen::MatrixXd& pred,
                                 const Eigen::MatrixXd& actual) {
  if (pred.rows() != actual.rows() || pred.cols() != actual.cols())
    throw std::invalid_argument("rmse: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("rmse: empty input");
  return (pred - actual)
      .array()
      .square()
      .colwise()
      .mean()
      .sqrt()
      .matrix()
      .transpose();
}

double pseudo_accuracy(double rmse_value) {
  if (rmse_value < 0)
    throw std::invalid_argument("pseudo_accuracy: negative rmse");
  return 1.0 / (1.0 + rmse_value);
}

Metrics Metrics::from_rmse(double rmse_value) {
  return {rmse_value, qts::train::pseudo_accuracy(rmse_value)};
}

}  // namespace qts::train
