#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qts/qsim.hpp"
#include "qts/train.hpp"

namespace qts::qlstm {

struct RecurrentState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static RecurrentState zeros(int hidden);
};

// Linear map from the final hidden state to the target channels.
struct Readout {
  Eigen::MatrixXd W;  // outputs x H
  Eigen::VectorXd b;  // outputs

  static Readout zeros(int hidden, int outputs);
  static Readout seeded(int hidden, int outputs, std::uint64_t seed);
  Eigen::VectorXd apply(const Eigen::VectorXd& h) const;
  std::size_t param_count() const;
};

struct LstmCell {
  Eigen::MatrixXd W_f, W_i, W_C, W_o;  // H x (H+D)
  Eigen::VectorXd b_f, b_i, b_C, b_o;  // H
  std::uint64_t seed = 0;

  int hidden_size() const { return static_cast<int>(W_f.rows()); }
  int input_size() const {
    return static_cast<int>(W_f.cols() - W_f.rows());
  }
  std::size_t param_count() const;

  static LstmCell zeros(int hidden, int input);
  static LstmCell seeded(int hidden, int input, std::uint64_t seed);
};

enum class AnsatzKind { HRyRing, RotRing };

std::string to_string(AnsatzKind kind);
AnsatzKind ansatz_from_string(const std::string& name);

// Per-gate circuit layout shared by the four gate circuits:
//   HRyRing: L layers of (H on every qubit, RY(theta) on every qubit, CNOT
//            ring), then a final Rot per qubit. Params: L*Q + 3Q.
//   RotRing: L layers of (Rot per qubit, CNOT ring), then a final Rot per
//            qubit. Params: 3Q*(L+1).
qsim::CircuitSpec build_ansatz(int n_qubits, int layers, AnsatzKind kind);

struct QlstmConfig {
  int n_qubits = 4;
  int layers = 2;
  int input_size = 1;
  AnsatzKind ansatz = AnsatzKind::HRyRing;
};

// Four variational circuits over one shared layout (independent parameters,
// order f, i, c, o), an encoding map W_enc: 2^Q x (Q+D), hidden size H == Q.
struct QlstmCell {
  QlstmConfig cfg;
  Eigen::MatrixXd W_enc;
  qsim::CircuitSpec circuit;
  std::array<Eigen::VectorXd, 4> thetas;
  std::uint64_t seed = 0;

  int hidden_size() const { return cfg.n_qubits; }
  int input_size() const { return cfg.input_size; }
  std::size_t param_count() const;

  static QlstmCell seeded(const QlstmConfig& cfg, std::uint64_t seed);
};

// Gate activations of one step, exposed for tests and oracles.
struct StepTrace {
  Eigen::VectorXd v, e;
  std::array<Eigen::VectorXd, 4> z;
  Eigen::VectorXd f, i, g, o;
};

RecurrentState lstm_step(const LstmCell& cell, const RecurrentState& state,
                         const Eigen::VectorXd& x, StepTrace* trace = nullptr);

RecurrentState qlstm_step(const QlstmCell& cell, const RecurrentState& state,
                          const Eigen::VectorXd& x, StepTrace* trace = nullptr);

// Each row of X is one lag window laid out channel-major ([ch0 lags..., ch1
// lags...]) and is consumed as a T-step sequence from zero initial state;
// the readout is applied to the final hidden state.
Eigen::MatrixXd forecast_windows(const LstmCell& cell, const Readout& readout,
                                 const Eigen::MatrixXd& X);
Eigen::MatrixXd forecast_windows(const QlstmCell& cell, const Readout& readout,
                                 const Eigen::MatrixXd& X);

struct TrainResult {
  std::vector<double> loss_curve;  // full-batch MSE per epoch, pre-update
};

// Full-batch gradient descent on MSE. LSTM gradients via analytic BPTT;
// QLSTM circuit parameters via the parameter-shift rule chained with the
// analytically differentiated classical surroundings (activations, cell
// recurrence, normalization quotient rule, W_enc, readout).
TrainResult train_lstm(LstmCell& cell, Readout& readout,
                       const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       const train::OptimizerConfig& opt);
TrainResult train_qlstm(QlstmCell& cell, Readout& readout,
                        const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const train::OptimizerConfig& opt);

// Smallest classical hidden size whose total parameter count (cell + readout)
// is nearest the given target; used to pair the baselines.
struct MatchedHidden {
  int hidden = 0;
  std::size_t params = 0;
  double relative_gap = 0.0;
};
MatchedHidden choose_matching_hidden(std::size_t target_params, int input_size,
                                     int outputs);

struct Checkpoint {
  std::string model;  // "lstm" | "qlstm"
  std::optional<LstmCell> lstm;
  std::optional<QlstmCell> qlstm;
  Readout readout;
};

void save_checkpoint(const std::filesystem::path& path, const LstmCell& cell,
                     const Readout& readout);
void save_checkpoint(const std::filesystem::path& path, const QlstmCell& cell,
                     const Readout& readout);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qts::qlstm
