#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "qts/encoding.hpp"
#include "qts/qsim.hpp"
#include "qts/train.hpp"

namespace qts::reservoir {

// Quantum reservoir: fixed seeded circuit (per-layer Rot wall + CNOT ring),
// fixed projection, classical recurrence through the 3n measurement vector
// r = [<X_1..X_n>, <Y_1..Y_n>, <Z_1..Z_n>].
struct QrcConfig {
  int n_qubits = 4;
  int layers = 3;
  double leak_rate = 0.5;                     // lambda in [0,1]
  double w_x = 1.0 / 3, w_y = 1.0 / 3, w_z = 1.0 / 3;
  Eigen::VectorXd bias;                       // length n
  encoding::RandomProjection proj;            // 2^n x lifted(n)
  encoding::LiftKind lift = encoding::LiftKind::TanhConcat;
  qsim::CircuitSpec circuit;                  // fixed angles, no param slots
  double ridge_lambda = 1e-2;
  std::uint64_t seed = 0;

  int feature_size() const { return 3 * n_qubits; }
  void validate() const;

  static QrcConfig seeded(int n_qubits, int layers, std::uint64_t seed,
                          double leak_rate = 0.5, double ridge_lambda = 1e-2,
                          encoding::LiftKind lift = encoding::LiftKind::TanhConcat);

  nlohmann::ordered_json to_json() const;
  static QrcConfig from_json(const nlohmann::ordered_json& j);
};

// Classical echo state baseline, leaky-tanh update.
struct EsnConfig {
  int units = 12;
  double spectral_radius = 0.9;
  double leak_rate = 0.5;
  double ridge_lambda = 1e-2;
  Eigen::MatrixXd W_res;  // units x units, scaled to the spectral radius
  Eigen::MatrixXd W_in;   // units x input_dim
  Eigen::VectorXd bias;   // units
  std::uint64_t seed = 0;

  int feature_size() const { return units; }
  int input_size() const { return static_cast<int>(W_in.cols()); }
  void validate() const;

  static EsnConfig seeded(int units, int input_dim, std::uint64_t seed,
                          double rho = 0.9, double leak_rate = 0.5,
                          double ridge_lambda = 1e-2);

  nlohmann::ordered_json to_json() const;
  static EsnConfig from_json(const nlohmann::ordered_json& j);
};

double spectral_radius(const Eigen::MatrixXd& m);

struct ReservoirTrace {
  Eigen::MatrixXd R;  // T x feature_size
  Eigen::MatrixXd Y;  // T x outputs
};

Eigen::VectorXd qrc_step(const QrcConfig& cfg, const Eigen::VectorXd& prev_r,
                         const Eigen::VectorXd& x_t);
Eigen::VectorXd esn_step(const EsnConfig& cfg, const Eigen::VectorXd& prev,
                         const Eigen::VectorXd& x_t);

// r^(0) = 0 unless an initial state is injected (tests use this to probe the
// fading-memory property).
Eigen::MatrixXd run_reservoir(const QrcConfig& cfg,
                              const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd* r0 = nullptr);
Eigen::MatrixXd run_reservoir(const EsnConfig& cfg,
                              const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd* s0 = nullptr);

// (R^T R + lambda I) W = R^T Y via LDLT; relative residual of the normal
// equations is checked against 1e-8. Returns features x outputs.
Eigen::MatrixXd fit_ridge(const ReservoirTrace& trace, double ridge_lambda);

Eigen::VectorXd predict_linear(const Eigen::MatrixXd& W_out,
                               const Eigen::VectorXd& r);
Eigen::MatrixXd predict_linear_rows(const Eigen::MatrixXd& W_out,
                                    const Eigen::MatrixXd& R);

// Single-hidden-layer tanh MLP used as the second (NN) readout stage.
struct Mlp {
  Eigen::MatrixXd W1;  // hidden x in
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;  // out x hidden
  Eigen::VectorXd b2;

  static Mlp zeros(int in, int hidden, int out);
  static Mlp seeded(int in, int hidden, int out, std::uint64_t seed);
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_rows(const Eigen::MatrixXd& X) const;
  std::size_t param_count() const;
};

struct MlpConfig {
  int hidden = 16;
  train::OptimizerConfig opt;
};

Mlp fit_nn_readout(const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, const MlpConfig& cfg,
                   std::vector<double>* loss_curve = nullptr);

void export_trace_csv(const std::filesystem::path& path,
                      const ReservoirTrace& trace);

}  // namespace qts::reservoir
