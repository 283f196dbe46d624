#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qts/data.hpp"
#include "qts/json_io.hpp"
#include "qts/reservoir.hpp"

namespace qts::experiment {

enum class ModelKind { Lstm, Qlstm, Rc, Qrc, NnRc, NnQrc };
enum class Mode { Univariate, Multivariate };

std::string to_string(ModelKind kind);
ModelKind model_from_string(const std::string& name);
std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

// True for the reservoir family (per-step framing, fitted readout);
// false for the recurrent family (lag-window framing, gradient training).
bool is_reservoir(ModelKind kind);
bool is_quantum(ModelKind kind);

struct ExperimentConfig {
  ModelKind model = ModelKind::Lstm;
  Mode mode = Mode::Univariate;
  std::string corpus;
  std::vector<int> channels;  // empty -> {0} univariate, {0,1} multivariate
  int lag = 4;
  int horizon = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out = "out";
  bool dump_trace = false;

  // recurrent family
  int n_qubits = 4;
  int layers = 2;
  std::string ansatz = "h_ry_ring";
  int hidden = 0;  // 0 -> parameter-matched against the qlstm configuration
  double learning_rate = 0.05;
  int epochs = 40;
  std::string optimizer = "adam";

  // reservoir family
  int esn_units = 12;
  double spectral_radius = 0.9;
  double leak_rate = 0.5;
  double ridge_lambda = 1e-2;
  int qrc_layers = 3;
  int washout = 5;

  // neural readout variants
  int mlp_hidden = 16;
  int mlp_epochs = 200;
  double mlp_learning_rate = 0.01;

  std::vector<int> effective_channels() const;
  void validate() const;
  json to_json() const;
  // Accepts either a bare config object or a run manifest wrapping it under
  // "config". Unknown keys are rejected. Missing keys keep their defaults.
  static ExperimentConfig from_json(const json& j);
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double train_pseudo_accuracy = 1.0;
  double test_pseudo_accuracy = 1.0;
  Eigen::VectorXd train_rmse_channels;
  Eigen::VectorXd test_rmse_channels;
  double persistence_train_rmse = 0.0;
  double persistence_test_rmse = 0.0;
  std::vector<double> loss_curve;
  double wall_seconds = 0.0;
  // Plot data: absolute time index of the first test target plus the test
  // actual/predicted blocks (standardized scale).
  int first_test_t = 0;
  Eigen::MatrixXd test_actual;
  Eigen::MatrixXd test_pred;
  reservoir::ReservoirTrace trace;
  bool has_trace = false;
};

struct RunResult {
  ExperimentConfig cfg;
  std::vector<SeedOutcome> seeds;
  std::size_t model_params = 0;
  int feature_width = 0;      // reservoir family only
  int resolved_hidden = 0;    // recurrent family only
  std::size_t match_target = 0;  // qlstm parameter count used for matching
  double train_rmse_mean = 0.0, train_rmse_std = 0.0;
  double test_rmse_mean = 0.0, test_rmse_std = 0.0;
  double train_pseudo_accuracy_mean = 0.0, test_pseudo_accuracy_mean = 0.0;
  double persistence_test_rmse_mean = 0.0;

  json to_json() const;
};

RunResult run_experiment(const ExperimentConfig& cfg);

// Writes result.json, manifest.json, loss/predictions CSVs (and reservoir
// trace CSVs when requested) into cfg.out.
void write_run_outputs(const RunResult& result);

// Removes volatile fields (wall-clock timings) so two runs of the same
// manifest can be compared bitwise.
json strip_volatile(json result);

json comparison_json(const json& result_a, const json& result_b);
std::string comparison_text(const json& comparison);

struct GenerateConfig {
  data::CorpusConfig corpus;
  std::string out = "out";

  json to_json() const;
  static GenerateConfig from_json(const json& j);
};

void run_generate(const GenerateConfig& cfg);
void run_compare(const std::filesystem::path& result_a,
                 const std::filesystem::path& result_b,
                 const std::filesystem::path& out_dir);

}  // namespace qts::experiment
