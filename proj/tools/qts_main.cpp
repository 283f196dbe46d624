#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qts/experiment.hpp"

namespace {

using namespace qts::experiment;

// Config-file problems are usage errors (exit 1), unlike missing corpora or
// result files, which are data errors (exit 2).
qts::json load_config_file(const std::string& path) {
  try {
    return qts::read_json_file(path);
  } catch (const qts::DataError& e) {
    throw std::invalid_argument(e.what());
  }
}

int cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  const RunResult res = run_experiment(cfg);
  write_run_outputs(res);
  std::cout << "model " << to_string(cfg.model) << " (" << to_string(cfg.mode)
            << "), " << res.seeds.size() << " seed(s), " << res.model_params
            << " trainable parameter(s)\n";
  std::cout << "  test rmse  " << res.test_rmse_mean << " +/- "
            << res.test_rmse_std << "  (persistence "
            << res.persistence_test_rmse_mean << ")\n";
  std::cout << "  train rmse " << res.train_rmse_mean << " +/- "
            << res.train_rmse_std << "\n";
  std::cout << "  wrote " << cfg.out << "/result.json\n";
  return 0;
}

int cmd_generate(const GenerateConfig& cfg) {
  run_generate(cfg);
  std::cout << "wrote " << cfg.out << "/corpus.csv (" << cfg.corpus.n_series
            << " series, " << cfg.corpus.months << "+" << cfg.corpus.horizon
            << " months, seed " << cfg.corpus.seed << ")\n";
  return 0;
}

int cmd_compare(const std::string& result_a, const std::string& result_b,
                const std::string& out) {
  run_compare(result_a, result_b, out);
  std::cout << qts::read_json_file(out + "/comparison.json").dump(2) << "\n";
  std::cout << "wrote " << out << "/comparison.json and " << out
            << "/comparison.txt\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qts: quantum vs classical sequence models on synthetic monthly "
      "series"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand(
      "generate", "Sample a synthetic corpus and write corpus.csv");
  std::string gen_config;
  GenerateConfig gen_defaults;
  int gen_series = 0, gen_months = 0, gen_horizon = 0, gen_fit = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* g_config =
      gen->add_option("--config", gen_config,
                      "JSON config or manifest; flags override its values")
          ->check(CLI::ExistingFile);
  auto* g_series =
      gen->add_option("--series", gen_series, "number of series (default 20)");
  auto* g_months = gen->add_option("--months", gen_months,
                                   "observed months per series (default 96)");
  auto* g_horizon = gen->add_option(
      "--horizon", gen_horizon, "synthesized continuation months (default 36)");
  auto* g_fit = gen->add_option("--fit-months", gen_fit,
                                "months used to fit GP and regimes (default 60)");
  auto* g_seed = gen->add_option("--seed", gen_seed, "corpus seed (default 1)");
  auto* g_out = gen->add_option("--out", gen_out, "output directory");

  // ---- run ----
  auto* run = app.add_subcommand(
      "run", "Train one model on a corpus and write result files");
  std::string run_config, r_model, r_mode, r_corpus, r_out, r_ansatz, r_opt;
  std::vector<std::uint64_t> r_seeds;
  std::vector<int> r_channels;
  int r_lag = 0, r_horizon = 0, r_qubits = 0, r_layers = 0, r_hidden = 0;
  int r_epochs = 0, r_esn = 0, r_qrc_layers = 0, r_washout = 0;
  int r_mlp_hidden = 0, r_mlp_epochs = 0;
  double r_lr = 0, r_rho = 0, r_leak = 0, r_lambda = 0, r_mlp_lr = 0;
  bool r_dump = false;
  auto* o_config =
      run->add_option("--config", run_config,
                      "JSON config or manifest; flags override its values")
          ->check(CLI::ExistingFile);
  auto* o_model = run->add_option("--model", r_model,
                                  "lstm | qlstm | rc | qrc | nn-rc | nn-qrc");
  auto* o_mode =
      run->add_option("--mode", r_mode, "univariate | multivariate");
  auto* o_corpus = run->add_option("--corpus", r_corpus, "corpus CSV path");
  auto* o_channels = run->add_option(
      "--channels", r_channels, "corpus column indices (repeatable)");
  auto* o_lag = run->add_option("--lag", r_lag, "lag window k (default 4)");
  auto* o_horizon =
      run->add_option("--horizon", r_horizon, "forecast horizon (default 1)");
  auto* o_seed = run->add_option(
      "--seed", r_seeds, "seed (repeatable; default 1 2 3 4 5)");
  auto* o_out = run->add_option("--out", r_out, "output directory");
  auto* o_dump = run->add_flag("--dump-trace", r_dump,
                               "write reservoir feature traces per seed");
  auto* o_qubits =
      run->add_option("--n-qubits", r_qubits, "qubits for qlstm/qrc");
  auto* o_layers =
      run->add_option("--layers", r_layers, "variational layers for qlstm");
  auto* o_ansatz = run->add_option("--ansatz", r_ansatz, "qlstm ansatz name");
  auto* o_hidden = run->add_option(
      "--hidden", r_hidden, "lstm hidden units (0 = parameter-matched)");
  auto* o_lr = run->add_option("--learning-rate", r_lr, "training step size");
  auto* o_epochs = run->add_option("--epochs", r_epochs, "training epochs");
  auto* o_optimizer = run->add_option("--optimizer", r_opt, "adam | sgd");
  auto* o_esn = run->add_option("--esn-units", r_esn, "echo-state units");
  auto* o_rho = run->add_option("--spectral-radius", r_rho,
                                "echo-state spectral radius");
  auto* o_leak = run->add_option("--leak-rate", r_leak, "reservoir leak rate");
  auto* o_lambda =
      run->add_option("--ridge-lambda", r_lambda, "ridge regularization");
  auto* o_qrc_layers =
      run->add_option("--qrc-layers", r_qrc_layers, "qrc circuit layers");
  auto* o_washout = run->add_option("--washout", r_washout,
                                    "reservoir rows excluded from the fit");
  auto* o_mlp_hidden =
      run->add_option("--mlp-hidden", r_mlp_hidden, "nn readout hidden units");
  auto* o_mlp_epochs =
      run->add_option("--mlp-epochs", r_mlp_epochs, "nn readout epochs");
  auto* o_mlp_lr = run->add_option("--mlp-learning-rate", r_mlp_lr,
                                   "nn readout step size");

  // ---- compare ----
  auto* cmp = app.add_subcommand(
      "compare", "Compare two result.json files side by side");
  std::string cmp_a, cmp_b, cmp_out = "compare";
  cmp->add_option("result_a", cmp_a, "first result.json")->required();
  cmp->add_option("result_b", cmp_b, "second result.json")->required();
  cmp->add_option("--out", cmp_out, "output directory (default compare)");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) {
      GenerateConfig cfg = gen_defaults;
      if (g_config->count()) cfg = GenerateConfig::from_json(load_config_file(gen_config));
      if (g_series->count()) cfg.corpus.n_series = gen_series;
      if (g_months->count()) cfg.corpus.months = gen_months;
      if (g_horizon->count()) cfg.corpus.horizon = gen_horizon;
      if (g_fit->count()) cfg.corpus.fit_months = gen_fit;
      if (g_seed->count()) cfg.corpus.seed = gen_seed;
      if (g_out->count()) cfg.out = gen_out;
      return cmd_generate(cfg);
    }
    if (run->parsed()) {
      ExperimentConfig cfg;
      if (o_config->count())
        cfg = ExperimentConfig::from_json(load_config_file(run_config));
      if (o_model->count()) cfg.model = model_from_string(r_model);
      if (o_mode->count()) cfg.mode = mode_from_string(r_mode);
      if (o_corpus->count()) cfg.corpus = r_corpus;
      if (o_channels->count()) cfg.channels = r_channels;
      if (o_lag->count()) cfg.lag = r_lag;
      if (o_horizon->count()) cfg.horizon = r_horizon;
      if (o_seed->count()) cfg.seeds = r_seeds;
      if (o_out->count()) cfg.out = r_out;
      if (o_dump->count()) cfg.dump_trace = r_dump;
      if (o_qubits->count()) cfg.n_qubits = r_qubits;
      if (o_layers->count()) cfg.layers = r_layers;
      if (o_ansatz->count()) cfg.ansatz = r_ansatz;
      if (o_hidden->count()) cfg.hidden = r_hidden;
      if (o_lr->count()) cfg.learning_rate = r_lr;
      if (o_epochs->count()) cfg.epochs = r_epochs;
      if (o_optimizer->count()) cfg.optimizer = r_opt;
      if (o_esn->count()) cfg.esn_units = r_esn;
      if (o_rho->count()) cfg.spectral_radius = r_rho;
      if (o_leak->count()) cfg.leak_rate = r_leak;
      if (o_lambda->count()) cfg.ridge_lambda = r_lambda;
      if (o_qrc_layers->count()) cfg.qrc_layers = r_qrc_layers;
      if (o_washout->count()) cfg.washout = r_washout;
      if (o_mlp_hidden->count()) cfg.mlp_hidden = r_mlp_hidden;
      if (o_mlp_epochs->count()) cfg.mlp_epochs = r_mlp_epochs;
      if (o_mlp_lr->count()) cfg.mlp_learning_rate = r_mlp_lr;
      return cmd_run(cfg);
    }
    return cmd_compare(cmp_a, cmp_b, cmp_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qts::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const qts::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
