#include "qts/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "qts/qlstm.hpp"
#include "qts/train.hpp"

namespace qts::experiment {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Qlstm: return "qlstm";
    case ModelKind::Rc: return "rc";
    case ModelKind::Qrc: return "qrc";
    case ModelKind::NnRc: return "nn-rc";
    case ModelKind::NnQrc: return "nn-qrc";
  }
  throw std::invalid_argument("unknown model kind");
}

ModelKind model_from_string(const std::string& name) {
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "qlstm") return ModelKind::Qlstm;
  if (name == "rc") return ModelKind::Rc;
  if (name == "qrc") return ModelKind::Qrc;
  if (name == "nn-rc") return ModelKind::NnRc;
  if (name == "nn-qrc") return ModelKind::NnQrc;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::string to_string(Mode mode) {
  return mode == Mode::Univariate ? "univariate" : "multivariate";
}

Mode mode_from_string(const std::string& name) {
  if (name == "univariate") return Mode::Univariate;
  if (name == "multivariate") return Mode::Multivariate;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

bool is_reservoir(ModelKind kind) {
  return kind == ModelKind::Rc || kind == ModelKind::Qrc ||
         kind == ModelKind::NnRc || kind == ModelKind::NnQrc;
}

bool is_quantum(ModelKind kind) {
  return kind == ModelKind::Qlstm || kind == ModelKind::Qrc ||
         kind == ModelKind::NnQrc;
}

std::vector<int> ExperimentConfig::effective_channels() const {
  if (!channels.empty()) return channels;
  if (mode == Mode::Univariate) return {0};
  return {0, 1};
}

void ExperimentConfig::validate() const {
  if (corpus.empty())
    throw std::invalid_argument("config: corpus path is required");
  if (lag < 1) throw std::invalid_argument("config: lag must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: seed list is empty");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("config: learning_rate must be >= 0");
  if (n_qubits < 1 || n_qubits > 14)
    throw std::invalid_argument("config: n_qubits must be in [1, 14]");
  if (layers < 1) throw std::invalid_argument("config: layers must be >= 1");
  if (qrc_layers < 1)
    throw std::invalid_argument("config: qrc_layers must be >= 1");
  if (hidden < 0) throw std::invalid_argument("config: hidden must be >= 0");
  if (esn_units < 1)
    throw std::invalid_argument("config: esn_units must be >= 1");
  if (!(spectral_radius > 0))
    throw std::invalid_argument("config: spectral_radius must be > 0");
  if (leak_rate < 0 || leak_rate > 1)
    throw std::invalid_argument("config: leak_rate must be in [0, 1]");
  if (ridge_lambda < 0)
    throw std::invalid_argument("config: ridge_lambda must be >= 0");
  if (washout < 0) throw std::invalid_argument("config: washout must be >= 0");
  if (mlp_hidden < 1)
    throw std::invalid_argument("config: mlp_hidden must be >= 1");
  if (mlp_epochs < 1)
    throw std::invalid_argument("config: mlp_epochs must be >= 1");
  if (!(mlp_learning_rate >= 0) || !std::isfinite(mlp_learning_rate))
    throw std::invalid_argument("config: mlp_learning_rate must be >= 0");
  if (optimizer != "adam" && optimizer != "sgd")
    throw std::invalid_argument("config: optimizer must be adam or sgd");
  qlstm::ansatz_from_string(ansatz);  // throws on unknown names

  const auto ch = effective_channels();
  for (int c : ch)
    if (c < 0)
      throw std::invalid_argument("config: channel indices must be >= 0");
  if (mode == Mode::Univariate && ch.size() != 1)
    throw std::invalid_argument(
        "config: univariate mode uses exactly one channel");
  if (mode == Mode::Multivariate && ch.size() < 2)
    throw std::invalid_argument(
        "config: multivariate mode needs at least two channels");
}

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = to_string(model);
  j["mode"] = to_string(mode);
  j["corpus"] = corpus;
  j["channels"] = effective_channels();
  j["lag"] = lag;
  j["horizon"] = horizon;
  j["seeds"] = seeds;
  j["out"] = out;
  j["dump_trace"] = dump_trace;
  j["n_qubits"] = n_qubits;
  j["layers"] = layers;
  j["ansatz"] = ansatz;
  j["hidden"] = hidden;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["optimizer"] = optimizer;
  j["esn_units"] = esn_units;
  j["spectral_radius"] = spectral_radius;
  j["leak_rate"] = leak_rate;
  j["ridge_lambda"] = ridge_lambda;
  j["qrc_layers"] = qrc_layers;
  j["washout"] = washout;
  j["mlp_hidden"] = mlp_hidden;
  j["mlp_epochs"] = mlp_epochs;
  j["mlp_learning_rate"] = mlp_learning_rate;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  const json& c = j.contains("config") ? j.at("config") : j;
  static const std::set<std::string> known = {
      "model",         "mode",          "corpus",
      "channels",      "lag",           "horizon",
      "seeds",         "out",           "dump_trace",
      "n_qubits",      "layers",        "ansatz",
      "hidden",        "learning_rate", "epochs",
      "optimizer",     "esn_units",     "spectral_radius",
      "leak_rate",     "ridge_lambda",  "qrc_layers",
      "washout",       "mlp_hidden",    "mlp_epochs",
      "mlp_learning_rate"};
  for (const auto& [key, value] : c.items())
    if (!known.contains(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");

  ExperimentConfig cfg;
  if (c.contains("model"))
    cfg.model = model_from_string(c.at("model").get<std::string>());
  if (c.contains("mode"))
    cfg.mode = mode_from_string(c.at("mode").get<std::string>());
  if (c.contains("corpus")) cfg.corpus = c.at("corpus").get<std::string>();
  if (c.contains("channels"))
    cfg.channels = c.at("channels").get<std::vector<int>>();
  if (c.contains("lag")) cfg.lag = c.at("lag").get<int>();
  if (c.contains("horizon")) cfg.horizon = c.at("horizon").get<int>();
  if (c.contains("seeds"))
    cfg.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
  if (c.contains("out")) cfg.out = c.at("out").get<std::string>();
  if (c.contains("dump_trace")) cfg.dump_trace = c.at("dump_trace").get<bool>();
  if (c.contains("n_qubits")) cfg.n_qubits = c.at("n_qubits").get<int>();
  if (c.contains("layers")) cfg.layers = c.at("layers").get<int>();
  if (c.contains("ansatz")) cfg.ansatz = c.at("ansatz").get<std::string>();
  if (c.contains("hidden")) cfg.hidden = c.at("hidden").get<int>();
  if (c.contains("learning_rate"))
    cfg.learning_rate = c.at("learning_rate").get<double>();
  if (c.contains("epochs")) cfg.epochs = c.at("epochs").get<int>();
  if (c.contains("optimizer"))
    cfg.optimizer = c.at("optimizer").get<std::string>();
  if (c.contains("esn_units")) cfg.esn_units = c.at("esn_units").get<int>();
  if (c.contains("spectral_radius"))
    cfg.spectral_radius = c.at("spectral_radius").get<double>();
  if (c.contains("leak_rate")) cfg.leak_rate = c.at("leak_rate").get<double>();
  if (c.contains("ridge_lambda"))
    cfg.ridge_lambda = c.at("ridge_lambda").get<double>();
  if (c.contains("qrc_layers")) cfg.qrc_layers = c.at("qrc_layers").get<int>();
  if (c.contains("washout")) cfg.washout = c.at("washout").get<int>();
  if (c.contains("mlp_hidden")) cfg.mlp_hidden = c.at("mlp_hidden").get<int>();
  if (c.contains("mlp_epochs")) cfg.mlp_epochs = c.at("mlp_epochs").get<int>();
  if (c.contains("mlp_learning_rate"))
    cfg.mlp_learning_rate = c.at("mlp_learning_rate").get<double>();
  return cfg;
}

namespace {

struct Frame {
  std::vector<data::SeriesStd> channels;
  std::vector<std::string> names;
};

Frame prepare_frame(const ExperimentConfig& cfg) {
  data::CsvTable table = data::ingest_csv(cfg.corpus);
  Frame frame;
  for (int ch : cfg.effective_channels()) {
    if (ch >= static_cast<int>(table.series.size()))
      throw std::invalid_argument(
          "config: channel " + std::to_string(ch) +
          " out of range; corpus has " + std::to_string(table.series.size()) +
          " columns");
    const auto& raw = table.series[ch];
    const int t_len = static_cast<int>(raw.values.size());
    const int fit = std::max(2, static_cast<int>(std::floor(0.8 * t_len)));
    frame.channels.push_back(data::standardize(raw, 0, fit));
    frame.names.push_back(table.names[ch]);
  }
  return frame;
}

train::OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return train::OptimizerKind::Adam;
  if (name == "sgd") return train::OptimizerKind::SGD;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

void fill_metrics(SeedOutcome& o, const Eigen::MatrixXd& pred,
                  const Eigen::MatrixXd& actual,
                  const Eigen::MatrixXd& naive, Eigen::Index fit_begin,
                  Eigen::Index split) {
  const Eigen::Index rows = actual.rows();
  const Eigen::MatrixXd pred_train = pred.middleRows(fit_begin, split - fit_begin);
  const Eigen::MatrixXd act_train = actual.middleRows(fit_begin, split - fit_begin);
  const Eigen::MatrixXd pred_test = pred.bottomRows(rows - split);
  const Eigen::MatrixXd act_test = actual.bottomRows(rows - split);
  o.train_rmse = train::rmse(pred_train, act_train);
  o.test_rmse = train::rmse(pred_test, act_test);
  o.train_pseudo_accuracy = train::pseudo_accuracy(o.train_rmse);
  o.test_pseudo_accuracy = train::pseudo_accuracy(o.test_rmse);
  o.train_rmse_channels = train::rmse_per_channel(pred_train, act_train);
  o.test_rmse_channels = train::rmse_per_channel(pred_test, act_test);
  o.persistence_train_rmse = train::rmse(
      Eigen::MatrixXd(naive.middleRows(fit_begin, split - fit_begin)),
      act_train);
  o.persistence_test_rmse =
      train::rmse(Eigen::MatrixXd(naive.bottomRows(rows - split)), act_test);
  o.test_actual = act_test;
  o.test_pred = pred_test;
}

SeedOutcome run_recurrent_seed(const ExperimentConfig& cfg,
                               const data::LagDataset& d, std::uint64_t seed,
                               RunResult& agg) {
  const Eigen::Index rows = d.X.rows();
  const Eigen::Index split = d.split_index;
  if (split < 1 || split >= rows)
    throw std::invalid_argument("corpus too short for an 80/20 lag split");
  const int outputs = static_cast<int>(d.Y.cols());
  const int input_dim = outputs;

  train::OptimizerConfig opt;
  opt.kind = optimizer_from_string(cfg.optimizer);
  opt.learning_rate = cfg.learning_rate;
  opt.epochs = cfg.epochs;
  opt.seed = seed;
  opt.validate();

  qlstm::QlstmConfig qc;
  qc.n_qubits = cfg.n_qubits;
  qc.layers = cfg.layers;
  qc.input_size = input_dim;
  qc.ansatz = qlstm::ansatz_from_string(cfg.ansatz);

  SeedOutcome o;
  o.seed = seed;
  const std::uint64_t readout_seed = Rng::derive(seed, 6);
  const Eigen::MatrixXd x_train = d.X.topRows(split);
  const Eigen::MatrixXd y_train = d.Y.topRows(split);
  Eigen::MatrixXd pred_all;

  if (cfg.model == ModelKind::Qlstm) {
    qlstm::QlstmCell cell = qlstm::QlstmCell::seeded(qc, seed);
    qlstm::Readout ro =
        qlstm::Readout::seeded(cell.hidden_size(), outputs, readout_seed);
    agg.model_params = cell.param_count() + ro.param_count();
    agg.match_target = agg.model_params;
    agg.resolved_hidden = cell.hidden_size();
    o.loss_curve = qlstm::train_qlstm(cell, ro, x_train, y_train, opt).loss_curve;
    pred_all = qlstm::forecast_windows(cell, ro, d.X);
  } else {
    const std::size_t target =
        qlstm::QlstmCell::seeded(qc, 1).param_count() +
        static_cast<std::size_t>(outputs) * (qc.n_qubits + 1);
    int hidden = cfg.hidden;
    if (hidden == 0)
      hidden = qlstm::choose_matching_hidden(target, input_dim, outputs).hidden;
    qlstm::LstmCell cell = qlstm::LstmCell::seeded(hidden, input_dim, seed);
    qlstm::Readout ro = qlstm::Readout::seeded(hidden, outputs, readout_seed);
    agg.model_params = cell.param_count() + ro.param_count();
    agg.match_target = target;
    agg.resolved_hidden = hidden;
    o.loss_curve = qlstm::train_lstm(cell, ro, x_train, y_train, opt).loss_curve;
    pred_all = qlstm::forecast_windows(cell, ro, d.X);
  }

  Eigen::MatrixXd naive(rows, outputs);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int c = 0; c < outputs; ++c)
      naive(r, c) = d.X(r, c * cfg.lag + cfg.lag - 1);
  fill_metrics(o, pred_all, d.Y, naive, 0, split);
  o.first_test_t = static_cast<int>(split) + cfg.lag + cfg.horizon - 1;
  return o;
}

SeedOutcome run_reservoir_seed(const ExperimentConfig& cfg, const Frame& frame,
                               std::uint64_t seed, RunResult& agg) {
  const int n_ch = static_cast<int>(frame.channels.size());
  const Eigen::Index t_len = frame.channels[0].x.size();
  const Eigen::Index rows = t_len - cfg.horizon;
  if (rows < 2) throw std::invalid_argument("corpus too short");
  Eigen::MatrixXd inputs(rows, n_ch), targets(rows, n_ch);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int c = 0; c < n_ch; ++c) {
      inputs(r, c) = frame.channels[c].x(r);
      targets(r, c) = frame.channels[c].x(r + cfg.horizon);
    }
  const Eigen::Index split =
      static_cast<Eigen::Index>(std::floor(0.8 * rows));
  if (split < 1 || split >= rows)
    throw std::invalid_argument("corpus too short for an 80/20 split");
  const Eigen::Index washout = cfg.washout;
  if (washout >= split)
    throw std::invalid_argument("config: washout leaves no training rows");

  Eigen::MatrixXd features;
  if (is_quantum(cfg.model)) {
    reservoir::QrcConfig qrc = reservoir::QrcConfig::seeded(
        cfg.n_qubits, cfg.qrc_layers, seed, cfg.leak_rate, cfg.ridge_lambda);
    features = reservoir::run_reservoir(qrc, inputs);
    agg.feature_width = qrc.feature_size();
  } else {
    reservoir::EsnConfig esn = reservoir::EsnConfig::seeded(
        cfg.esn_units, n_ch, seed, cfg.spectral_radius, cfg.leak_rate,
        cfg.ridge_lambda);
    features = reservoir::run_reservoir(esn, inputs);
    agg.feature_width = esn.feature_size();
  }

  SeedOutcome o;
  o.seed = seed;
  const Eigen::MatrixXd fit_r = features.middleRows(washout, split - washout);
  const Eigen::MatrixXd fit_y = targets.middleRows(washout, split - washout);
  Eigen::MatrixXd preds;
  if (cfg.model == ModelKind::Rc || cfg.model == ModelKind::Qrc) {
    Eigen::MatrixXd w = reservoir::fit_ridge({fit_r, fit_y}, cfg.ridge_lambda);
    preds = reservoir::predict_linear_rows(w, features);
    agg.model_params = static_cast<std::size_t>(w.size());
  } else {
    // Two-stage readout: the ridge stage produces intermediate predictions
    // and the MLP refines those, not the raw reservoir features.
    Eigen::MatrixXd w = reservoir::fit_ridge({fit_r, fit_y}, cfg.ridge_lambda);
    const Eigen::MatrixXd lr_preds =
        reservoir::predict_linear_rows(w, features);
    reservoir::MlpConfig mlp_cfg;
    mlp_cfg.hidden = cfg.mlp_hidden;
    mlp_cfg.opt.kind = train::OptimizerKind::Adam;
    mlp_cfg.opt.learning_rate = cfg.mlp_learning_rate;
    mlp_cfg.opt.epochs = cfg.mlp_epochs;
    mlp_cfg.opt.seed = Rng::derive(seed, 1);
    reservoir::Mlp mlp = reservoir::fit_nn_readout(
        lr_preds.middleRows(washout, split - washout), fit_y, mlp_cfg,
        &o.loss_curve);
    preds = mlp.forward_rows(lr_preds);
    agg.model_params = static_cast<std::size_t>(w.size()) + mlp.param_count();
  }

  fill_metrics(o, preds, targets, inputs, washout, split);
  o.first_test_t = static_cast<int>(split) + cfg.horizon;
  if (cfg.dump_trace) {
    o.trace = reservoir::ReservoirTrace{features, targets};
    o.has_trace = true;
  }
  return o;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Frame frame = prepare_frame(cfg);

  RunResult result;
  result.cfg = cfg;
  std::optional<data::LagDataset> lags;
  if (!is_reservoir(cfg.model))
    lags = data::build_lags(frame.channels, cfg.lag,
                            cfg.mode == Mode::Univariate
                                ? data::LagMode::Univariate
                                : data::LagMode::Multivariate,
                            cfg.horizon);

  for (std::uint64_t seed : cfg.seeds) {
    const auto start = std::chrono::steady_clock::now();
    SeedOutcome o = is_reservoir(cfg.model)
                        ? run_reservoir_seed(cfg, frame, seed, result)
                        : run_recurrent_seed(cfg, *lags, seed, result);
    o.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.seeds.push_back(std::move(o));
  }

  const double n = static_cast<double>(result.seeds.size());
  auto mean_of = [&](auto get) {
    double acc = 0;
    for (const auto& s : result.seeds) acc += get(s);
    return acc / n;
  };
  auto std_of = [&](auto get, double mean) {
    double acc = 0;
    for (const auto& s : result.seeds) {
      const double d = get(s) - mean;
      acc += d * d;
    }
    return std::sqrt(acc / n);
  };
  auto train_rmse = [](const SeedOutcome& s) { return s.train_rmse; };
  auto test_rmse = [](const SeedOutcome& s) { return s.test_rmse; };
  result.train_rmse_mean = mean_of(train_rmse);
  result.train_rmse_std = std_of(train_rmse, result.train_rmse_mean);
  result.test_rmse_mean = mean_of(test_rmse);
  result.test_rmse_std = std_of(test_rmse, result.test_rmse_mean);
  result.train_pseudo_accuracy_mean =
      mean_of([](const SeedOutcome& s) { return s.train_pseudo_accuracy; });
  result.test_pseudo_accuracy_mean =
      mean_of([](const SeedOutcome& s) { return s.test_pseudo_accuracy; });
  result.persistence_test_rmse_mean =
      mean_of([](const SeedOutcome& s) { return s.persistence_test_rmse; });
  return result;
}

json RunResult::to_json() const {
  json j;
  j["config"] = cfg.to_json();
  json counts;
  counts["model_params"] = model_params;
  counts["feature_width"] = feature_width;
  counts["resolved_hidden"] = resolved_hidden;
  counts["match_target"] = match_target;
  j["param_counts"] = counts;
  j["per_seed"] = json::array();
  for (const auto& s : seeds) {
    json e;
    e["seed"] = s.seed;
    e["train_rmse"] = s.train_rmse;
    e["test_rmse"] = s.test_rmse;
    e["train_pseudo_accuracy"] = s.train_pseudo_accuracy;
    e["test_pseudo_accuracy"] = s.test_pseudo_accuracy;
    e["train_rmse_per_channel"] = std::vector<double>(
        s.train_rmse_channels.data(),
        s.train_rmse_channels.data() + s.train_rmse_channels.size());
    e["test_rmse_per_channel"] = std::vector<double>(
        s.test_rmse_channels.data(),
        s.test_rmse_channels.data() + s.test_rmse_channels.size());
    e["persistence_train_rmse"] = s.persistence_train_rmse;
    e["persistence_test_rmse"] = s.persistence_test_rmse;
    e["wall_seconds"] = s.wall_seconds;
    j["per_seed"].push_back(std::move(e));
  }
  json agg;
  agg["train_rmse_mean"] = train_rmse_mean;
  agg["train_rmse_std"] = train_rmse_std;
  agg["test_rmse_mean"] = test_rmse_mean;
  agg["test_rmse_std"] = test_rmse_std;
  agg["train_pseudo_accuracy_mean"] = train_pseudo_accuracy_mean;
  agg["test_pseudo_accuracy_mean"] = test_pseudo_accuracy_mean;
  agg["persistence_test_rmse_mean"] = persistence_test_rmse_mean;
  j["aggregate"] = agg;
  return j;
}

void write_run_outputs(const RunResult& result) {
  const std::filesystem::path dir = result.cfg.out;
  write_json_atomic(dir / "result.json", result.to_json());
  json manifest;
  manifest["command"] = "run";
  manifest["config"] = result.cfg.to_json();
  write_json_atomic(dir / "manifest.json", manifest);

  for (const auto& s : result.seeds) {
    const std::string tag = std::to_string(s.seed);
    if (!s.loss_curve.empty()) {
      std::string body = "epoch,loss\n";
      for (std::size_t i = 0; i < s.loss_curve.size(); ++i)
        body += std::to_string(i) + "," + format_double(s.loss_curve[i]) + "\n";
      write_file_atomic(dir / ("loss_seed" + tag + ".csv"), body);
    }
    std::string body = "t";
    const int outs = static_cast<int>(s.test_actual.cols());
    for (int c = 1; c <= outs; ++c) body += ",actual_" + std::to_string(c);
    for (int c = 1; c <= outs; ++c) body += ",predicted_" + std::to_string(c);
    body += "\n";
    for (Eigen::Index r = 0; r < s.test_actual.rows(); ++r) {
      body += std::to_string(s.first_test_t + r);
      for (int c = 0; c < outs; ++c)
        body += "," + format_double(s.test_actual(r, c));
      for (int c = 0; c < outs; ++c)
        body += "," + format_double(s.test_pred(r, c));
      body += "\n";
    }
    write_file_atomic(dir / ("predictions_seed" + tag + ".csv"), body);
    if (s.has_trace)
      reservoir::export_trace_csv(dir / ("trace_seed" + tag + ".csv"), s.trace);
  }
}

json strip_volatile(json result) {
  if (result.contains("per_seed"))
    for (auto& entry : result["per_seed"]) entry.erase("wall_seconds");
  return result;
}

json comparison_json(const json& result_a, const json& result_b) {
  auto side = [](const json& r) {
    json s;
    s["model"] = r.at("config").at("model");
    s["mode"] = r.at("config").at("mode");
    s["params"] = r.at("param_counts").at("model_params");
    s["feature_width"] = r.at("param_counts").at("feature_width");
    s["resolved_hidden"] = r.at("param_counts").at("resolved_hidden");
    for (const char* key :
         {"train_rmse_mean", "train_rmse_std", "test_rmse_mean",
          "test_rmse_std", "train_pseudo_accuracy_mean",
          "test_pseudo_accuracy_mean", "persistence_test_rmse_mean"})
      s[key] = r.at("aggregate").at(key);
    return s;
  };
  json c;
  c["a"] = side(result_a);
  c["b"] = side(result_b);
  const double pa = c["a"]["params"].get<double>();
  const double pb = c["b"]["params"].get<double>();
  const double hi = std::max(pa, pb);
  const double lo = std::min(pa, pb);
  const double gap = hi > 0 ? (hi - lo) / hi : 0.0;
  c["param_ratio"] = lo > 0 ? hi / lo : 0.0;
  c["param_gap"] = gap;
  c["param_match_ok"] = gap <= 0.10;
  if (gap > 0.10)
    c["warning"] = "parameter counts differ by more than 10%";
  c["delta_test_rmse_mean"] = c["a"]["test_rmse_mean"].get<double>() -
                              c["b"]["test_rmse_mean"].get<double>();
  c["delta_train_rmse_mean"] = c["a"]["train_rmse_mean"].get<double>() -
                               c["b"]["train_rmse_mean"].get<double>();
  const double ta = c["a"]["test_rmse_mean"].get<double>();
  const double tb = c["b"]["test_rmse_mean"].get<double>();
  c["lower_test_rmse"] =
      ta < tb ? c["a"]["model"] : (tb < ta ? c["b"]["model"] : json("tie"));
  return c;
}

std::string comparison_text(const json& c) {
  std::ostringstream os;
  const json& a = c.at("a");
  const json& b = c.at("b");
  auto line = [&](const std::string& label, const std::string& va,
                  const std::string& vb) {
    os << std::left << std::setw(28) << label << std::setw(22) << va
       << std::setw(22) << vb << "\n";
  };
  auto num = [](const json& v) {
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  };
  auto pm = [&](const json& r, const std::string& mean,
                const std::string& sd) {
    return num(r.at(mean)) + " +/- " + num(r.at(sd));
  };
  line("metric", a.at("model").get<std::string>(),
       b.at("model").get<std::string>());
  line("mode", a.at("mode").get<std::string>(),
       b.at("mode").get<std::string>());
  line("params", std::to_string(a.at("params").get<long long>()),
       std::to_string(b.at("params").get<long long>()));
  line("feature_width",
       std::to_string(a.at("feature_width").get<long long>()),
       std::to_string(b.at("feature_width").get<long long>()));
  line("train_rmse", pm(a, "train_rmse_mean", "train_rmse_std"),
       pm(b, "train_rmse_mean", "train_rmse_std"));
  line("test_rmse", pm(a, "test_rmse_mean", "test_rmse_std"),
       pm(b, "test_rmse_mean", "test_rmse_std"));
  line("test_pseudo_accuracy", num(a.at("test_pseudo_accuracy_mean")),
       num(b.at("test_pseudo_accuracy_mean")));
  line("persistence_test_rmse", num(a.at("persistence_test_rmse_mean")),
       num(b.at("persistence_test_rmse_mean")));
  os << "param ratio: " << num(c.at("param_ratio"))
     << " (gap " << std::setprecision(3) << c.at("param_gap").get<double>() * 100.0
     << "%)";
  if (c.contains("warning")) os << "  WARNING: " << c.at("warning").get<std::string>();
  os << "\n";
  os << "lower mean test RMSE: ";
  if (c.at("lower_test_rmse").is_string())
    os << c.at("lower_test_rmse").get<std::string>();
  os << "\n";
  return os.str();
}

json GenerateConfig::to_json() const {
  json j = corpus.to_json();
  j["out"] = out;
  return j;
}

GenerateConfig GenerateConfig::from_json(const json& j) {
  const json& c = j.contains("config") ? j.at("config") : j;
  static const std::set<std::string> known = {"n_series", "months", "horizon",
                                              "fit_months", "seed", "out"};
  for (const auto& [key, value] : c.items())
    if (!known.contains(key))
      throw std::invalid_argument("generate config: unknown key '" + key + "'");
  GenerateConfig cfg;
  if (c.contains("n_series")) cfg.corpus.n_series = c.at("n_series").get<int>();
  if (c.contains("months")) cfg.corpus.months = c.at("months").get<int>();
  if (c.contains("horizon")) cfg.corpus.horizon = c.at("horizon").get<int>();
  if (c.contains("fit_months"))
    cfg.corpus.fit_months = c.at("fit_months").get<int>();
  if (c.contains("seed")) cfg.corpus.seed = c.at("seed").get<std::uint64_t>();
  if (c.contains("out")) cfg.out = c.at("out").get<std::string>();
  return cfg;
}

void run_generate(const GenerateConfig& cfg) {
  cfg.corpus.validate();
  data::Corpus corpus = data::generate_corpus(cfg.corpus);
  const std::filesystem::path dir = cfg.out;
  std::vector<Eigen::VectorXd> columns;
  columns.reserve(corpus.series.size());
  for (const auto& s : corpus.series) columns.push_back(s.values);
  data::write_csv(dir / "corpus.csv", corpus.names, columns);
  write_json_atomic(dir / "corpus_meta.json", corpus.meta);
  json manifest;
  manifest["command"] = "generate";
  manifest["config"] = cfg.to_json();
  write_json_atomic(dir / "manifest.json", manifest);
}

void run_compare(const std::filesystem::path& result_a,
                 const std::filesystem::path& result_b,
                 const std::filesystem::path& out_dir) {
  const json a = read_json_file(result_a);
  const json b = read_json_file(result_b);
  json cmp;
  try {
    cmp = comparison_json(a, b);
  } catch (const json::exception& e) {
    throw DataError("compare: malformed result file: " + std::string(e.what()));
  }
  write_json_atomic(out_dir / "comparison.json", cmp);
  write_file_atomic(out_dir / "comparison.txt", comparison_text(cmp));
}

}  // namespace qts::experiment
