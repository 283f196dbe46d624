#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qts/data.hpp"
#include "qts/encoding.hpp"
#include "qts/experiment.hpp"
#include "qts/qlstm.hpp"
#include "qts/qsim.hpp"
#include "qts/reservoir.hpp"
#include "qts/train.hpp"

namespace py = pybind11;
using namespace qts;

namespace {

qsim::PauliAxis axis_from_string(const std::string& name) {
  if (name == "X" || name == "x") return qsim::PauliAxis::X;
  if (name == "Y" || name == "y") return qsim::PauliAxis::Y;
  if (name == "Z" || name == "z") return qsim::PauliAxis::Z;
  throw std::invalid_argument("unknown Pauli axis '" + name + "'");
}

std::vector<qsim::Observable> parse_observables(
    const std::vector<std::pair<std::string, int>>& pairs) {
  std::vector<qsim::Observable> obs;
  obs.reserve(pairs.size());
  for (const auto& [axis, qubit] : pairs)
    obs.push_back({axis_from_string(axis), qubit});
  return obs;
}

std::vector<data::SeriesStd> channels_from_arrays(
    const std::vector<Eigen::VectorXd>& xs) {
  std::vector<data::SeriesStd> channels;
  channels.reserve(xs.size());
  for (const auto& x : xs) {
    data::SeriesStd s;
    s.x = x;
    s.tau.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) s.tau(i) = i / 12.0;
    s.mean = 0.0;
    s.scale = 1.0;
    s.fit_begin = 0;
    s.fit_end = static_cast<int>(x.size());
    channels.push_back(std::move(s));
  }
  return channels;
}

}  // namespace

PYBIND11_MODULE(_qts, m) {
  m.doc() =
      "Quantum and classical sequence models for synthetic monthly series: "
      "statevector simulation, amplitude encoding, QLSTM/LSTM training, "
      "quantum and echo-state reservoirs, and the experiment pipeline.";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");

  // ---- statevector simulator ----
  py::class_<qsim::StateVector>(m, "StateVector")
      .def_static("zero", &qsim::StateVector::zero_state, py::arg("n_qubits"))
      .def_readonly("n_qubits", &qsim::StateVector::n_qubits)
      .def_property_readonly(
          "amplitudes",
          [](const qsim::StateVector& s) { return s.amplitudes; })
      .def("norm_sq", &qsim::StateVector::norm_sq);

  py::class_<qsim::Gate>(m, "Gate")
      .def_static("h", &qsim::Gate::hadamard, py::arg("target"))
      .def_static("rx", &qsim::Gate::rx, py::arg("target"), py::arg("theta"))
      .def_static("ry", &qsim::Gate::ry, py::arg("target"), py::arg("theta"))
      .def_static("rz", &qsim::Gate::rz, py::arg("target"), py::arg("theta"))
      .def_static("rot", &qsim::Gate::rot, py::arg("target"), py::arg("alpha"),
                  py::arg("beta"), py::arg("gamma"))
      .def_static("cnot", &qsim::Gate::cnot, py::arg("control"),
                  py::arg("target"));

  py::class_<qsim::CircuitSpec>(m, "Circuit")
      .def(py::init([](int n_qubits) {
             qsim::CircuitSpec c;
             c.n_qubits = n_qubits;
             return c;
           }),
           py::arg("n_qubits"))
      .def("add", &qsim::CircuitSpec::add, py::arg("gate"))
      .def("add_parametrized", &qsim::CircuitSpec::add_parametrized,
           py::arg("gate"))
      .def_property_readonly("param_count", &qsim::CircuitSpec::param_count)
      .def("validate", &qsim::CircuitSpec::validate);

  m.def(
      "run_circuit",
      [](const qsim::StateVector& input, const qsim::CircuitSpec& circuit,
         const std::vector<double>& params) {
        return qsim::run_circuit(input, circuit, params);
      },
      py::arg("input"), py::arg("circuit"),
      py::arg("params") = std::vector<double>{});
  m.def(
      "expect_pauli",
      [](const qsim::StateVector& s, const std::string& axis, int qubit) {
        return qsim::expect_pauli(s, axis_from_string(axis), qubit);
      },
      py::arg("state"), py::arg("axis"), py::arg("qubit"));
  m.def(
      "z_expectations",
      [](const qsim::StateVector& s) {
        std::vector<double> z(s.n_qubits);
        for (int q = 0; q < s.n_qubits; ++q)
          z[q] = qsim::expect_pauli(s, qsim::PauliAxis::Z, q);
        return z;
      },
      py::arg("state"));
  m.def(
      "parameter_shift_grad",
      [](const qsim::CircuitSpec& circuit, const std::vector<double>& params,
         const qsim::StateVector& input,
         const std::vector<std::pair<std::string, int>>& observables,
         const std::vector<double>& weights) {
        return qsim::parameter_shift_grad(circuit, params, input,
                                          parse_observables(observables),
                                          weights);
      },
      py::arg("circuit"), py::arg("params"), py::arg("input"),
      py::arg("observables"), py::arg("weights"));

  // ---- encoding ----
  m.def("amplitude_encode", &encoding::amplitude_encode, py::arg("vec"),
        "Exact amplitude encoding of a real vector with power-of-two length.");

  // ---- metrics ----
  m.def(
      "rmse",
      [](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual) {
        return train::rmse(pred, actual);
      },
      py::arg("pred"), py::arg("actual"));
  m.def("pseudo_accuracy", &train::pseudo_accuracy, py::arg("rmse_value"));

  // ---- reservoirs and readouts ----
  m.def(
      "qrc_features",
      [](const Eigen::MatrixXd& inputs, int n_qubits, int layers,
         std::uint64_t seed, double leak_rate) {
        const auto cfg =
            reservoir::QrcConfig::seeded(n_qubits, layers, seed, leak_rate);
        return reservoir::run_reservoir(cfg, inputs);
      },
      py::arg("inputs"), py::arg("n_qubits") = 4, py::arg("layers") = 3,
      py::arg("seed") = 1, py::arg("leak_rate") = 0.5,
      "Quantum reservoir feature rows (3 * n_qubits wide) for each input "
      "row.");
  m.def(
      "esn_features",
      [](const Eigen::MatrixXd& inputs, int units, std::uint64_t seed,
         double spectral_radius, double leak_rate) {
        const auto cfg = reservoir::EsnConfig::seeded(
            units, static_cast<int>(inputs.cols()), seed, spectral_radius,
            leak_rate);
        return reservoir::run_reservoir(cfg, inputs);
      },
      py::arg("inputs"), py::arg("units") = 12, py::arg("seed") = 1,
      py::arg("spectral_radius") = 0.9, py::arg("leak_rate") = 0.5,
      "Echo-state reservoir rows for each input row.");
  m.def(
      "fit_ridge",
      [](Eigen::MatrixXd features, Eigen::MatrixXd targets, double lam) {
        return reservoir::fit_ridge({std::move(features), std::move(targets)},
                                    lam);
      },
      py::arg("features"), py::arg("targets"), py::arg("ridge_lambda") = 1e-2);
  m.def("predict_linear", &reservoir::predict_linear_rows, py::arg("weights"),
        py::arg("features"));

  // ---- recurrent forecasters ----
  m.def(
      "train_forecaster",
      [](const std::string& model, const Eigen::MatrixXd& X,
         const Eigen::MatrixXd& Y, int n_qubits, int layers,
         const std::string& ansatz, int hidden, double learning_rate,
         int epochs, const std::string& optimizer, std::uint64_t seed) {
        const int outputs = static_cast<int>(Y.cols());
        train::OptimizerConfig opt;
        opt.kind = optimizer == "sgd" ? train::OptimizerKind::SGD
                                      : train::OptimizerKind::Adam;
        if (optimizer != "sgd" && optimizer != "adam")
          throw std::invalid_argument("optimizer must be adam or sgd");
        opt.learning_rate = learning_rate;
        opt.epochs = epochs;
        opt.seed = seed;
        opt.validate();
        const std::uint64_t readout_seed = Rng::derive(seed, 6);
        std::vector<double> loss;
        Eigen::MatrixXd pred;
        if (model == "qlstm") {
          qlstm::QlstmConfig qc;
          qc.n_qubits = n_qubits;
          qc.layers = layers;
          qc.input_size = outputs;
          qc.ansatz = qlstm::ansatz_from_string(ansatz);
          auto cell = qlstm::QlstmCell::seeded(qc, seed);
          auto ro = qlstm::Readout::seeded(cell.hidden_size(), outputs,
                                           readout_seed);
          loss = qlstm::train_qlstm(cell, ro, X, Y, opt).loss_curve;
          pred = qlstm::forecast_windows(cell, ro, X);
        } else if (model == "lstm") {
          auto cell = qlstm::LstmCell::seeded(hidden, outputs, seed);
          auto ro = qlstm::Readout::seeded(hidden, outputs, readout_seed);
          loss = qlstm::train_lstm(cell, ro, X, Y, opt).loss_curve;
          pred = qlstm::forecast_windows(cell, ro, X);
        } else {
          throw std::invalid_argument("model must be lstm or qlstm");
        }
        return py::make_tuple(loss, pred);
      },
      py::arg("model"), py::arg("X"), py::arg("Y"), py::arg("n_qubits") = 4,
      py::arg("layers") = 2, py::arg("ansatz") = "h_ry_ring",
      py::arg("hidden") = 5, py::arg("learning_rate") = 0.05,
      py::arg("epochs") = 40, py::arg("optimizer") = "adam",
      py::arg("seed") = 1,
      "Train a recurrent forecaster on lag windows; returns (loss_curve, "
      "predictions for every row of X).");

  // ---- data pipeline ----
  m.def(
      "standardize",
      [](const Eigen::VectorXd& values, int fit_begin, int fit_end) {
        data::SeriesRaw raw;
        raw.values = values;
        const data::SeriesStd s = data::standardize(raw, fit_begin, fit_end);
        return py::make_tuple(s.x, s.mean, s.scale);
      },
      py::arg("values"), py::arg("fit_begin"), py::arg("fit_end"),
      "Log1p-standardize a positive series against a fit window; returns "
      "(x, mean, scale).");
  m.def(
      "build_lags",
      [](const std::vector<Eigen::VectorXd>& channels, int lag,
         const std::string& mode, int horizon) {
        const data::LagDataset d = data::build_lags(
            channels_from_arrays(channels), lag,
            mode == "multivariate" ? data::LagMode::Multivariate
                                   : data::LagMode::Univariate,
            horizon);
        return py::make_tuple(d.X, d.Y, d.split_index);
      },
      py::arg("channels"), py::arg("lag") = 4, py::arg("mode") = "univariate",
      py::arg("horizon") = 1,
      "Sliding lag windows over standardized channels; returns (X, Y, "
      "split_index).");
  m.def(
      "generate_corpus",
      [](int n_series, int months, int horizon, int fit_months,
         std::uint64_t seed) {
        data::CorpusConfig cfg;
        cfg.n_series = n_series;
        cfg.months = months;
        cfg.horizon = horizon;
        cfg.fit_months = fit_months;
        cfg.seed = seed;
        cfg.validate();
        const data::Corpus corpus = data::generate_corpus(cfg);
        Eigen::MatrixXd table(corpus.series[0].values.size(),
                              static_cast<Eigen::Index>(corpus.series.size()));
        for (std::size_t c = 0; c < corpus.series.size(); ++c)
          table.col(static_cast<Eigen::Index>(c)) = corpus.series[c].values;
        return py::make_tuple(corpus.names, table, corpus.meta.dump());
      },
      py::arg("n_series") = 20, py::arg("months") = 96, py::arg("horizon") = 36,
      py::arg("fit_months") = 60, py::arg("seed") = 1,
      "Sample a synthetic corpus; returns (names, months x series matrix, "
      "metadata json string).");

  // ---- experiment pipeline (json-string interface) ----
  m.def(
      "run_experiment_json",
      [](const std::string& config) {
        const auto cfg =
            experiment::ExperimentConfig::from_json(json::parse(config));
        return experiment::run_experiment(cfg).to_json().dump();
      },
      py::arg("config"),
      "Run one experiment from a config json string; returns the result "
      "json string.");
  m.def(
      "run_and_write_json",
      [](const std::string& config) {
        const auto cfg =
            experiment::ExperimentConfig::from_json(json::parse(config));
        const auto res = experiment::run_experiment(cfg);
        experiment::write_run_outputs(res);
        return res.to_json().dump();
      },
      py::arg("config"),
      "Run one experiment and write result/manifest/csv files to its output "
      "directory.");
  m.def(
      "generate_json",
      [](const std::string& config) {
        experiment::run_generate(
            experiment::GenerateConfig::from_json(json::parse(config)));
      },
      py::arg("config"),
      "Generate a corpus from a config json string and write its files.");
  m.def(
      "compare_files",
      [](const std::string& result_a, const std::string& result_b,
         const std::string& out_dir) {
        experiment::run_compare(result_a, result_b, out_dir);
      },
      py::arg("result_a"), py::arg("result_b"), py::arg("out_dir"),
      "Compare two result.json files and write comparison.json/.txt.");
}
