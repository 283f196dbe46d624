#include "qts/reservoir.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qts/common.hpp"
#include "qts/json_io.hpp"

namespace qts::reservoir {

namespace {

// Rot wall + CNOT ring per layer; angles fixed at construction.
qsim::CircuitSpec build_fixed_circuit(int n_qubits, int layers,
                                      const std::vector<double>& angles) {
  qsim::CircuitSpec c;
  c.n_qubits = n_qubits;
  std::size_t k = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) {
      double a = angles[k], b = angles[k + 1], g = angles[k + 2];
      k += 3;
      c.add(qsim::Gate::rot(q, a, b, g));
    }
    if (n_qubits >= 2)
      for (int q = 0; q < n_qubits; ++q)
        c.add(qsim::Gate::cnot(q, (q + 1) % n_qubits));
  }
  c.validate();
  return c;
}

std::vector<double> circuit_angles(const qsim::CircuitSpec& c) {
  std::vector<double> angles;
  for (const auto& g : c.gates)
    if (g.kind == qsim::GateKind::Rot)
      angles.insert(angles.end(), g.angles.begin(), g.angles.end());
  return angles;
}

int lifted_dim(int n_qubits, encoding::LiftKind lift) {
  return lift == encoding::LiftKind::TanhConcat ? 2 * n_qubits : n_qubits;
}

}  // namespace

void QrcConfig::validate() const {
  if (n_qubits < 1 || layers < 1)
    throw std::invalid_argument("qrc: qubits and layers must be positive");
  if (leak_rate < 0 || leak_rate > 1)
    throw std::invalid_argument("qrc: leak rate must be in [0,1]");
  if (!(ridge_lambda > 0))
    throw std::invalid_argument("qrc: ridge lambda must be > 0");
  if (bias.size() != n_qubits)
    throw std::invalid_argument("qrc: bias length must equal qubit count");
  if (proj.matrix.rows() != (Eigen::Index(1) << n_qubits) ||
      proj.matrix.cols() != lifted_dim(n_qubits, lift))
    throw std::invalid_argument("qrc: projection shape mismatch");
}

QrcConfig QrcConfig::seeded(int n_qubits, int layers, std::uint64_t seed,
                            double leak_rate, double ridge_lambda,
                            encoding::LiftKind lift) {
  QrcConfig cfg;
  cfg.n_qubits = n_qubits;
  cfg.layers = layers;
  cfg.leak_rate = leak_rate;
  cfg.ridge_lambda = ridge_lambda;
  cfg.lift = lift;
  cfg.seed = seed;

  Rng angle_rng(Rng::derive(seed, 0));
  std::vector<double> angles;
  angles.reserve(3 * n_qubits * layers);
  for (int i = 0; i < 3 * n_qubits * layers; ++i)
    angles.push_back(angle_rng.uniform(0.0, 2 * std::numbers::pi));
  cfg.circuit = build_fixed_circuit(n_qubits, layers, angles);

  Rng bias_rng(Rng::derive(seed, 1));
  cfg.bias.resize(n_qubits);
  for (int i = 0; i < n_qubits; ++i) cfg.bias(i) = bias_rng.uniform(-0.1, 0.1);

  cfg.proj = encoding::RandomProjection::gaussian(
      n_qubits, lifted_dim(n_qubits, lift), Rng::derive(seed, 2));
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json QrcConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "qrc";
  j["n_qubits"] = n_qubits;
  j["layers"] = layers;
  j["leak_rate"] = leak_rate;
  j["weights_xyz"] = {w_x, w_y, w_z};
  j["ridge_lambda"] = ridge_lambda;
  j["lift"] = lift == encoding::LiftKind::TanhConcat ? "tanh_concat" : "identity";
  j["seed"] = seed;
  j["bias"] = vector_to_json(bias);
  j["angles"] = circuit_angles(circuit);
  j["projection"] = matrix_to_json(proj.matrix);
  return j;
}

QrcConfig QrcConfig::from_json(const nlohmann::ordered_json& j) {
  QrcConfig cfg;
  cfg.n_qubits = j.at("n_qubits").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.leak_rate = j.at("leak_rate").get<double>();
  cfg.w_x = j.at("weights_xyz").at(0).get<double>();
  cfg.w_y = j.at("weights_xyz").at(1).get<double>();
  cfg.w_z = j.at("weights_xyz").at(2).get<double>();
  cfg.ridge_lambda = j.at("ridge_lambda").get<double>();
  std::string lift = j.at("lift").get<std::string>();
  if (lift == "tanh_concat")
    cfg.lift = encoding::LiftKind::TanhConcat;
  else if (lift == "identity")
    cfg.lift = encoding::LiftKind::Identity;
  else
    throw DataError("unknown lift kind: " + lift);
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.bias = vector_from_json(j.at("bias"));
  cfg.circuit = build_fixed_circuit(cfg.n_qubits, cfg.layers,
                                    j.at("angles").get<std::vector<double>>());
  cfg.proj =
      encoding::RandomProjection::from_matrix(matrix_from_json(j.at("projection")));
  cfg.validate();
  return cfg;
}

void EsnConfig::validate() const {
  if (units < 1) throw std::invalid_argument("esn: units must be positive");
  if (leak_rate < 0 || leak_rate > 1)
    throw std::invalid_argument("esn: leak rate must be in [0,1]");
  if (!(ridge_lambda > 0))
    throw std::invalid_argument("esn: ridge lambda must be > 0");
  if (W_res.rows() != units || W_res.cols() != units ||
      W_in.rows() != units || bias.size() != units)
    throw std::invalid_argument("esn: weight shape mismatch");
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EsnConfig EsnConfig::seeded(int units, int input_dim, std::uint64_t seed,
                            double rho, double leak_rate,
                            double ridge_lambda) {
  if (units < 1 || input_dim < 1)
    throw std::invalid_argument("esn: units and input dim must be positive");
  EsnConfig cfg;
  cfg.units = units;
  cfg.spectral_radius = rho;
  cfg.leak_rate = leak_rate;
  cfg.ridge_lambda = ridge_lambda;
  cfg.seed = seed;

  Rng res_rng(Rng::derive(seed, 0));
  cfg.W_res.resize(units, units);
  for (int r = 0; r < units; ++r)
    for (int c = 0; c < units; ++c) cfg.W_res(r, c) = res_rng.uniform(-1, 1);
  double sr = qts::reservoir::spectral_radius(cfg.W_res);
  if (sr <= 0)
    throw NumericError("esn: drawn reservoir matrix has zero spectral radius");
  cfg.W_res *= rho / sr;

  Rng in_rng(Rng::derive(seed, 1));
  cfg.W_in.resize(units, input_dim);
  for (int r = 0; r < units; ++r)
    for (int c = 0; c < input_dim; ++c) cfg.W_in(r, c) = in_rng.uniform(-1, 1);

  Rng bias_rng(Rng::derive(seed, 2));
  cfg.bias.resize(units);
  for (int r = 0; r < units; ++r) cfg.bias(r) = bias_rng.uniform(-0.1, 0.1);
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json EsnConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "esn";
  j["units"] = units;
  j["spectral_radius"] = spectral_radius;
  j["leak_rate"] = leak_rate;
  j["ridge_lambda"] = ridge_lambda;
  j["seed"] = seed;
  j["w_res"] = matrix_to_json(W_res);
  j["w_in"] = matrix_to_json(W_in);
  j["bias"] = vector_to_json(bias);
  return j;
}

EsnConfig EsnConfig::from_json(const nlohmann::ordered_json& j) {
  EsnConfig cfg;
  cfg.units = j.at("units").get<int>();
  cfg.spectral_radius = j.at("spectral_radius").get<double>();
  cfg.leak_rate = j.at("leak_rate").get<double>();
  cfg.ridge_lambda = j.at("ridge_lambda").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.W_res = matrix_from_json(j.at("w_res"));
  cfg.W_in = matrix_from_json(j.at("w_in"));
  cfg.bias = vector_from_json(j.at("bias"));
  cfg.validate();
  return cfg;
}

Eigen::VectorXd qrc_step(const QrcConfig& cfg, const Eigen::VectorXd& prev_r,
                         const Eigen::VectorXd& x_t) {
  const int n = cfg.n_qubits;
  if (prev_r.size() != 3 * n)
    throw std::invalid_argument("qrc_step: reservoir state must have 3n entries");
  if (x_t.size() < 1) throw std::invalid_argument("qrc_step: empty input");

  const Eigen::Index d_x = x_t.size();
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    double xw = x_t(i % d_x) + cfg.bias(i);
    double m = cfg.w_x * prev_r(i) + cfg.w_y * prev_r(n + i) +
               cfg.w_z * prev_r(2 * n + i);
    v(i) = cfg.leak_rate * xw + (1.0 - cfg.leak_rate) * m;
  }

  Eigen::VectorXd projected = encoding::lift_and_project(v, cfg.proj, cfg.lift);
  qsim::StateVector psi = encoding::amplitude_encode(projected);
  qsim::StateVector out =
      qsim::run_circuit(psi, cfg.circuit, std::span<const double>{});

  Eigen::VectorXd r(3 * n);
  for (int q = 0; q < n; ++q) {
    r(q) = qsim::expect_pauli(out, qsim::PauliAxis::X, q);
    r(n + q) = qsim::expect_pauli(out, qsim::PauliAxis::Y, q);
    r(2 * n + q) = qsim::expect_pauli(out, qsim::PauliAxis::Z, q);
  }
  return r;
}

Eigen::VectorXd esn_step(const EsnConfig& cfg, const Eigen::VectorXd& prev,
                         const Eigen::VectorXd& x_t) {
  if (prev.size() != cfg.units)
    throw std::invalid_argument("esn_step: state size mismatch");
  if (x_t.size() != cfg.W_in.cols())
    throw std::invalid_argument("esn_step: input size mismatch");
  Eigen::VectorXd pre = cfg.W_res * prev + cfg.W_in * x_t + cfg.bias;
  return (1.0 - cfg.leak_rate) * prev +
         cfg.leak_rate * pre.array().tanh().matrix();
}

namespace {

template <typename Cfg, typename StepFn>
Eigen::MatrixXd run_impl(const Cfg& cfg, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd* init, StepFn step) {
  cfg.validate();
  if (inputs.rows() < 1)
    throw std::invalid_argument("run_reservoir: need at least one step");
  Eigen::VectorXd state = init
                              ? *init
                              : Eigen::VectorXd::Zero(cfg.feature_size());
  if (state.size() != cfg.feature_size())
    throw std::invalid_argument("run_reservoir: bad initial state size");
  Eigen::MatrixXd R(inputs.rows(), cfg.feature_size());
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    try {
      state = step(cfg, state, Eigen::VectorXd(inputs.row(t).transpose()));
    } catch (const EncodingError& e) {
      throw NumericError("step " + std::to_string(t) + ": " + e.what());
    }
    R.row(t) = state.transpose();
  }
  return R;
}

}  // namespace

Eigen::MatrixXd run_reservoir(const QrcConfig& cfg,
                              const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd* r0) {
  return run_impl(cfg, inputs, r0,
                  [](const QrcConfig& c, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& x) { return qrc_step(c, s, x); });
}

Eigen::MatrixXd run_reservoir(const EsnConfig& cfg,
                              const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd* s0) {
  return run_impl(cfg, inputs, s0,
                  [](const EsnConfig& c, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& x) { return esn_step(c, s, x); });
}

Eigen::MatrixXd fit_ridge(const ReservoirTrace& trace, double ridge_lambda) {
  if (trace.R.rows() != trace.Y.rows())
    throw std::invalid_argument("fit_ridge: R and Y row counts differ");
  if (trace.R.rows() == 0) throw std::invalid_argument("fit_ridge: empty trace");
  if (!(ridge_lambda > 0))
    throw std::invalid_argument("fit_ridge: lambda must be > 0");

  const Eigen::Index k = trace.R.cols();
  Eigen::MatrixXd A = trace.R.transpose() * trace.R +
                      ridge_lambda * Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd B = trace.R.transpose() * trace.Y;
  Eigen::MatrixXd W = A.ldlt().solve(B);

  double rel = (A * W - B).norm() / std::max(B.norm(), 1e-300);
  if (!(rel < 1e-8) && B.norm() > 0)
    throw NumericError("fit_ridge: normal equations residual " +
                       std::to_string(rel) + " exceeds 1e-8");
  return W;
}

Eigen::VectorXd predict_linear(const Eigen::MatrixXd& W_out,
                               const Eigen::VectorXd& r) {
  if (r.size() != W_out.rows())
    throw std::invalid_argument("predict_linear: feature size mismatch");
  return W_out.transpose() * r;
}

Eigen::MatrixXd predict_linear_rows(const Eigen::MatrixXd& W_out,
                                    const Eigen::MatrixXd& R) {
  if (R.cols() != W_out.rows())
    throw std::invalid_argument("predict_linear: feature size mismatch");
  return R * W_out;
}

Mlp Mlp::zeros(int in, int hidden, int out) {
  return {Eigen::MatrixXd::Zero(hidden, in), Eigen::VectorXd::Zero(hidden),
          Eigen::MatrixXd::Zero(out, hidden), Eigen::VectorXd::Zero(out)};
}

Mlp Mlp::seeded(int in, int hidden, int out, std::uint64_t seed) {
  Mlp m = zeros(in, hidden, out);
  Rng r1(Rng::derive(seed, 0));
  for (Eigen::Index r = 0; r < m.W1.rows(); ++r)
    for (Eigen::Index c = 0; c < m.W1.cols(); ++c)
      m.W1(r, c) = r1.normal() / std::sqrt(static_cast<double>(in));
  Rng r2(Rng::derive(seed, 1));
  for (Eigen::Index r = 0; r < m.W2.rows(); ++r)
    for (Eigen::Index c = 0; c < m.W2.cols(); ++c)
      m.W2(r, c) = r2.normal() / std::sqrt(static_cast<double>(hidden));
  return m;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != W1.cols())
    throw std::invalid_argument("mlp: input size mismatch");
  return W2 * (W1 * x + b1).array().tanh().matrix() + b2;
}

Eigen::MatrixXd Mlp::forward_rows(const Eigen::MatrixXd& X) const {
  if (X.cols() != W1.cols())
    throw std::invalid_argument("mlp: input size mismatch");
  Eigen::MatrixXd hidden = ((X * W1.transpose()).rowwise() + b1.transpose())
                               .array()
                               .tanh()
                               .matrix();
  return (hidden * W2.transpose()).rowwise() + b2.transpose();
}

std::size_t Mlp::param_count() const {
  return static_cast<std::size_t>(W1.size() + b1.size() + W2.size() +
                                  b2.size());
}

Mlp fit_nn_readout(const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, const MlpConfig& cfg,
                   std::vector<double>* loss_curve) {
  cfg.opt.validate();
  if (inputs.rows() == 0 || inputs.rows() != targets.rows())
    throw std::invalid_argument("fit_nn_readout: bad data shapes");

  const int in = static_cast<int>(inputs.cols());
  const int out = static_cast<int>(targets.cols());
  Mlp mlp = Mlp::seeded(in, cfg.hidden, out, cfg.opt.seed);

  const Eigen::Index np = static_cast<Eigen::Index>(mlp.param_count());
  auto pack = [&](const Mlp& m) {
    Eigen::VectorXd p(np);
    Eigen::Index at = 0;
    p.segment(at, m.W1.size()) =
        Eigen::Map<const Eigen::VectorXd>(m.W1.data(), m.W1.size());
    at += m.W1.size();
    p.segment(at, m.b1.size()) = m.b1;
    at += m.b1.size();
    p.segment(at, m.W2.size()) =
        Eigen::Map<const Eigen::VectorXd>(m.W2.data(), m.W2.size());
    at += m.W2.size();
    p.segment(at, m.b2.size()) = m.b2;
    return p;
  };
  auto unpack = [&](const Eigen::VectorXd& p, Mlp& m) {
    Eigen::Index at = 0;
    Eigen::Map<Eigen::VectorXd>(m.W1.data(), m.W1.size()) =
        p.segment(at, m.W1.size());
    at += m.W1.size();
    m.b1 = p.segment(at, m.b1.size());
    at += m.b1.size();
    Eigen::Map<Eigen::VectorXd>(m.W2.data(), m.W2.size()) =
        p.segment(at, m.W2.size());
    at += m.W2.size();
    m.b2 = p.segment(at, m.b2.size());
  };

  Eigen::VectorXd params = pack(mlp);
  train::AdamState st = train::AdamState::zeros(np);
  const double denom = static_cast<double>(inputs.rows() * targets.cols());

  for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
    Eigen::MatrixXd pre = (inputs * mlp.W1.transpose()).rowwise() +
                          mlp.b1.transpose();           // T x hidden
    Eigen::MatrixXd act = pre.array().tanh().matrix();  // T x hidden
    Eigen::MatrixXd pred =
        (act * mlp.W2.transpose()).rowwise() + mlp.b2.transpose();
    Eigen::MatrixXd err = pred - targets;

    double loss = err.array().square().sum() / denom;
    if (!std::isfinite(loss))
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": mlp loss is not finite");
    if (loss_curve) loss_curve->push_back(loss);

    Eigen::MatrixXd dpred = (2.0 / denom) * err;        // T x out
    Mlp g = Mlp::zeros(in, cfg.hidden, out);
    g.W2 = dpred.transpose() * act;
    g.b2 = dpred.colwise().sum().transpose();
    Eigen::MatrixXd dact = dpred * mlp.W2;              // T x hidden
    Eigen::MatrixXd dpre =
        dact.array() * (1.0 - act.array().square());
    g.W1 = dpre.transpose() * inputs;
    g.b1 = dpre.colwise().sum().transpose();

    Eigen::VectorXd grads = pack(g);
    train::optimizer_step(params, grads, st, cfg.opt);
    unpack(params, mlp);
  }
  return mlp;
}

void export_trace_csv(const std::filesystem::path& path,
                      const ReservoirTrace& trace) {
  if (trace.R.rows() != trace.Y.rows())
    throw std::invalid_argument("trace export: R and Y row counts differ");
  std::ostringstream out;
  out << "t";
  for (Eigen::Index j = 0; j < trace.R.cols(); ++j) out << ",r_" << (j + 1);
  for (Eigen::Index j = 0; j < trace.Y.cols(); ++j) out << ",y_" << (j + 1);
  out << "\n";
  for (Eigen::Index t = 0; t < trace.R.rows(); ++t) {
    out << (t + 1);
    for (Eigen::Index j = 0; j < trace.R.cols(); ++j)
      out << "," << format_double(trace.R(t, j));
    for (Eigen::Index j = 0; j < trace.Y.cols(); ++j)
      out << "," << format_double(trace.Y(t, j));
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace qts::reservoir
