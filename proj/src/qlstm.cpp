#include "qts/qlstm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qts/common.hpp"
#include "qts/encoding.hpp"
#include "qts/json_io.hpp"

namespace qts::qlstm {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

std::vector<qsim::Observable> z_observables(int n_qubits) {
  std::vector<qsim::Observable> obs(n_qubits);
  for (int q = 0; q < n_qubits; ++q) obs[q] = {qsim::PauliAxis::Z, q};
  return obs;
}

Eigen::VectorXd measure_z(const qsim::StateVector& s) {
  Eigen::VectorXd z(s.n_qubits);
  for (int q = 0; q < s.n_qubits; ++q)
    z(q) = qsim::expect_pauli(s, qsim::PauliAxis::Z, q);
  return z;
}

void fill_normal(Rng& rng, Eigen::MatrixXd& m, double stddev) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal(0, stddev);
}

// Splits one channel-major window row into T-step input vectors.
struct WindowView {
  const Eigen::MatrixXd& X;
  Eigen::Index row;
  int input_size;
  int steps;

  WindowView(const Eigen::MatrixXd& x, Eigen::Index r, int d)
      : X(x), row(r), input_size(d) {
    if (d < 1 || X.cols() % d != 0)
      throw std::invalid_argument(
          "window length is not a multiple of the input size");
    steps = static_cast<int>(X.cols()) / d;
  }

  Eigen::VectorXd input_at(int t) const {
    Eigen::VectorXd x(input_size);
    for (int ch = 0; ch < input_size; ++ch) x(ch) = X(row, ch * steps + t);
    return x;
  }
};

}  // namespace

RecurrentState RecurrentState::zeros(int hidden) {
  return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
}

Readout Readout::zeros(int hidden, int outputs) {
  return {Eigen::MatrixXd::Zero(outputs, hidden),
          Eigen::VectorXd::Zero(outputs)};
}

Readout Readout::seeded(int hidden, int outputs, std::uint64_t seed) {
  Readout r = zeros(hidden, outputs);
  Rng rng(seed);
  fill_normal(rng, r.W, 0.1);
  return r;
}

Eigen::VectorXd Readout::apply(const Eigen::VectorXd& h) const {
  if (h.size() != W.cols())
    throw std::invalid_argument("readout/hidden size mismatch");
  return W * h + b;
}

std::size_t Readout::param_count() const {
  return static_cast<std::size_t>(W.size() + b.size());
}

std::size_t LstmCell::param_count() const {
  return static_cast<std::size_t>(4 * (W_f.size() + b_f.size()));
}

LstmCell LstmCell::zeros(int hidden, int input) {
  if (hidden < 1 || input < 1)
    throw std::invalid_argument("lstm sizes must be positive");
  LstmCell c;
  c.W_f = c.W_i = c.W_C = c.W_o =
      Eigen::MatrixXd::Zero(hidden, hidden + input);
  c.b_f = c.b_i = c.b_C = c.b_o = Eigen::VectorXd::Zero(hidden);
  return c;
}

LstmCell LstmCell::seeded(int hidden, int input, std::uint64_t seed) {
  LstmCell c = zeros(hidden, input);
  c.seed = seed;
  Rng rng(seed);
  for (auto* w : {&c.W_f, &c.W_i, &c.W_C, &c.W_o}) fill_normal(rng, *w, 0.1);
  return c;
}

std::string to_string(AnsatzKind kind) {
  return kind == AnsatzKind::HRyRing ? "h_ry_ring" : "rot_ring";
}

AnsatzKind ansatz_from_string(const std::string& name) {
  if (name == "h_ry_ring") return AnsatzKind::HRyRing;
  if (name == "rot_ring") return AnsatzKind::RotRing;
  throw std::invalid_argument("unknown ansatz: " + name);
}

qsim::CircuitSpec build_ansatz(int n_qubits, int layers, AnsatzKind kind) {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  qsim::CircuitSpec c;
  c.n_qubits = n_qubits;
  for (int l = 0; l < layers; ++l) {
    if (kind == AnsatzKind::HRyRing) {
      for (int q = 0; q < n_qubits; ++q) c.add(qsim::Gate::hadamard(q));
      for (int q = 0; q < n_qubits; ++q)
        c.add_parametrized(qsim::Gate::ry(q, 0.0));
    } else {
      for (int q = 0; q < n_qubits; ++q)
        c.add_parametrized(qsim::Gate::rot(q, 0.0, 0.0, 0.0));
    }
    if (n_qubits >= 2)
      for (int q = 0; q < n_qubits; ++q)
        c.add(qsim::Gate::cnot(q, (q + 1) % n_qubits));
  }
  for (int q = 0; q < n_qubits; ++q)
    c.add_parametrized(qsim::Gate::rot(q, 0.0, 0.0, 0.0));
  c.validate();
  return c;
}

std::size_t QlstmCell::param_count() const {
  return 4 * thetas[0].size() + static_cast<std::size_t>(W_enc.size());
}

QlstmCell QlstmCell::seeded(const QlstmConfig& cfg, std::uint64_t seed) {
  if (cfg.input_size < 1)
    throw std::invalid_argument("input size must be positive");
  QlstmCell cell;
  cell.cfg = cfg;
  cell.seed = seed;
  cell.circuit = build_ansatz(cfg.n_qubits, cfg.layers, cfg.ansatz);
  const Eigen::Index dim = Eigen::Index(1) << cfg.n_qubits;
  cell.W_enc.resize(dim, cfg.n_qubits + cfg.input_size);
  Rng enc_rng(Rng::derive(seed, 0));
  fill_normal(enc_rng, cell.W_enc, 0.1);
  for (int k = 0; k < 4; ++k) {
    Rng rng(Rng::derive(seed, 1 + k));
    cell.thetas[k].resize(static_cast<Eigen::Index>(cell.circuit.param_count()));
    for (Eigen::Index p = 0; p < cell.thetas[k].size(); ++p)
      cell.thetas[k](p) = rng.uniform(0.0, 2 * std::numbers::pi);
  }
  return cell;
}

RecurrentState lstm_step(const LstmCell& cell, const RecurrentState& state,
                         const Eigen::VectorXd& x, StepTrace* trace) {
  const int H = cell.hidden_size();
  if (x.size() != cell.input_size())
    throw std::invalid_argument("lstm_step: input size mismatch");
  if (state.h.size() != H || state.c.size() != H)
    throw std::invalid_argument("lstm_step: state size mismatch");

  Eigen::VectorXd v(H + x.size());
  v << state.h, x;
  Eigen::VectorXd f = sigmoid(cell.W_f * v + cell.b_f);
  Eigen::VectorXd i = sigmoid(cell.W_i * v + cell.b_i);
  Eigen::VectorXd g = (cell.W_C * v + cell.b_C).array().tanh();
  Eigen::VectorXd o = sigmoid(cell.W_o * v + cell.b_o);

  RecurrentState next;
  next.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.array().tanh().matrix());
  if (trace) *trace = {v, {}, {}, f, i, g, o};
  return next;
}

RecurrentState qlstm_step(const QlstmCell& cell, const RecurrentState& state,
                          const Eigen::VectorXd& x, StepTrace* trace) {
  const int H = cell.hidden_size();
  if (x.size() != cell.input_size())
    throw std::invalid_argument("qlstm_step: input size mismatch");
  if (state.h.size() != H || state.c.size() != H)
    throw std::invalid_argument("qlstm_step: state size mismatch");

  Eigen::VectorXd v(H + x.size());
  v << state.h, x;
  Eigen::VectorXd e = cell.W_enc * v;
  qsim::StateVector psi = encoding::amplitude_encode(e);

  std::array<Eigen::VectorXd, 4> z;
  for (int k = 0; k < 4; ++k) {
    auto out = qsim::run_circuit(
        psi, cell.circuit,
        std::span<const double>(cell.thetas[k].data(),
                                static_cast<std::size_t>(cell.thetas[k].size())));
    z[k] = measure_z(out);
  }

  Eigen::VectorXd f = sigmoid(z[0]);
  Eigen::VectorXd i = sigmoid(z[1]);
  Eigen::VectorXd g = z[2].array().tanh();
  Eigen::VectorXd o = sigmoid(z[3]);

  RecurrentState next;
  next.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.array().tanh().matrix());
  if (trace) *trace = {v, e, z, f, i, g, o};
  return next;
}

namespace {

template <typename Cell>
RecurrentState run_window(const Cell& cell, const WindowView& w) {
  RecurrentState s = RecurrentState::zeros(cell.hidden_size());
  for (int t = 0; t < w.steps; ++t) {
    try {
      if constexpr (std::is_same_v<Cell, LstmCell>)
        s = lstm_step(cell, s, w.input_at(t));
      else
        s = qlstm_step(cell, s, w.input_at(t));
    } catch (const EncodingError& e) {
      throw NumericError("time step " + std::to_string(t) + ": " + e.what());
    }
  }
  return s;
}

template <typename Cell>
Eigen::MatrixXd forecast_impl(const Cell& cell, const Readout& readout,
                              const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw std::invalid_argument("empty window sequence");
  Eigen::MatrixXd preds(X.rows(), readout.b.size());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    WindowView w(X, r, cell.input_size());
    preds.row(r) = readout.apply(run_window(cell, w).h).transpose();
  }
  return preds;
}

}  // namespace

Eigen::MatrixXd forecast_windows(const LstmCell& cell, const Readout& readout,
                                 const Eigen::MatrixXd& X) {
  return forecast_impl(cell, readout, X);
}

Eigen::MatrixXd forecast_windows(const QlstmCell& cell, const Readout& readout,
                                 const Eigen::MatrixXd& X) {
  return forecast_impl(cell, readout, X);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct LstmPack {
  static Eigen::Index size(const LstmCell& c, const Readout& r) {
    return 4 * (c.W_f.size() + c.b_f.size()) + r.W.size() + r.b.size();
  }

  static Eigen::VectorXd pack(const LstmCell& c, const Readout& r) {
    Eigen::VectorXd p(size(c, r));
    Eigen::Index at = 0;
    for (const auto* m : {&c.W_f, &c.W_i, &c.W_C, &c.W_o}) {
      p.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
      at += m->size();
    }
    for (const auto* b : {&c.b_f, &c.b_i, &c.b_C, &c.b_o}) {
      p.segment(at, b->size()) = *b;
      at += b->size();
    }
    p.segment(at, r.W.size()) =
        Eigen::Map<const Eigen::VectorXd>(r.W.data(), r.W.size());
    at += r.W.size();
    p.segment(at, r.b.size()) = r.b;
    return p;
  }

  static void unpack(const Eigen::VectorXd& p, LstmCell& c, Readout& r) {
    Eigen::Index at = 0;
    for (auto* m : {&c.W_f, &c.W_i, &c.W_C, &c.W_o}) {
      Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) =
          p.segment(at, m->size());
      at += m->size();
    }
    for (auto* b : {&c.b_f, &c.b_i, &c.b_C, &c.b_o}) {
      *b = p.segment(at, b->size());
      at += b->size();
    }
    Eigen::Map<Eigen::VectorXd>(r.W.data(), r.W.size()) =
        p.segment(at, r.W.size());
    at += r.W.size();
    r.b = p.segment(at, r.b.size());
  }
};

struct QlstmPack {
  static Eigen::Index size(const QlstmCell& c, const Readout& r) {
    return 4 * c.thetas[0].size() + c.W_enc.size() + r.W.size() + r.b.size();
  }

  static Eigen::VectorXd pack(const QlstmCell& c, const Readout& r) {
    Eigen::VectorXd p(size(c, r));
    Eigen::Index at = 0;
    for (int k = 0; k < 4; ++k) {
      p.segment(at, c.thetas[k].size()) = c.thetas[k];
      at += c.thetas[k].size();
    }
    p.segment(at, c.W_enc.size()) =
        Eigen::Map<const Eigen::VectorXd>(c.W_enc.data(), c.W_enc.size());
    at += c.W_enc.size();
    p.segment(at, r.W.size()) =
        Eigen::Map<const Eigen::VectorXd>(r.W.data(), r.W.size());
    at += r.W.size();
    p.segment(at, r.b.size()) = r.b;
    return p;
  }

  static void unpack(const Eigen::VectorXd& p, QlstmCell& c, Readout& r) {
    Eigen::Index at = 0;
    for (int k = 0; k < 4; ++k) {
      c.thetas[k] = p.segment(at, c.thetas[k].size());
      at += c.thetas[k].size();
    }
    Eigen::Map<Eigen::VectorXd>(c.W_enc.data(), c.W_enc.size()) =
        p.segment(at, c.W_enc.size());
    at += c.W_enc.size();
    Eigen::Map<Eigen::VectorXd>(r.W.data(), r.W.size()) =
        p.segment(at, r.W.size());
    at += r.W.size();
    r.b = p.segment(at, r.b.size());
  }
};

struct LstmStepCache {
  Eigen::VectorXd v, f, i, g, o, c_prev, c, tanh_c;
};

// Accumulates the full-batch gradient for one window; returns squared error.
double lstm_window_grad(const LstmCell& cell, const Readout& readout,
                        const WindowView& w, const Eigen::VectorXd& y,
                        double pred_scale, LstmCell& g_cell, Readout& g_read) {
  const int H = cell.hidden_size();
  std::vector<LstmStepCache> caches(w.steps);
  RecurrentState s = RecurrentState::zeros(H);
  for (int t = 0; t < w.steps; ++t) {
    StepTrace tr;
    RecurrentState next = lstm_step(cell, s, w.input_at(t), &tr);
    caches[t] = {tr.v, tr.f, tr.i, tr.g, tr.o, s.c, next.c,
                 next.c.array().tanh().matrix()};
    s = next;
  }

  Eigen::VectorXd pred = readout.apply(s.h);
  Eigen::VectorXd err = pred - y;
  Eigen::VectorXd dpred = pred_scale * err;

  g_read.W += dpred * s.h.transpose();
  g_read.b += dpred;

  Eigen::VectorXd dh = readout.W.transpose() * dpred;
  Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
  for (int t = w.steps - 1; t >= 0; --t) {
    const auto& cc = caches[t];
    Eigen::VectorXd dov = dh.cwiseProduct(cc.tanh_c);
    dc += dh.cwiseProduct(cc.o)
              .cwiseProduct((1.0 - cc.tanh_c.array().square()).matrix());
    Eigen::VectorXd df = dc.cwiseProduct(cc.c_prev);
    Eigen::VectorXd di = dc.cwiseProduct(cc.g);
    Eigen::VectorXd dg = dc.cwiseProduct(cc.i);
    Eigen::VectorXd dc_prev = dc.cwiseProduct(cc.f);

    Eigen::VectorXd df_pre =
        df.cwiseProduct(cc.f).cwiseProduct((1.0 - cc.f.array()).matrix());
    Eigen::VectorXd di_pre =
        di.cwiseProduct(cc.i).cwiseProduct((1.0 - cc.i.array()).matrix());
    Eigen::VectorXd dg_pre =
        dg.cwiseProduct((1.0 - cc.g.array().square()).matrix());
    Eigen::VectorXd do_pre =
        dov.cwiseProduct(cc.o).cwiseProduct((1.0 - cc.o.array()).matrix());

    g_cell.W_f += df_pre * cc.v.transpose();
    g_cell.W_i += di_pre * cc.v.transpose();
    g_cell.W_C += dg_pre * cc.v.transpose();
    g_cell.W_o += do_pre * cc.v.transpose();
    g_cell.b_f += df_pre;
    g_cell.b_i += di_pre;
    g_cell.b_C += dg_pre;
    g_cell.b_o += do_pre;

    Eigen::VectorXd dv = cell.W_f.transpose() * df_pre +
                         cell.W_i.transpose() * di_pre +
                         cell.W_C.transpose() * dg_pre +
                         cell.W_o.transpose() * do_pre;
    dh = dv.head(H);
    dc = dc_prev;
  }
  return err.squaredNorm();
}

struct QStepCache {
  Eigen::VectorXd v, e;
  qsim::StateVector psi;
  std::array<Eigen::VectorXd, 4> z;
  Eigen::VectorXd f, i, g, o, c_prev, c, tanh_c;
};

double qlstm_window_grad(const QlstmCell& cell, const Readout& readout,
                         const WindowView& w, const Eigen::VectorXd& y,
                         double pred_scale,
                         std::array<Eigen::VectorXd, 4>& g_thetas,
                         Eigen::MatrixXd& g_enc, Readout& g_read) {
  const int H = cell.hidden_size();
  const auto obs = z_observables(cell.cfg.n_qubits);

  std::vector<QStepCache> caches(w.steps);
  RecurrentState s = RecurrentState::zeros(H);
  for (int t = 0; t < w.steps; ++t) {
    StepTrace tr;
    RecurrentState next;
    try {
      next = qlstm_step(cell, s, w.input_at(t), &tr);
    } catch (const EncodingError& e) {
      throw NumericError("time step " + std::to_string(t) + ": " + e.what());
    }
    caches[t] = {tr.v,
                 tr.e,
                 encoding::amplitude_encode(tr.e),
                 tr.z,
                 tr.f,
                 tr.i,
                 tr.g,
                 tr.o,
                 s.c,
                 next.c,
                 next.c.array().tanh().matrix()};
    s = next;
  }

  Eigen::VectorXd pred = readout.apply(s.h);
  Eigen::VectorXd err = pred - y;
  Eigen::VectorXd dpred = pred_scale * err;

  g_read.W += dpred * s.h.transpose();
  g_read.b += dpred;

  Eigen::VectorXd dh = readout.W.transpose() * dpred;
  Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
  for (int t = w.steps - 1; t >= 0; --t) {
    const auto& cc = caches[t];
    Eigen::VectorXd dov = dh.cwiseProduct(cc.tanh_c);
    dc += dh.cwiseProduct(cc.o)
              .cwiseProduct((1.0 - cc.tanh_c.array().square()).matrix());
    Eigen::VectorXd df = dc.cwiseProduct(cc.c_prev);
    Eigen::VectorXd di = dc.cwiseProduct(cc.g);
    Eigen::VectorXd dg = dc.cwiseProduct(cc.i);
    Eigen::VectorXd dc_prev = dc.cwiseProduct(cc.f);

    std::array<Eigen::VectorXd, 4> dz;
    dz[0] = df.cwiseProduct(cc.f).cwiseProduct((1.0 - cc.f.array()).matrix());
    dz[1] = di.cwiseProduct(cc.i).cwiseProduct((1.0 - cc.i.array()).matrix());
    dz[2] = dg.cwiseProduct((1.0 - cc.g.array().square()).matrix());
    dz[3] = dov.cwiseProduct(cc.o).cwiseProduct((1.0 - cc.o.array()).matrix());

    Eigen::VectorXd da = Eigen::VectorXd::Zero(cc.psi.dim());
    for (int k = 0; k < 4; ++k) {
      std::span<const double> theta(cell.thetas[k].data(),
                                    static_cast<std::size_t>(cell.thetas[k].size()));
      std::span<const double> weights(dz[k].data(),
                                      static_cast<std::size_t>(dz[k].size()));
      auto gtheta =
          qsim::parameter_shift_grad(cell.circuit, theta, cc.psi, obs, weights);
      for (Eigen::Index p = 0; p < g_thetas[k].size(); ++p)
        g_thetas[k](p) += gtheta[static_cast<std::size_t>(p)];
      auto ga =
          qsim::input_amplitude_grad(cell.circuit, theta, cc.psi, obs, weights);
      for (Eigen::Index a = 0; a < da.size(); ++a)
        da(a) += ga[static_cast<std::size_t>(a)];
    }

    Eigen::VectorXd de = encoding::normalize_pullback(cc.e, da);
    g_enc += de * cc.v.transpose();
    Eigen::VectorXd dv = cell.W_enc.transpose() * de;
    dh = dv.head(H);
    dc = dc_prev;
  }
  return err.squaredNorm();
}

void check_training_data(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         Eigen::Index outputs) {
  if (X.rows() == 0) throw std::invalid_argument("empty training data");
  if (X.rows() != Y.rows())
    throw std::invalid_argument("window/target row mismatch");
  if (Y.cols() != outputs)
    throw std::invalid_argument("target/readout channel mismatch");
}

}  // namespace

TrainResult train_lstm(LstmCell& cell, Readout& readout,
                       const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       const train::OptimizerConfig& opt) {
  opt.validate();
  check_training_data(X, Y, readout.b.size());

  Eigen::VectorXd params = LstmPack::pack(cell, readout);
  train::AdamState st = train::AdamState::zeros(params.size());
  TrainResult result;
  const double denom = static_cast<double>(X.rows() * Y.cols());

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    LstmCell g_cell = LstmCell::zeros(cell.hidden_size(), cell.input_size());
    Readout g_read = Readout::zeros(cell.hidden_size(),
                                    static_cast<int>(readout.b.size()));
    double sq = 0.0;
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      sq += lstm_window_grad(cell, readout, WindowView(X, r, cell.input_size()),
                             Y.row(r).transpose(), 2.0 / denom, g_cell, g_read);
    double loss = sq / denom;
    if (!std::isfinite(loss))
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": training loss is not finite");
    result.loss_curve.push_back(loss);
    Eigen::VectorXd grads = LstmPack::pack(g_cell, g_read);
    train::optimizer_step(params, grads, st, opt);
    LstmPack::unpack(params, cell, readout);
  }
  return result;
}

TrainResult train_qlstm(QlstmCell& cell, Readout& readout,
                        const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const train::OptimizerConfig& opt) {
  opt.validate();
  check_training_data(X, Y, readout.b.size());

  Eigen::VectorXd params = QlstmPack::pack(cell, readout);
  train::AdamState st = train::AdamState::zeros(params.size());
  TrainResult result;
  const double denom = static_cast<double>(X.rows() * Y.cols());

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::array<Eigen::VectorXd, 4> g_thetas;
    for (auto& g : g_thetas)
      g = Eigen::VectorXd::Zero(cell.thetas[0].size());
    Eigen::MatrixXd g_enc =
        Eigen::MatrixXd::Zero(cell.W_enc.rows(), cell.W_enc.cols());
    Readout g_read = Readout::zeros(cell.hidden_size(),
                                    static_cast<int>(readout.b.size()));
    double sq = 0.0;
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      sq += qlstm_window_grad(cell, readout,
                              WindowView(X, r, cell.input_size()),
                              Y.row(r).transpose(), 2.0 / denom, g_thetas,
                              g_enc, g_read);
    double loss = sq / denom;
    if (!std::isfinite(loss))
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": training loss is not finite");
    result.loss_curve.push_back(loss);

    QlstmCell g_cell = cell;
    g_cell.thetas = g_thetas;
    g_cell.W_enc = g_enc;
    Eigen::VectorXd grads = QlstmPack::pack(g_cell, g_read);
    train::optimizer_step(params, grads, st, opt);
    QlstmPack::unpack(params, cell, readout);
  }
  return result;
}

MatchedHidden choose_matching_hidden(std::size_t target_params, int input_size,
                                     int outputs) {
  MatchedHidden best;
  long best_diff = -1;
  for (int h = 1; h <= 256; ++h) {
    std::size_t params =
        static_cast<std::size_t>(4 * (h * (h + input_size) + h) +
                                 outputs * h + outputs);
    long diff = std::labs(static_cast<long>(params) -
                          static_cast<long>(target_params));
    if (best_diff < 0 || diff < best_diff) {
      best_diff = diff;
      best = {h, params,
              static_cast<double>(diff) / static_cast<double>(params)};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json readout_to_json(const Readout& r) {
  return json{{"w", matrix_to_json(r.W)}, {"b", vector_to_json(r.b)}};
}

Readout readout_from_json(const json& j) {
  Readout r;
  r.W = matrix_from_json(j.at("w"));
  r.b = vector_from_json(j.at("b"));
  return r;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LstmCell& cell,
                     const Readout& readout) {
  json j{{"format", "qts-checkpoint"},
         {"version", 1},
         {"model", "lstm"},
         {"hidden", cell.hidden_size()},
         {"input", cell.input_size()},
         {"seed", cell.seed},
         {"w_f", matrix_to_json(cell.W_f)},
         {"w_i", matrix_to_json(cell.W_i)},
         {"w_c", matrix_to_json(cell.W_C)},
         {"w_o", matrix_to_json(cell.W_o)},
         {"b_f", vector_to_json(cell.b_f)},
         {"b_i", vector_to_json(cell.b_i)},
         {"b_c", vector_to_json(cell.b_C)},
         {"b_o", vector_to_json(cell.b_o)},
         {"readout", readout_to_json(readout)}};
  write_json_atomic(path, j);
}

void save_checkpoint(const std::filesystem::path& path, const QlstmCell& cell,
                     const Readout& readout) {
  json thetas = json::array();
  for (const auto& t : cell.thetas) thetas.push_back(vector_to_json(t));
  json j{{"format", "qts-checkpoint"},
         {"version", 1},
         {"model", "qlstm"},
         {"n_qubits", cell.cfg.n_qubits},
         {"layers", cell.cfg.layers},
         {"input", cell.cfg.input_size},
         {"ansatz", to_string(cell.cfg.ansatz)},
         {"seed", cell.seed},
         {"w_enc", matrix_to_json(cell.W_enc)},
         {"thetas", thetas},
         {"readout", readout_to_json(readout)}};
  write_json_atomic(path, j);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  json j = read_json_file(path);
  if (j.value("format", "") != "qts-checkpoint")
    throw DataError("not a checkpoint file: " + path.string());
  Checkpoint ck;
  ck.model = j.at("model").get<std::string>();
  ck.readout = readout_from_json(j.at("readout"));
  if (ck.model == "lstm") {
    LstmCell cell;
    cell.W_f = matrix_from_json(j.at("w_f"));
    cell.W_i = matrix_from_json(j.at("w_i"));
    cell.W_C = matrix_from_json(j.at("w_c"));
    cell.W_o = matrix_from_json(j.at("w_o"));
    cell.b_f = vector_from_json(j.at("b_f"));
    cell.b_i = vector_from_json(j.at("b_i"));
    cell.b_C = vector_from_json(j.at("b_c"));
    cell.b_o = vector_from_json(j.at("b_o"));
    cell.seed = j.at("seed").get<std::uint64_t>();
    ck.lstm = std::move(cell);
  } else if (ck.model == "qlstm") {
    QlstmConfig cfg;
    cfg.n_qubits = j.at("n_qubits").get<int>();
    cfg.layers = j.at("layers").get<int>();
    cfg.input_size = j.at("input").get<int>();
    cfg.ansatz = ansatz_from_string(j.at("ansatz").get<std::string>());
    QlstmCell cell;
    cell.cfg = cfg;
    cell.circuit = build_ansatz(cfg.n_qubits, cfg.layers, cfg.ansatz);
    cell.W_enc = matrix_from_json(j.at("w_enc"));
    const auto& thetas = j.at("thetas");
    for (int k = 0; k < 4; ++k)
      cell.thetas[k] = vector_from_json(thetas.at(k));
    cell.seed = j.at("seed").get<std::uint64_t>();
    ck.qlstm = std::move(cell);
  } else {
    throw DataError("unknown checkpoint model: " + ck.model);
  }
  return ck;
}

}  // namespace qts::qlstm
