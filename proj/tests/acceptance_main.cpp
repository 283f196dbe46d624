// Acceptance harness. Each numbered criterion prints exactly one
// [PASS]/[FAIL] line; the process exit code is the number of failures.
//
// Every check recomputes its expectation through an independent route
// (dense matrix chains, central finite differences, a hand-rolled Cholesky
// solver, hand-enumerated lag tables, ensemble statistics) instead of
// reusing the code paths under test.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qts/common.hpp"
#include "qts/data.hpp"
#include "qts/encoding.hpp"
#include "qts/experiment.hpp"
#include "qts/json_io.hpp"
#include "qts/qlstm.hpp"
#include "qts/qsim.hpp"
#include "qts/reservoir.hpp"
#include "qts/train.hpp"

namespace {

namespace fs = std::filesystem;
using qts::Rng;
namespace qsim = qts::qsim;
namespace enc = qts::encoding;
namespace data = qts::data;
namespace exp_ = qts::experiment;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "qts_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// --- shared random builders --------------------------------------------------

struct RandomCircuit {
  qsim::CircuitSpec spec;
  std::vector<double> params;
};

RandomCircuit random_circuit(Rng& rng, int n, int depth, bool parametrize_all) {
  RandomCircuit rc;
  rc.spec.n_qubits = n;
  auto angle = [&] {
    return rng.uniform(-std::numbers::pi, std::numbers::pi);
  };
  for (int g = 0; g < depth; ++g) {
    int kind = static_cast<int>(rng.next_u64() % 6);
    if (n < 2 && kind == 5) kind = static_cast<int>(rng.next_u64() % 5);
    const int q = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n));
    qsim::Gate gate;
    switch (kind) {
      case 0: gate = qsim::Gate::hadamard(q); break;
      case 1: gate = qsim::Gate::rx(q, angle()); break;
      case 2: gate = qsim::Gate::ry(q, angle()); break;
      case 3: gate = qsim::Gate::rz(q, angle()); break;
      case 4: gate = qsim::Gate::rot(q, angle(), angle(), angle()); break;
      default: {
        int ctrl = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n));
        while (ctrl == q)
          ctrl = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n));
        gate = qsim::Gate::cnot(ctrl, q);
        break;
      }
    }
    if (gate.is_rotation() && (parametrize_all || rng.uniform() < 0.5)) {
      rc.spec.add_parametrized(gate);
      for (int a = 0; a < gate.angle_count(); ++a)
        rc.params.push_back(angle());
    } else {
      rc.spec.add(gate);
    }
  }
  if (rc.spec.param_count() == 0) {
    rc.spec.add_parametrized(qsim::Gate::ry(0, 0.0));
    rc.params.push_back(angle());
  }
  rc.spec.validate();
  return rc;
}

qsim::StateVector random_state(Rng& rng, int n) {
  std::vector<qsim::Complex> amps(std::size_t(1) << n);
  double norm2 = 0.0;
  for (auto& a : amps) {
    a = {rng.normal(), rng.normal()};
    norm2 += std::norm(a);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= inv;
  return qsim::StateVector::from_amplitudes(n, std::move(amps));
}

// --- criterion 1: simulator vs dense matrix-chain oracle ---------------------

Outcome criterion_simulator() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(20260814, 1));
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    const int depth = 3 + static_cast<int>(rng.next_u64() % 14);
    RandomCircuit rc = random_circuit(rng, n, depth, false);
    const qsim::StateVector input = random_state(rng, n);
    const qsim::StateVector out = qsim::run_circuit(input, rc.spec, rc.params);
    const Eigen::VectorXcd want =
        oracles::dense_circuit_matrix(rc.spec, rc.params) *
        oracles::to_eigen(input);
    for (std::size_t k = 0; k < out.dim(); ++k)
      worst = std::max(worst,
                       std::abs(out.amplitudes[k] - want(Eigen::Index(k))));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {worst <= 1e-9 && secs < 10.0,
          "200 random circuits on 1-4 qubits, max amplitude error " +
              num(worst) + ", budget 10 s"};
}

// --- criterion 2: gradients vs central finite differences --------------------

double shift_rule_worst(Rng& rng, int instances) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 3);
    const int depth = 2 + static_cast<int>(rng.next_u64() % 7);
    RandomCircuit rc = random_circuit(rng, n, depth, true);
    const qsim::StateVector input = random_state(rng, n);
    const int n_obs = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<qsim::Observable> obs(n_obs);
    std::vector<double> w(n_obs);
    for (int j = 0; j < n_obs; ++j) {
      obs[j].axis = static_cast<qsim::PauliAxis>(rng.next_u64() % 3);
      obs[j].qubit = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n));
      w[j] = rng.uniform(-1.0, 1.0);
    }
    const std::vector<double> grad =
        qsim::parameter_shift_grad(rc.spec, rc.params, input, obs, w);
    auto value = [&](const std::vector<double>& p) {
      return qsim::weighted_expectation(qsim::run_circuit(input, rc.spec, p),
                                        obs, w);
    };
    const double h = 1e-5;
    for (std::size_t k = 0; k < rc.params.size(); ++k) {
      std::vector<double> p = rc.params;
      p[k] = rc.params[k] + h;
      const double up = value(p);
      p[k] = rc.params[k] - h;
      const double dn = value(p);
      worst = std::max(worst, std::abs(grad[k] - (up - dn) / (2 * h)));
    }
  }
  return worst;
}

double qlstm_composite_worst(Rng& rng, int instances) {
  using qts::qlstm::QlstmCell;
  using qts::qlstm::QlstmConfig;
  using qts::qlstm::Readout;
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    QlstmConfig qc;
    qc.n_qubits = 2;
    qc.layers = 1;
    qc.input_size = 1 + (inst & 1);
    qc.ansatz = (inst & 2) ? qts::qlstm::AnsatzKind::RotRing
                           : qts::qlstm::AnsatzKind::HRyRing;
    const int lag = 2;
    const int rows = 3 + inst % 3;
    Eigen::MatrixXd x(rows, lag * qc.input_size);
    Eigen::MatrixXd y(rows, 1);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < x.cols(); ++c) x(r, c) = 0.5 * rng.normal();
      y(r, 0) = 0.5 * rng.normal();
    }
    const std::uint64_t seed = Rng::derive(502, inst);
    const QlstmCell cell0 = QlstmCell::seeded(qc, seed);
    const Readout readout0 = Readout::seeded(2, 1, seed + 1);

    auto loss_at = [&](const QlstmCell& c, const Readout& r) {
      QlstmCell cc = c;
      Readout rr = r;
      qts::train::OptimizerConfig probe;
      probe.kind = qts::train::OptimizerKind::SGD;
      probe.learning_rate = 0.0;
      probe.epochs = 1;
      return qts::qlstm::train_qlstm(cc, rr, x, y, probe).loss_curve[0];
    };

    // One plain SGD step with a tiny rate recovers the analytic gradient as
    // (before - after) / lr without exposing training internals.
    const double lr = 1e-4;
    QlstmCell cell = cell0;
    Readout readout = readout0;
    qts::train::OptimizerConfig opt;
    opt.kind = qts::train::OptimizerKind::SGD;
    opt.learning_rate = lr;
    opt.epochs = 1;
    qts::qlstm::train_qlstm(cell, readout, x, y, opt);

    const double h = 1e-5;
    auto check = [&](auto setter, double before_v, double after_v) {
      const double analytic = (before_v - after_v) / lr;
      QlstmCell cp = cell0;
      Readout rp = readout0;
      setter(cp, rp, before_v + h);
      const double up = loss_at(cp, rp);
      setter(cp, rp, before_v - h);
      const double dn = loss_at(cp, rp);
      worst = std::max(worst, std::abs(analytic - (up - dn) / (2 * h)));
    };
    for (int k = 0; k < 4; ++k)
      for (Eigen::Index p = 0; p < cell0.thetas[k].size(); ++p)
        check(
            [&, k, p](QlstmCell& c, Readout&, double v) { c.thetas[k](p) = v; },
            cell0.thetas[k](p), cell.thetas[k](p));
    for (Eigen::Index i = 0; i < cell0.W_enc.size(); ++i)
      check([&, i](QlstmCell& c, Readout&, double v) { c.W_enc.data()[i] = v; },
            cell0.W_enc.data()[i], cell.W_enc.data()[i]);
    for (Eigen::Index i = 0; i < readout0.W.size(); ++i)
      check([&, i](QlstmCell&, Readout& r, double v) { r.W.data()[i] = v; },
            readout0.W.data()[i], readout.W.data()[i]);
    check([&](QlstmCell&, Readout& r, double v) { r.b(0) = v; },
          readout0.b(0), readout.b(0));
  }
  return worst;
}

double mlp_composite_worst(Rng& rng, int instances) {
  using qts::reservoir::Mlp;
  using qts::reservoir::MlpConfig;
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    const int in = 1 + inst % 3;
    const int hidden = 2 + inst % 4;
    const int out = 1 + (inst & 1);
    const int rows = 6;
    Eigen::MatrixXd x(rows, in), y(rows, out);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < in; ++c) x(r, c) = 0.8 * rng.normal();
      for (int c = 0; c < out; ++c) y(r, c) = 0.8 * rng.normal();
    }
    const double lr = 1e-4;
    MlpConfig cfg;
    cfg.hidden = hidden;
    cfg.opt.kind = qts::train::OptimizerKind::SGD;
    cfg.opt.learning_rate = lr;
    cfg.opt.epochs = 1;
    cfg.opt.seed = Rng::derive(503, inst);
    const Mlp after = qts::reservoir::fit_nn_readout(x, y, cfg);
    Mlp init = Mlp::seeded(in, hidden, out, cfg.opt.seed);

    auto loss_of = [&](const Mlp& m) {
      return (m.forward_rows(x) - y).array().square().sum() /
             static_cast<double>(rows * out);
    };
    const double h = 1e-6;
    auto check = [&](double* initp, double afterv) {
      const double analytic = (*initp - afterv) / lr;
      const double keep = *initp;
      *initp = keep + h;
      const double up = loss_of(init);
      *initp = keep - h;
      const double dn = loss_of(init);
      *initp = keep;
      worst = std::max(worst, std::abs(analytic - (up - dn) / (2 * h)));
    };
    for (Eigen::Index i = 0; i < init.W1.size(); ++i)
      check(init.W1.data() + i, after.W1.data()[i]);
    for (Eigen::Index i = 0; i < init.b1.size(); ++i)
      check(init.b1.data() + i, after.b1(i));
    for (Eigen::Index i = 0; i < init.W2.size(); ++i)
      check(init.W2.data() + i, after.W2.data()[i]);
    for (Eigen::Index i = 0; i < init.b2.size(); ++i)
      check(init.b2.data() + i, after.b2(i));
  }
  return worst;
}

Outcome criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(20260814, 2));
  const double shift = shift_rule_worst(rng, 84);
  const double qlstm = qlstm_composite_worst(rng, 8);
  const double mlp = mlp_composite_worst(rng, 8);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool ok =
      shift <= 1e-4 && qlstm <= 1e-3 && mlp <= 1e-3 && secs < 60.0;
  return {ok, "100 instances: shift-rule err " + num(shift) +
                  " (tol 1e-4), composite qlstm err " + num(qlstm) +
                  ", mlp err " + num(mlp) + " (tol 1e-3), budget 60 s"};
}

// --- criterion 3: ridge normal equations + Cholesky oracle -------------------

Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  Eigen::MatrixXd x = b;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = x(i, c);
      for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = x(i, c);
      for (Eigen::Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

Outcome criterion_ridge() {
  Rng rng(Rng::derive(20260814, 3));
  double worst_res = 0.0, worst_chol = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int rows = 15 + static_cast<int>(rng.next_u64() % 36);
    const int feats = 2 + static_cast<int>(rng.next_u64() % 9);
    const int outs = 1 + static_cast<int>(rng.next_u64() % 3);
    const double lambda =
        std::exp(rng.uniform(std::log(1e-4), std::log(1.0)));
    Eigen::MatrixXd r(rows, feats), y(rows, outs);
    for (int a = 0; a < rows; ++a) {
      for (int c = 0; c < feats; ++c) r(a, c) = rng.normal();
      for (int c = 0; c < outs; ++c) y(a, c) = rng.normal();
    }
    const Eigen::MatrixXd w = qts::reservoir::fit_ridge({r, y}, lambda);
    const Eigen::MatrixXd gram =
        r.transpose() * r +
        lambda * Eigen::MatrixXd::Identity(feats, feats);
    const Eigen::MatrixXd rhs = r.transpose() * y;
    worst_res =
        std::max(worst_res, (gram * w - rhs).norm() / rhs.norm());
    worst_chol = std::max(
        worst_chol, (w - cholesky_solve(gram, rhs)).cwiseAbs().maxCoeff());
  }
  return {worst_res < 1e-8 && worst_chol <= 1e-9,
          "50 instances: worst relative residual " + num(worst_res) +
              " (tol 1e-8), worst gap to Cholesky oracle " + num(worst_chol) +
              " (tol 1e-9)"};
}

// --- criterion 4: hand-enumerated lag tables ---------------------------------

data::SeriesStd plain_series(const Eigen::VectorXd& values) {
  data::SeriesStd s;
  s.x = values;
  s.tau.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) s.tau(i) = i / 12.0;
  s.mean = 0.0;
  s.scale = 1.0;
  s.fit_begin = 0;
  s.fit_end = static_cast<int>(values.size());
  return s;
}

Outcome criterion_lags() {
  Eigen::VectorXd a(8), b(8);
  for (int i = 0; i < 8; ++i) {
    a(i) = i + 1;
    b(i) = 10.0 * (i + 1);
  }

  const data::LagDataset uni =
      data::build_lags({plain_series(a)}, 4, data::LagMode::Univariate, 1);
  Eigen::MatrixXd want_x(4, 4);
  want_x << 1, 2, 3, 4, 2, 3, 4, 5, 3, 4, 5, 6, 4, 5, 6, 7;
  Eigen::MatrixXd want_y(4, 1);
  want_y << 5, 6, 7, 8;
  const bool uni_ok = uni.X.rows() == 4 && uni.X.cols() == 4 &&
                      (uni.X - want_x).cwiseAbs().maxCoeff() == 0.0 &&
                      (uni.Y - want_y).cwiseAbs().maxCoeff() == 0.0;

  // 2-channel case, k = 2: window t holds [a_{t-2}, a_{t-1}, b_{t-2}, b_{t-1}]
  // (channel-major blocks) and predicts [a_t, b_t].
  const data::LagDataset multi = data::build_lags(
      {plain_series(a), plain_series(b)}, 2, data::LagMode::Multivariate, 1);
  bool multi_ok = multi.X.rows() == 6 && multi.X.cols() == 4 &&
                  multi.Y.cols() == 2;
  if (multi_ok) {
    for (int t = 2; t < 8; ++t) {
      const int r = t - 2;
      multi_ok = multi_ok && multi.X(r, 0) == a(t - 2) &&
                 multi.X(r, 1) == a(t - 1) && multi.X(r, 2) == b(t - 2) &&
                 multi.X(r, 3) == b(t - 1) && multi.Y(r, 0) == a(t) &&
                 multi.Y(r, 1) == b(t);
    }
  }
  return {uni_ok && multi_ok,
          std::string("series 1..8 with k=4 reproduces the lag table exactly; "
                      "2-channel block layout matches the hand enumeration: ") +
              (uni_ok && multi_ok ? "yes" : "no")};
}

// --- criterion 5: amplitude-encoding contract --------------------------------

Outcome criterion_encoding() {
  Rng rng(Rng::derive(20260814, 5));
  double worst_enc = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    Eigen::VectorXd v(1 << n);
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.normal();
    const qsim::StateVector st = enc::amplitude_encode(v);
    const Eigen::VectorXd want = v / v.norm();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      worst_enc = std::max(worst_enc,
                           std::abs(st.amplitudes[std::size_t(k)].real() -
                                    want(k)));
      worst_enc = std::max(worst_enc,
                           std::abs(st.amplitudes[std::size_t(k)].imag()));
    }
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    const qsim::StateVector st2 = enc::amplitude_encode(scale * v);
    for (std::size_t k = 0; k < st.dim(); ++k)
      worst_scale =
          std::max(worst_scale, std::abs(st2.amplitudes[k] - st.amplitudes[k]));
  }
  bool zero_raises = false;
  try {
    enc::amplitude_encode(Eigen::VectorXd::Zero(8));
  } catch (const qts::EncodingError&) {
    zero_raises = true;
  }
  return {worst_enc <= 1e-12 && worst_scale <= 1e-12 && zero_raises,
          "max amplitude error " + num(worst_enc) +
              ", max drift over 100 positive rescalings " + num(worst_scale) +
              " (tol 1e-12), zero vector raises: " +
              (zero_raises ? "yes" : "no")};
}

// --- criterion 6: data-model sanity ------------------------------------------

Outcome criterion_data_model() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(Rng::derive(20260814, 6));

  // (a) EM log-likelihood trace is non-decreasing on regime-switching noise.
  bool monotone = true;
  double worst_drop = 0.0;
  for (int s = 0; s < 20; ++s) {
    const int t_len = 60 + static_cast<int>(rng.next_u64() % 61);
    const double lo = -rng.uniform(0.2, 1.0);
    const double hi = rng.uniform(0.2, 1.0);
    const double sigma = 0.1 + 0.4 * rng.uniform();
    int state = rng.uniform() < 0.5 ? 0 : 1;
    Eigen::VectorXd r(t_len);
    for (int t = 0; t < t_len; ++t) {
      if (rng.uniform() < 0.15) state = 1 - state;
      r(t) = (state ? hi : lo) + sigma * rng.normal();
    }
    const data::HmmFitResult fit = data::fit_hmm(r);
    for (std::size_t i = 1; i < fit.ll_trace.size(); ++i) {
      const double slack = 1e-9 * std::max(1.0, std::abs(fit.ll_trace[i - 1]));
      if (fit.ll_trace[i] < fit.ll_trace[i - 1] - slack) {
        monotone = false;
        worst_drop =
            std::max(worst_drop, fit.ll_trace[i - 1] - fit.ll_trace[i]);
      }
    }
    if (!fit.ll_trace.empty() &&
        fit.ll_trace.back() < fit.ll_trace.front() - 1e-9)
      monotone = false;
  }

  // (b) GP fit recovers a planted 12-month period (tau is in years).
  Eigen::VectorXd tau(96), x(96);
  for (int i = 0; i < 96; ++i) {
    tau(i) = i / 12.0;
    x(i) = std::sin(2 * std::numbers::pi * tau(i));
  }
  const data::GpFitResult fit = data::fit_gp(tau, x);
  const double period = fit.model.hp.period;
  const bool period_ok = period > 0.8 && period < 1.2;

  // (c) 1000-sample synthesize ensemble vs the GP predictive mean. The HMM
  // offsets are pinned to zero so the expected path *is* the predictive mean;
  // the state machinery still runs (uniform draws, transitions, noise).
  data::SeriesStd series = plain_series(x);
  data::Hmm2 hmm;
  hmm.trans << 0.7, 0.3, 0.4, 0.6;
  hmm.offsets << 0.0, 0.0;
  hmm.initial << 0.5, 0.5;
  hmm.var = 0.04;
  const int horizon = 36;
  Eigen::VectorXd tau_star(horizon);
  for (int j = 0; j < horizon; ++j) tau_star(j) = tau(95) + (j + 1) / 12.0;
  const Eigen::VectorXd target = fit.model.posterior_mean(tau_star);

  const int samples = 1000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(horizon);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(horizon);
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd path = data::synthesize_std(
        fit.model, hmm, series, horizon, Rng::derive(606060, k));
    sum += path;
    sumsq += path.cwiseProduct(path);
  }
  double worst_z = 0.0;
  for (int j = 0; j < horizon; ++j) {
    const double mean = sum(j) / samples;
    const double var =
        (sumsq(j) / samples - mean * mean) * samples / (samples - 1.0);
    const double se = std::sqrt(var / samples);
    worst_z = std::max(worst_z, std::abs(mean - target(j)) / se);
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool ok = monotone && period_ok && worst_z < 3.0 && secs < 120.0;
  std::string detail = "EM trace non-decreasing on 20 series: ";
  detail += monotone ? "yes" : ("no (worst drop " + num(worst_drop) + ")");
  detail += ", recovered period " + num(period) +
            " (want 0.8-1.2), ensemble max |z| " + num(worst_z) +
            " over 36 months (tol 3), budget 120 s";
  return {ok, detail};
}

// --- criteria 7-9: end-to-end harness ----------------------------------------

// One shared seeded corpus for the end-to-end criteria (written once).
std::string ensure_corpus() {
  static const std::string csv = [] {
    exp_::GenerateConfig gen;  // corpus defaults: 20 series, 96+36 months, seed 1
    gen.out = (work_dir() / "corpus").string();
    exp_::run_generate(gen);
    return (work_dir() / "corpus" / "corpus.csv").string();
  }();
  return csv;
}

exp_::ExperimentConfig base_config(exp_::ModelKind model) {
  exp_::ExperimentConfig cfg;
  cfg.model = model;
  cfg.corpus = ensure_corpus();
  if (exp_::is_reservoir(model)) {
    // Tuned, config-exposed reservoir settings; recorded in every manifest.
    cfg.leak_rate = 0.7;
    cfg.ridge_lambda = 1e-4;
  }
  return cfg;
}

Outcome criterion_learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  const exp_::ModelKind kinds[] = {
      exp_::ModelKind::Lstm,  exp_::ModelKind::Qlstm, exp_::ModelKind::Rc,
      exp_::ModelKind::Qrc,   exp_::ModelKind::NnRc,  exp_::ModelKind::NnQrc};
  bool all_below = true;
  std::string detail;
  for (const auto kind : kinds) {
    exp_::ExperimentConfig cfg = base_config(kind);
    cfg.channels = {3};
    cfg.out = (work_dir() / ("c7_" + exp_::to_string(kind))).string();
    const exp_::RunResult res = exp_::run_experiment(cfg);
    const bool below = res.test_rmse_mean < res.persistence_test_rmse_mean;
    all_below = all_below && below;
    if (!detail.empty()) detail += ", ";
    detail += exp_::to_string(kind) + " " + num(res.test_rmse_mean) +
              (below ? " < " : " >= ") + num(res.persistence_test_rmse_mean);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {all_below && secs < 900.0,
          "5-seed mean test RMSE vs persistence on the seeded corpus: " +
              detail + ", budget 900 s"};
}

Outcome criterion_multivariate_pairs() {
  auto run_pairwise = [&](exp_::ModelKind kind, const char* tag) {
    exp_::ExperimentConfig cfg = base_config(kind);
    cfg.mode = exp_::Mode::Multivariate;  // channels default to {0, 1}
    cfg.out = (work_dir() / (std::string("c8_") + tag)).string();
    return cfg;
  };
  const exp_::ExperimentConfig cq = run_pairwise(exp_::ModelKind::Qlstm, "qlstm");
  const exp_::ExperimentConfig cl = run_pairwise(exp_::ModelKind::Lstm, "lstm");
  const exp_::ExperimentConfig cqr = run_pairwise(exp_::ModelKind::Qrc, "qrc");
  const exp_::ExperimentConfig crc = run_pairwise(exp_::ModelKind::Rc, "rc");

  const exp_::RunResult rq = exp_::run_experiment(cq);
  const exp_::RunResult rl = exp_::run_experiment(cl);
  const exp_::RunResult rqr = exp_::run_experiment(cqr);
  const exp_::RunResult rrc = exp_::run_experiment(crc);

  auto gap = [](std::size_t a, std::size_t b) {
    const double hi = static_cast<double>(std::max(a, b));
    return hi == 0.0 ? 0.0 : std::abs(double(a) - double(b)) / hi;
  };
  const double gap_lstm = gap(rq.model_params, rl.model_params);
  const double gap_rc = gap(rqr.model_params, rrc.model_params);

  const bool bitwise =
      exp_::strip_volatile(rq.to_json()).dump() ==
          exp_::strip_volatile(exp_::run_experiment(cq).to_json()).dump() &&
      exp_::strip_volatile(rl.to_json()).dump() ==
          exp_::strip_volatile(exp_::run_experiment(cl).to_json()).dump() &&
      exp_::strip_volatile(rqr.to_json()).dump() ==
          exp_::strip_volatile(exp_::run_experiment(cqr).to_json()).dump() &&
      exp_::strip_volatile(rrc.to_json()).dump() ==
          exp_::strip_volatile(exp_::run_experiment(crc).to_json()).dump();

  auto fmt_pair = [&](const char* qn, const exp_::RunResult& q, const char* cn,
                      const exp_::RunResult& c) {
    return std::string(qn) + " train/test " + num(q.train_rmse_mean) + "/" +
           num(q.test_rmse_mean) + " (" + std::to_string(q.model_params) +
           " params) vs " + cn + " " + num(c.train_rmse_mean) + "/" +
           num(c.test_rmse_mean) + " (" + std::to_string(c.model_params) +
           " params)";
  };
  const int quantum_wins = (rq.test_rmse_mean < rl.test_rmse_mean ? 1 : 0) +
                           (rqr.test_rmse_mean < rrc.test_rmse_mean ? 1 : 0);
  const bool ok = gap_lstm <= 0.10 && gap_rc <= 0.10 && bitwise;
  return {ok, fmt_pair("qlstm", rq, "lstm", rl) + "; " +
                  fmt_pair("qrc", rqr, "rc", rrc) + "; param gaps " +
                  num(100 * gap_lstm) + "% / " + num(100 * gap_rc) +
                  "% (tol 10%); quantum lower test RMSE on " +
                  std::to_string(quantum_wins) +
                  " of 2 pairs (reported, not asserted); reruns bitwise: " +
                  (bitwise ? "yes" : "no")};
}

Outcome criterion_determinism() {
  // Replay a run manifest.
  exp_::ExperimentConfig cfg = base_config(exp_::ModelKind::NnQrc);
  cfg.channels = {3};
  cfg.out = (work_dir() / "c9_run").string();
  const exp_::RunResult first = exp_::run_experiment(cfg);
  exp_::write_run_outputs(first);
  const qts::json manifest =
      qts::read_json_file(fs::path(cfg.out) / "manifest.json");
  const exp_::ExperimentConfig replayed_cfg =
      exp_::ExperimentConfig::from_json(manifest);
  const exp_::RunResult second = exp_::run_experiment(replayed_cfg);
  const bool run_bitwise = exp_::strip_volatile(first.to_json()).dump() ==
                           exp_::strip_volatile(second.to_json()).dump();

  // Replay the corpus manifest into a second directory.
  const qts::json gen_manifest =
      qts::read_json_file(work_dir() / "corpus" / "manifest.json");
  exp_::GenerateConfig gen = exp_::GenerateConfig::from_json(gen_manifest);
  gen.out = (work_dir() / "c9_corpus").string();
  exp_::run_generate(gen);
  const bool corpus_bitwise =
      slurp(work_dir() / "corpus" / "corpus.csv") ==
          slurp(work_dir() / "c9_corpus" / "corpus.csv") &&
      slurp(work_dir() / "corpus" / "corpus_meta.json") ==
          slurp(work_dir() / "c9_corpus" / "corpus_meta.json");

  return {run_bitwise && corpus_bitwise,
          std::string("manifest replay reproduces run metrics bitwise: ") +
              (run_bitwise ? "yes" : "no") +
              ", corpus replay byte-identical: " +
              (corpus_bitwise ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "simulator matches the dense matrix-chain oracle",
       criterion_simulator},
      {2, "shift-rule and composite gradients match finite differences",
       criterion_gradients},
      {3, "ridge readout satisfies the normal equations", criterion_ridge},
      {4, "lag tables match the hand enumeration", criterion_lags},
      {5, "amplitude encoding contract", criterion_encoding},
      {6, "data model sanity (EM, GP period, synthesize ensemble)",
       criterion_data_model},
      {7, "every model beats persistence on the seeded corpus",
       criterion_learnability},
      {8, "parameter-matched multivariate comparison",
       criterion_multivariate_pairs},
      {9, "manifest replay is bitwise deterministic", criterion_determinism},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("unexpected exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %d: %s -- %s [%.1f s]\n",
                o.pass ? "PASS" : "FAIL", e.id, e.label, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures == 0)
    std::printf("all 9 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
