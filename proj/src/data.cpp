#include "qts/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace qts::data {

namespace {

Eigen::VectorXd tau_from_months(const std::vector<int>& months, int t) {
  Eigen::VectorXd tau(t);
  if (months.empty()) {
    for (int i = 0; i < t; ++i) tau(i) = i / 12.0;
    return tau;
  }
  const int m0 = *std::min_element(months.begin(), months.end());
  for (int i = 0; i < t; ++i) tau(i) = (months[i] - m0) / 12.0;
  return tau;
}

}  // namespace

SeriesStd standardize(const SeriesRaw& raw, int fit_begin, int fit_end) {
  const int t = static_cast<int>(raw.values.size());
  if (t == 0) throw std::invalid_argument("standardize: empty series");
  if (!raw.months.empty() && static_cast<int>(raw.months.size()) != t)
    throw std::invalid_argument("standardize: months/values length mismatch");
  if (fit_begin < 0 || fit_end > t || fit_begin >= fit_end)
    throw std::invalid_argument("standardize: invalid fit window");

  Eigen::VectorXd u(t);
  for (int i = 0; i < t; ++i) u(i) = std::log1p(std::max(raw.values(i), 0.0));

  const auto window = u.segment(fit_begin, fit_end - fit_begin);
  const double mean = window.mean();
  const double var = (window.array() - mean).square().mean();
  // Relative threshold: summation rounding on an exactly constant window can
  // leave a residual variance of a few ulp squared, which must still count
  // as constant rather than become a ~1e-16 scale that amplifies noise.
  if (!(var > 1e-24 * (1.0 + mean * mean)))
    throw DataError(
        "standardize: constant series on the fit window (zero standard "
        "deviation)");

  SeriesStd out;
  out.mean = mean;
  out.scale = std::sqrt(var);
  out.x = (u.array() - mean).matrix() / out.scale;
  out.tau = tau_from_months(raw.months, t);
  out.fit_begin = fit_begin;
  out.fit_end = fit_end;
  return out;
}

double invert_value(const SeriesStd& s, double x_hat) {
  return std::max(0.0, std::expm1(s.scale * x_hat + s.mean));
}

Eigen::VectorXd invert_standardize(const SeriesStd& s) {
  Eigen::VectorXd out(s.x.size());
  for (Eigen::Index i = 0; i < s.x.size(); ++i)
    out(i) = invert_value(s, s.x(i));
  return out;
}

// --- Gaussian process ---------------------------------------------------------

json GpHyper::to_json() const {
  json j;
  j["mean"] = mean;
  j["rq_var"] = rq_var;
  j["rq_len"] = rq_len;
  j["rq_alpha"] = rq_alpha;
  j["mat_var"] = mat_var;
  j["mat_len"] = mat_len;
  j["per_var"] = per_var;
  j["per_len"] = per_len;
  j["period"] = period;
  j["noise_var"] = noise_var;
  return j;
}

GpHyper GpHyper::from_json(const json& j) {
  GpHyper hp;
  hp.mean = j.at("mean").get<double>();
  hp.rq_var = j.at("rq_var").get<double>();
  hp.rq_len = j.at("rq_len").get<double>();
  hp.rq_alpha = j.at("rq_alpha").get<double>();
  hp.mat_var = j.at("mat_var").get<double>();
  hp.mat_len = j.at("mat_len").get<double>();
  hp.per_var = j.at("per_var").get<double>();
  hp.per_len = j.at("per_len").get<double>();
  hp.period = j.at("period").get<double>();
  hp.noise_var = j.at("noise_var").get<double>();
  return hp;
}

double kernel_value(const GpHyper& hp, double dist) {
  const double d = std::abs(dist);
  const double r = d * d / (2.0 * hp.rq_alpha * hp.rq_len * hp.rq_len);
  const double rq = hp.rq_var * std::pow(1.0 + r, -hp.rq_alpha);
  const double a = std::numbers::sqrt3 * d / hp.mat_len;
  const double mat = hp.mat_var * (1.0 + a) * std::exp(-a);
  const double sn = std::sin(std::numbers::pi * d / hp.period);
  const double per =
      hp.per_var * std::exp(-2.0 * sn * sn / (hp.per_len * hp.per_len));
  return rq + mat + per;
}

Eigen::MatrixXd kernel_matrix(const GpHyper& hp, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      k(i, j) = kernel_value(hp, a(i) - b(j));
  return k;
}

GpModel GpModel::condition(const GpHyper& hp, const Eigen::VectorXd& tau,
                           const Eigen::VectorXd& x) {
  if (tau.size() != x.size() || x.size() == 0)
    throw std::invalid_argument("gp: tau/x length mismatch or empty");
  GpModel m;
  m.hp = hp;
  m.tau = tau;
  m.x = x;
  Eigen::MatrixXd k = kernel_matrix(hp, tau, tau);
  k.diagonal().array() += hp.noise_var + 1e-6;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success)
    throw NumericError("gp: covariance not positive definite; hyperparameters " +
                       hp.to_json().dump());
  m.chol = llt.matrixL();
  m.alpha = llt.solve(
      (x.array() - hp.mean).matrix().eval());
  return m;
}

Eigen::VectorXd GpModel::posterior_mean(const Eigen::VectorXd& tau_star) const {
  Eigen::MatrixXd kxs = kernel_matrix(hp, tau, tau_star);
  return (kxs.transpose() * alpha).array() + hp.mean;
}

Eigen::MatrixXd GpModel::posterior_cov(const Eigen::VectorXd& tau_star) const {
  Eigen::MatrixXd kxs = kernel_matrix(hp, tau, tau_star);
  Eigen::MatrixXd kss = kernel_matrix(hp, tau_star, tau_star);
  Eigen::MatrixXd v =
      chol.triangularView<Eigen::Lower>().solve(kxs);
  return kss - v.transpose() * v;
}

json GpModel::to_json() const {
  json j;
  j["hyper"] = hp.to_json();
  j["tau"] = vector_to_json(tau);
  j["x"] = vector_to_json(x);
  return j;
}

GpModel GpModel::from_json(const json& j) {
  return condition(GpHyper::from_json(j.at("hyper")),
                   vector_from_json(j.at("tau")), vector_from_json(j.at("x")));
}

Eigen::VectorXd gp_residuals(const GpModel& m, const Eigen::VectorXd& tau,
                             const Eigen::VectorXd& x) {
  if (tau.size() != x.size())
    throw std::invalid_argument("gp_residuals: tau/x length mismatch");
  return x - m.posterior_mean(tau);
}

namespace {

constexpr int kGpParams = 10;  // mean + 9 log-scale positives
constexpr double kLogLo = -10.0;
constexpr double kLogHi = 6.0;

Eigen::VectorXd gp_pack(const GpHyper& hp) {
  Eigen::VectorXd p(kGpParams);
  p << hp.mean, std::log(hp.rq_var), std::log(hp.rq_len),
      std::log(hp.rq_alpha), std::log(hp.mat_var), std::log(hp.mat_len),
      std::log(hp.per_var), std::log(hp.per_len), std::log(hp.period),
      std::log(hp.noise_var);
  return p;
}

void gp_clamp(Eigen::VectorXd& p) {
  for (int i = 1; i < kGpParams; ++i)
    p(i) = std::clamp(p(i), kLogLo, kLogHi);
}

GpHyper gp_unpack(const Eigen::VectorXd& p) {
  GpHyper hp;
  hp.mean = p(0);
  hp.rq_var = std::exp(p(1));
  hp.rq_len = std::exp(p(2));
  hp.rq_alpha = std::exp(p(3));
  hp.mat_var = std::exp(p(4));
  hp.mat_len = std::exp(p(5));
  hp.per_var = std::exp(p(6));
  hp.per_len = std::exp(p(7));
  hp.period = std::exp(p(8));
  hp.noise_var = std::exp(p(9));
  return hp;
}

// Marginal log-likelihood; when grad is non-null also fills the gradient in
// the packed parameterization (log-scale via chain rule). Returns NaN when
// the covariance fails to factor.
double gp_mll(const GpHyper& hp, const Eigen::MatrixXd& dist,
              const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd krq(n, n), kmat(n, n), kper(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = dist(i, j);
      const double r = d * d / (2.0 * hp.rq_alpha * hp.rq_len * hp.rq_len);
      krq(i, j) = hp.rq_var * std::pow(1.0 + r, -hp.rq_alpha);
      const double a = std::numbers::sqrt3 * d / hp.mat_len;
      kmat(i, j) = hp.mat_var * (1.0 + a) * std::exp(-a);
      const double sn = std::sin(std::numbers::pi * d / hp.period);
      kper(i, j) =
          hp.per_var * std::exp(-2.0 * sn * sn / (hp.per_len * hp.per_len));
    }
  Eigen::MatrixXd ky = krq + kmat + kper;
  ky.diagonal().array() += hp.noise_var + 1e-6;
  Eigen::LLT<Eigen::MatrixXd> llt(ky);
  if (llt.info() != Eigen::Success)
    return std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd centered = (x.array() - hp.mean).matrix();
  Eigen::VectorXd alpha = llt.solve(centered);
  double logdet = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(l(i, i));
  const double ll = -0.5 * centered.dot(alpha) - logdet -
                    0.5 * n * std::log(2.0 * std::numbers::pi);
  if (grad == nullptr) return ll;

  Eigen::MatrixXd b =
      alpha * alpha.transpose() -
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  grad->resize(kGpParams);
  (*grad)(0) = alpha.sum();
  double g_rq_var = 0, g_rq_len = 0, g_rq_alpha = 0;
  double g_mat_var = 0, g_mat_len = 0;
  double g_per_var = 0, g_per_len = 0, g_period = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = 0.5 * b(i, j);
      const double d = dist(i, j);
      // rational quadratic, derivatives in log-parameters
      const double r = d * d / (2.0 * hp.rq_alpha * hp.rq_len * hp.rq_len);
      g_rq_var += w * krq(i, j);
      g_rq_len += w * krq(i, j) * 2.0 * hp.rq_alpha * r / (1.0 + r);
      g_rq_alpha += w * krq(i, j) * hp.rq_alpha *
                    (-std::log1p(r) + r / (1.0 + r));
      // Matern 3/2
      const double a = std::numbers::sqrt3 * d / hp.mat_len;
      g_mat_var += w * kmat(i, j);
      g_mat_len += w * hp.mat_var * a * a * std::exp(-a);
      // periodic
      const double u = std::numbers::pi * d / hp.period;
      const double ll2 = hp.per_len * hp.per_len;
      g_per_var += w * kper(i, j);
      g_per_len += w * kper(i, j) * 4.0 * std::sin(u) * std::sin(u) / ll2;
      g_period += w * kper(i, j) * 2.0 * u * std::sin(2.0 * u) / ll2;
    }
  double g_noise = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) g_noise += 0.5 * b(i, i);
  g_noise *= hp.noise_var;
  (*grad)(1) = g_rq_var;
  (*grad)(2) = g_rq_len;
  (*grad)(3) = g_rq_alpha;
  (*grad)(4) = g_mat_var;
  (*grad)(5) = g_mat_len;
  (*grad)(6) = g_per_var;
  (*grad)(7) = g_per_len;
  (*grad)(8) = g_period;
  (*grad)(9) = g_noise;
  return ll;
}

}  // namespace

double gp_log_marginal(const GpHyper& hp, const Eigen::VectorXd& tau,
                       const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  if (tau.size() != x.size())
    throw std::invalid_argument("gp_log_marginal: tau/x length mismatch");
  Eigen::MatrixXd dist(tau.size(), tau.size());
  for (Eigen::Index i = 0; i < tau.size(); ++i)
    for (Eigen::Index j = 0; j < tau.size(); ++j)
      dist(i, j) = std::abs(tau(i) - tau(j));
  const double ll = gp_mll(hp, dist, x, grad);
  if (std::isnan(ll))
    throw NumericError("gp: covariance not positive definite; hyperparameters " +
                       hp.to_json().dump());
  return ll;
}

GpFitResult fit_gp(const Eigen::VectorXd& tau, const Eigen::VectorXd& x,
                   const GpFitOptions& opt) {
  const Eigen::Index n = x.size();
  if (tau.size() != n) throw std::invalid_argument("fit_gp: tau/x mismatch");
  if (n < 24) throw std::invalid_argument("fit_gp: need at least 24 points");

  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = std::abs(tau(i) - tau(j));

  double var = (x.array() - x.mean()).square().mean();
  if (var < 1e-12) var = 1e-12;
  GpHyper init;
  init.mean = x.mean();
  init.rq_var = init.mat_var = init.per_var = var / 3.0;
  init.noise_var = 0.1 * var;

  double best_ll = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  std::vector<double> best_trace;

  for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
    Eigen::VectorXd p = gp_pack(init);
    if (restart > 0) {
      Rng jitter(Rng::derive(opt.seed, static_cast<std::uint64_t>(restart)));
      for (int i = 1; i < kGpParams; ++i) p(i) += 0.3 * jitter.normal();
      gp_clamp(p);
    }
    Eigen::VectorXd g(kGpParams);
    double ll = gp_mll(gp_unpack(p), dist, x, &g);
    if (std::isnan(ll)) {
      if (restart == 0)
        throw NumericError(
            "gp: initial covariance not positive definite; hyperparameters " +
            gp_unpack(p).to_json().dump());
      continue;
    }
    std::vector<double> trace{ll};
    double step = 0.1;
    int accepted = 0;
    int rejects = 0;
    while (accepted < opt.max_accepted && rejects < 30) {
      if (!g.allFinite()) break;
      Eigen::VectorXd cand = p + step * g;
      gp_clamp(cand);
      const double cand_ll = gp_mll(gp_unpack(cand), dist, x, nullptr);
      if (std::isfinite(cand_ll) && cand_ll > ll) {
        p = cand;
        ll = gp_mll(gp_unpack(p), dist, x, &g);
        trace.push_back(ll);
        step *= 1.3;
        ++accepted;
        rejects = 0;
      } else {
        step *= 0.5;
        ++rejects;
      }
    }
    if (ll > best_ll) {
      best_ll = ll;
      best_p = p;
      best_trace = std::move(trace);
    }
  }
  if (!std::isfinite(best_ll))
    throw NumericError("gp: no restart produced a usable fit");
  return {GpModel::condition(gp_unpack(best_p), tau, x), best_trace};
}

GpFitResult fit_gp(const SeriesStd& series, const GpFitOptions& opt) {
  const int len = series.fit_end - series.fit_begin;
  return fit_gp(series.tau.segment(series.fit_begin, len),
                series.x.segment(series.fit_begin, len), opt);
}

// --- HMM -----------------------------------------------------------------------

json Hmm2::to_json() const {
  json j;
  j["trans"] = {{trans(0, 0), trans(0, 1)}, {trans(1, 0), trans(1, 1)}};
  j["offsets"] = {offsets(0), offsets(1)};
  j["initial"] = {initial(0), initial(1)};
  j["var"] = var;
  return j;
}

Hmm2 Hmm2::from_json(const json& j) {
  Hmm2 h;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      h.trans(i, k) = j.at("trans").at(i).at(k).get<double>();
  for (int i = 0; i < 2; ++i) {
    h.offsets(i) = j.at("offsets").at(i).get<double>();
    h.initial(i) = j.at("initial").at(i).get<double>();
  }
  h.var = j.at("var").get<double>();
  return h;
}

namespace {

double gauss_density(double value, double mean, double var) {
  const double d = value - mean;
  const double density =
      std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
  return std::max(density, 1e-300);
}

struct ForwardBackward {
  Eigen::MatrixXd gamma;       // T x 2 smoothed posteriors
  Eigen::Matrix2d xi_sum;      // expected transition counts
  Eigen::Vector2d filtered;    // filtered distribution at the last step
  double ll = 0.0;
};

ForwardBackward forward_backward(const Hmm2& hmm, const Eigen::VectorXd& r) {
  const Eigen::Index t_len = r.size();
  Eigen::MatrixXd b(t_len, 2);
  for (Eigen::Index t = 0; t < t_len; ++t)
    for (int s = 0; s < 2; ++s)
      b(t, s) = gauss_density(r(t), hmm.offsets(s), hmm.var);

  Eigen::MatrixXd ah(t_len, 2);
  Eigen::VectorXd c(t_len);
  for (int s = 0; s < 2; ++s) ah(0, s) = hmm.initial(s) * b(0, s);
  c(0) = std::max(ah.row(0).sum(), 1e-300);
  ah.row(0) /= c(0);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (int s = 0; s < 2; ++s)
      ah(t, s) =
          (ah(t - 1, 0) * hmm.trans(0, s) + ah(t - 1, 1) * hmm.trans(1, s)) *
          b(t, s);
    c(t) = std::max(ah.row(t).sum(), 1e-300);
    ah.row(t) /= c(t);
  }

  Eigen::MatrixXd bh(t_len, 2);
  bh.row(t_len - 1).setOnes();
  for (Eigen::Index t = t_len - 2; t >= 0; --t)
    for (int i = 0; i < 2; ++i)
      bh(t, i) = (hmm.trans(i, 0) * b(t + 1, 0) * bh(t + 1, 0) +
                  hmm.trans(i, 1) * b(t + 1, 1) * bh(t + 1, 1)) /
                 c(t + 1);

  ForwardBackward out;
  out.ll = c.array().log().sum();
  out.gamma.resize(t_len, 2);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::Vector2d g = (ah.row(t).array() * bh.row(t).array()).transpose();
    out.gamma.row(t) = g / std::max(g.sum(), 1e-300);
  }
  out.xi_sum.setZero();
  for (Eigen::Index t = 0; t + 1 < t_len; ++t) {
    Eigen::Matrix2d xi;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        xi(i, j) =
            ah(t, i) * hmm.trans(i, j) * b(t + 1, j) * bh(t + 1, j) / c(t + 1);
    out.xi_sum += xi / std::max(xi.sum(), 1e-300);
  }
  out.filtered = ah.row(t_len - 1).transpose();
  return out;
}

Hmm2 single_offset_model(const Eigen::VectorXd& r) {
  Hmm2 h;
  const double mean = r.mean();
  h.offsets << mean, mean;
  h.trans << 0.5, 0.5, 0.5, 0.5;
  h.initial << 0.5, 0.5;
  h.var = std::max((r.array() - mean).square().mean(), 1e-8);
  return h;
}

}  // namespace

double hmm_log_likelihood(const Hmm2& hmm, const Eigen::VectorXd& residuals) {
  if (residuals.size() == 0)
    throw std::invalid_argument("hmm: empty residuals");
  return forward_backward(hmm, residuals).ll;
}

Eigen::MatrixXd hmm_posteriors(const Hmm2& hmm,
                               const Eigen::VectorXd& residuals) {
  if (residuals.size() == 0)
    throw std::invalid_argument("hmm: empty residuals");
  return forward_backward(hmm, residuals).gamma;
}

Eigen::Vector2d hmm_filtered_final(const Hmm2& hmm,
                                   const Eigen::VectorXd& residuals) {
  if (residuals.size() == 0)
    throw std::invalid_argument("hmm: empty residuals");
  return forward_backward(hmm, residuals).filtered;
}

HmmFitResult fit_hmm(const Eigen::VectorXd& residuals) {
  const Eigen::Index t_len = residuals.size();
  if (t_len < 10)
    throw std::invalid_argument("fit_hmm: need at least 10 residuals");

  HmmFitResult out;
  const double mean = residuals.mean();
  const double var = (residuals.array() - mean).square().mean();
  if (!(var > 1e-16)) {
    out.model = single_offset_model(residuals);
    out.ll_trace.push_back(hmm_log_likelihood(out.model, residuals));
    out.fell_back = true;
    return out;
  }

  const double sd = std::sqrt(var);
  Hmm2 cur;
  cur.trans << 0.9, 0.1, 0.1, 0.9;
  cur.offsets << mean - sd, mean + sd;
  cur.initial << 0.5, 0.5;
  cur.var = var;

  Hmm2 prev = cur;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    ForwardBackward fb = forward_backward(cur, residuals);
    if (iter > 0 && fb.ll < prev_ll - 1e-10) {
      cur = prev;  // EM should not decrease; keep the last good parameters
      break;
    }
    out.ll_trace.push_back(fb.ll);

    Eigen::Vector2d counts = fb.gamma.colwise().sum().transpose();
    if (counts(0) < 1.0 || counts(1) < 1.0) {
      cur = single_offset_model(residuals);
      out.fell_back = true;
      break;
    }
    if (iter > 0 && std::abs(fb.ll - prev_ll) < 1e-8) break;
    prev = cur;
    prev_ll = fb.ll;

    for (int i = 0; i < 2; ++i) {
      const double denom = counts(i) - fb.gamma(t_len - 1, i);
      if (denom > 0) {
        for (int j = 0; j < 2; ++j) cur.trans(i, j) = fb.xi_sum(i, j) / denom;
        cur.trans.row(i) /= cur.trans.row(i).sum();
      }
      cur.offsets(i) = (fb.gamma.col(i).array() * residuals.array()).sum() /
                       counts(i);
    }
    double acc = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t)
      for (int s = 0; s < 2; ++s) {
        const double d = residuals(t) - cur.offsets(s);
        acc += fb.gamma(t, s) * d * d;
      }
    cur.var = std::max(acc / static_cast<double>(t_len), 1e-8);
    cur.initial = fb.gamma.row(0).transpose();
  }
  out.model = cur;
  return out;
}

// --- Synthesis -------------------------------------------------------------------

Eigen::VectorXd synthesize_std(const GpModel& gp, const Hmm2& hmm,
                               const SeriesStd& series, int horizon,
                               std::uint64_t seed) {
  if (horizon <= 0)
    throw std::invalid_argument("synthesize: horizon must be positive");
  if (series.x.size() == 0)
    throw std::invalid_argument("synthesize: empty series");

  const double tau_last = series.tau(series.tau.size() - 1);
  Eigen::VectorXd tau_star(horizon);
  for (int j = 0; j < horizon; ++j) tau_star(j) = tau_last + (j + 1) / 12.0;

  Eigen::VectorXd mean = gp.posterior_mean(tau_star);
  Eigen::MatrixXd cov = gp.posterior_cov(tau_star);

  Rng rng(seed);
  Eigen::VectorXd z(horizon);
  for (int j = 0; j < horizon; ++j) z(j) = rng.normal();

  Eigen::VectorXd f = mean;
  if (cov.norm() > 0.0) {
    double jitter = 1e-12;
    Eigen::LLT<Eigen::MatrixXd> llt;
    while (true) {
      Eigen::MatrixXd c = cov;
      c.diagonal().array() += jitter;
      llt.compute(c);
      if (llt.info() == Eigen::Success) break;
      jitter *= 10.0;
      if (jitter > 1e-6)
        throw NumericError(
            "synthesize: continuation covariance not positive definite");
    }
    f += Eigen::MatrixXd(llt.matrixL()) * z;
  }

  Eigen::VectorXd res = gp_residuals(gp, series.tau, series.x);
  Eigen::Vector2d state_dist = hmm.trans.transpose() *
                               hmm_filtered_final(hmm, res);
  Eigen::VectorXd offset(horizon);
  for (int j = 0; j < horizon; ++j) {
    const int state = rng.uniform() < state_dist(0) ? 0 : 1;
    offset(j) = hmm.offsets(state);
    state_dist = hmm.trans.row(state).transpose();
  }

  const double noise_sd = std::sqrt(std::max(gp.hp.noise_var, 0.0));
  Eigen::VectorXd eps(horizon);
  for (int j = 0; j < horizon; ++j) eps(j) = rng.normal(0.0, noise_sd);

  return f + offset + eps;
}

SeriesRaw synthesize(const GpModel& gp, const Hmm2& hmm,
                     const SeriesStd& series, int horizon,
                     std::uint64_t seed) {
  Eigen::VectorXd x_hat = synthesize_std(gp, hmm, series, horizon, seed);
  SeriesRaw out;
  out.values.resize(horizon);
  out.months.resize(horizon);
  const int last_month = static_cast<int>(
      std::lround(series.tau(series.tau.size() - 1) * 12.0));
  for (int j = 0; j < horizon; ++j) {
    out.values(j) = invert_value(series, x_hat(j));
    out.months[j] = last_month + 1 + j;
  }
  return out;
}

// --- Lag windows ------------------------------------------------------------------

LagDataset build_lags(const std::vector<SeriesStd>& channels, int k,
                      LagMode mode, int horizon) {
  if (channels.empty())
    throw std::invalid_argument("build_lags: no channels");
  if (k < 1) throw std::invalid_argument("build_lags: lag must be >= 1");
  if (horizon < 1)
    throw std::invalid_argument("build_lags: horizon must be >= 1");
  if (mode == LagMode::Univariate && channels.size() != 1)
    throw std::invalid_argument(
        "build_lags: univariate mode expects exactly one channel");
  const Eigen::Index t_len = channels[0].x.size();
  for (const auto& ch : channels)
    if (ch.x.size() != t_len)
      throw std::invalid_argument("build_lags: channel length mismatch");
  const Eigen::Index rows = t_len - k - horizon + 1;
  if (rows < 1)
    throw std::invalid_argument("build_lags: series shorter than lag window");

  const Eigen::Index n_ch = static_cast<Eigen::Index>(channels.size());
  LagDataset out;
  out.X.resize(rows, k * n_ch);
  out.Y.resize(rows, n_ch);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      for (int i = 0; i < k; ++i) out.X(r, c * k + i) = channels[c].x(r + i);
      out.Y(r, c) = channels[c].x(r + k + horizon - 1);
    }
  out.split_index = static_cast<Eigen::Index>(std::floor(0.8 * rows));
  return out;
}

// --- CSV ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvTable ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ": no data rows");

  CsvTable out;
  for (const std::string& cell : split_csv_line(line)) {
    const std::string name = trim(cell);
    if (name.empty())
      throw DataError(path.string() + ": empty column name in header");
    out.names.push_back(name);
  }

  std::vector<std::vector<double>> cols(out.names.size());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != out.names.size())
      throw DataError(path.string() + ": line " + std::to_string(lineno) +
                      ": expected " + std::to_string(out.names.size()) +
                      " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      const std::string where = path.string() + ": line " +
                                std::to_string(lineno) + ", column '" +
                                out.names[c] + "'";
      if (cell.empty()) throw DataError(where + ": missing value");
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr != end)
        throw DataError(where + ": not numeric '" + cell + "'");
      if (!std::isfinite(value))
        throw DataError(where + ": non-finite value");
      cols[c].push_back(value);
    }
  }
  if (cols.empty() || cols[0].empty())
    throw DataError(path.string() + ": no data rows");

  for (std::size_t c = 0; c < cols.size(); ++c) {
    SeriesRaw s;
    s.values = Eigen::Map<Eigen::VectorXd>(cols[c].data(),
                                           static_cast<Eigen::Index>(
                                               cols[c].size()));
    s.months.resize(cols[c].size());
    for (std::size_t i = 0; i < cols[c].size(); ++i)
      s.months[i] = static_cast<int>(i);
    out.series.push_back(std::move(s));
  }
  return out;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& names,
               const std::vector<Eigen::VectorXd>& columns) {
  if (names.size() != columns.size() || names.empty())
    throw std::invalid_argument("write_csv: names/columns mismatch");
  const Eigen::Index rows = columns[0].size();
  for (const auto& col : columns)
    if (col.size() != rows)
      throw std::invalid_argument("write_csv: column length mismatch");

  std::string body;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) body += ',';
    body += names[c];
  }
  body += '\n';
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) body += ',';
      body += format_double(columns[c](r));
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

// --- Synthetic corpus -----------------------------------------------------------------

void CorpusConfig::validate() const {
  if (n_series < 1)
    throw std::invalid_argument("corpus: n_series must be >= 1");
  if (fit_months < 24)
    throw std::invalid_argument("corpus: fit_months must be >= 24");
  if (months < fit_months)
    throw std::invalid_argument("corpus: months must cover the fit window");
  if (horizon < 1)
    throw std::invalid_argument("corpus: horizon must be >= 1");
}

json CorpusConfig::to_json() const {
  json j;
  j["n_series"] = n_series;
  j["months"] = months;
  j["horizon"] = horizon;
  j["fit_months"] = fit_months;
  j["seed"] = seed;
  return j;
}

CorpusConfig CorpusConfig::from_json(const json& j) {
  CorpusConfig cfg;
  cfg.n_series = j.at("n_series").get<int>();
  cfg.months = j.at("months").get<int>();
  cfg.horizon = j.at("horizon").get<int>();
  cfg.fit_months = j.at("fit_months").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

Corpus generate_corpus(const CorpusConfig& cfg) {
  cfg.validate();
  Corpus out;
  out.meta["config"] = cfg.to_json();
  out.meta["series"] = json::array();

  for (int idx = 0; idx < cfg.n_series; ++idx) {
    const std::uint64_t series_seed =
        Rng::derive(cfg.seed, static_cast<std::uint64_t>(idx));
    Rng rng(Rng::derive(series_seed, 0));

    GpHyper prior;
    prior.mean = 0.0;
    prior.rq_var = rng.uniform(0.2, 0.8);
    prior.rq_len = rng.uniform(0.5, 2.0);
    prior.rq_alpha = rng.uniform(0.5, 2.0);
    prior.mat_var = rng.uniform(0.1, 0.4);
    prior.mat_len = rng.uniform(0.15, 0.5);
    prior.per_var = rng.uniform(0.2, 0.8);
    prior.per_len = rng.uniform(0.6, 1.5);
    prior.period = rng.uniform(0.9, 1.1);
    prior.noise_var = rng.uniform(0.004, 0.02);
    const double offset_mag = rng.uniform(0.2, 0.6);
    const double diag0 = rng.uniform(0.85, 0.95);
    const double diag1 = rng.uniform(0.85, 0.95);
    const double mean_log = rng.uniform(3.0, 5.0);
    const double scale_log = rng.uniform(0.15, 0.35);

    Eigen::VectorXd tau(cfg.months);
    for (int t = 0; t < cfg.months; ++t) tau(t) = t / 12.0;
    Eigen::MatrixXd k = kernel_matrix(prior, tau, tau);
    k.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
      throw NumericError("corpus: prior covariance not positive definite");
    Eigen::VectorXd z(cfg.months);
    for (int t = 0; t < cfg.months; ++t) z(t) = rng.normal();
    Eigen::VectorXd f = Eigen::MatrixXd(llt.matrixL()) * z;

    Eigen::Matrix2d trans;
    trans << diag0, 1.0 - diag0, 1.0 - diag1, diag1;
    int state = rng.uniform() < 0.5 ? 0 : 1;
    Eigen::VectorXd offset(cfg.months);
    for (int t = 0; t < cfg.months; ++t) {
      if (t > 0) state = rng.uniform() < trans(state, 0) ? 0 : 1;
      offset(t) = state == 0 ? -offset_mag : offset_mag;
    }

    const double noise_sd = std::sqrt(prior.noise_var);
    Eigen::VectorXd x_std(cfg.months);
    for (int t = 0; t < cfg.months; ++t)
      x_std(t) = f(t) + offset(t) + rng.normal(0.0, noise_sd);

    SeriesRaw observed;
    observed.values.resize(cfg.months);
    observed.months.resize(cfg.months);
    for (int t = 0; t < cfg.months; ++t) {
      observed.values(t) =
          std::max(0.0, std::expm1(scale_log * x_std(t) + mean_log));
      observed.months[t] = t;
    }

    // Refit through the real pipeline and append a synthesized continuation.
    SeriesStd sstd = standardize(observed, 0, cfg.fit_months);
    GpFitOptions gp_opt;
    gp_opt.seed = Rng::derive(series_seed, 2);
    GpFitResult gp_fit = fit_gp(sstd, gp_opt);
    Eigen::VectorXd res = gp_residuals(gp_fit.model, sstd.tau, sstd.x);
    HmmFitResult hmm_fit = fit_hmm(res.head(cfg.fit_months));
    const std::uint64_t synth_seed = Rng::derive(series_seed, 1);
    SeriesRaw cont =
        synthesize(gp_fit.model, hmm_fit.model, sstd, cfg.horizon, synth_seed);

    SeriesRaw full;
    full.values.resize(cfg.months + cfg.horizon);
    full.values << observed.values, cont.values;
    full.months.resize(cfg.months + cfg.horizon);
    for (int t = 0; t < cfg.months + cfg.horizon; ++t) full.months[t] = t;

    out.names.push_back("s" + std::to_string(idx + 1));
    out.series.push_back(std::move(full));

    json entry;
    entry["name"] = out.names.back();
    entry["prior"] = prior.to_json();
    entry["offset_magnitude"] = offset_mag;
    entry["trans_diag"] = {diag0, diag1};
    entry["mean_log"] = mean_log;
    entry["scale_log"] = scale_log;
    entry["fitted_gp"] = gp_fit.model.hp.to_json();
    entry["final_mll"] = gp_fit.trace.back();
    entry["fitted_hmm"] = hmm_fit.model.to_json();
    entry["hmm_fell_back"] = hmm_fit.fell_back;
    entry["synth_seed"] = synth_seed;
    out.meta["series"].push_back(std::move(entry));
  }
  return out;
}

}  // namespace qts::data
