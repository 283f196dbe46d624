#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qts/common.hpp"
#include "qts/json_io.hpp"

namespace qts::data {

// Monthly series in original (currency-like) units. Months are integer
// timestamps; when empty, 0..T-1 is implied.
struct SeriesRaw {
  Eigen::VectorXd values;
  std::vector<int> months;
};

// Standardized log-scale view of a series. x = (log1p(clip(v)) - mean)/scale
// with mean/scale taken over [fit_begin, fit_end). tau is time in years
// relative to the first month.
struct SeriesStd {
  Eigen::VectorXd x;
  Eigen::VectorXd tau;
  double mean = 0.0;
  double scale = 1.0;
  int fit_begin = 0;
  int fit_end = 0;
};

SeriesStd standardize(const SeriesRaw& raw, int fit_begin, int fit_end);

// Maps standardized values back to the original scale: exp(scale*x + mean)-1,
// clipped at zero.
double invert_value(const SeriesStd& s, double x_hat);
Eigen::VectorXd invert_standardize(const SeriesStd& s);

// --- Gaussian process ------------------------------------------------------

// Sum kernel: rational quadratic + Matern 3/2 + periodic, plus observation
// noise handled separately on the diagonal.
struct GpHyper {
  double mean = 0.0;
  double rq_var = 1.0;
  double rq_len = 1.0;
  double rq_alpha = 1.0;
  double mat_var = 1.0;
  double mat_len = 0.25;
  double per_var = 1.0;
  double per_len = 1.0;
  double period = 1.0;
  double noise_var = 0.1;

  json to_json() const;
  static GpHyper from_json(const json& j);
};

double kernel_value(const GpHyper& hp, double dist);
Eigen::MatrixXd kernel_matrix(const GpHyper& hp, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b);

struct GpModel {
  GpHyper hp;
  Eigen::VectorXd tau;
  Eigen::VectorXd x;
  // Cached lower Cholesky factor of K + (noise_var + 1e-6) I and the solved
  // weights alpha = K^-1 (x - mean).
  Eigen::MatrixXd chol;
  Eigen::VectorXd alpha;

  static GpModel condition(const GpHyper& hp, const Eigen::VectorXd& tau,
                           const Eigen::VectorXd& x);
  Eigen::VectorXd posterior_mean(const Eigen::VectorXd& tau_star) const;
  // Latent-function covariance (no observation noise).
  Eigen::MatrixXd posterior_cov(const Eigen::VectorXd& tau_star) const;

  json to_json() const;
  static GpModel from_json(const json& j);
};

// Marginal log-likelihood of the data under the model. When grad is non-null
// it receives the 10-entry gradient in the fitting parameterization:
// [d/d mean, then d/d log(param) for rq_var, rq_len, rq_alpha, mat_var,
// mat_len, per_var, per_len, period, noise_var].
double gp_log_marginal(const GpHyper& hp, const Eigen::VectorXd& tau,
                       const Eigen::VectorXd& x,
                       Eigen::VectorXd* grad = nullptr);
Eigen::VectorXd gp_residuals(const GpModel& m, const Eigen::VectorXd& tau,
                             const Eigen::VectorXd& x);

struct GpFitOptions {
  int max_accepted = 200;
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct GpFitResult {
  GpModel model;
  std::vector<double> trace;  // accepted marginal log-likelihood values
};

GpFitResult fit_gp(const Eigen::VectorXd& tau, const Eigen::VectorXd& x,
                   const GpFitOptions& opt = {});
// Fits on the series' standardization window.
GpFitResult fit_gp(const SeriesStd& series, const GpFitOptions& opt = {});

// --- Two-state Gaussian HMM -------------------------------------------------

struct Hmm2 {
  Eigen::Matrix2d trans = Eigen::Matrix2d::Constant(0.5);
  Eigen::Vector2d offsets = Eigen::Vector2d::Zero();
  Eigen::Vector2d initial = Eigen::Vector2d::Constant(0.5);
  double var = 1.0;  // emission variance, shared across states

  json to_json() const;
  static Hmm2 from_json(const json& j);
};

struct HmmFitResult {
  Hmm2 model;
  std::vector<double> ll_trace;
  bool fell_back = false;  // degenerate state collapse -> single offset
};

HmmFitResult fit_hmm(const Eigen::VectorXd& residuals);
double hmm_log_likelihood(const Hmm2& hmm, const Eigen::VectorXd& residuals);
// Smoothed per-step state posteriors, rows sum to 1.
Eigen::MatrixXd hmm_posteriors(const Hmm2& hmm,
                               const Eigen::VectorXd& residuals);
// Filtered distribution of the final state given all residuals.
Eigen::Vector2d hmm_filtered_final(const Hmm2& hmm,
                                   const Eigen::VectorXd& residuals);

// --- Synthesis ---------------------------------------------------------------

// Samples a continuation on the standardized scale: GP posterior path plus
// HMM offsets plus observation noise. Draw order per seed: horizon normals
// for the GP path, horizon uniforms for the state path, horizon normals for
// the noise.
Eigen::VectorXd synthesize_std(const GpModel& gp, const Hmm2& hmm,
                               const SeriesStd& series, int horizon,
                               std::uint64_t seed);
SeriesRaw synthesize(const GpModel& gp, const Hmm2& hmm,
                     const SeriesStd& series, int horizon, std::uint64_t seed);

// --- Lag windows --------------------------------------------------------------

enum class LagMode { Univariate, Multivariate };

struct LagDataset {
  Eigen::MatrixXd X;  // rows = windows, cols = k lags per channel, channel-major
  Eigen::MatrixXd Y;  // next value (or value horizon steps ahead) per channel
  Eigen::Index split_index = 0;  // first test row
};

LagDataset build_lags(const std::vector<SeriesStd>& channels, int k,
                      LagMode mode, int horizon = 1);

// --- CSV ----------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> names;
  std::vector<SeriesRaw> series;
};

CsvTable ingest_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& names,
               const std::vector<Eigen::VectorXd>& columns);

// --- Synthetic corpus -----------------------------------------------------------

struct CorpusConfig {
  int n_series = 20;
  int months = 96;    // observed span sampled from the prior
  int horizon = 36;   // continuation appended via the fitted models
  int fit_months = 60;
  std::uint64_t seed = 1;

  void validate() const;
  json to_json() const;
  static CorpusConfig from_json(const json& j);
};

struct Corpus {
  std::vector<std::string> names;
  std::vector<SeriesRaw> series;  // months + horizon points each
  json meta;
};

Corpus generate_corpus(const CorpusConfig& cfg);

}  // namespace qts::data
