#include "qts/encoding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qts/common.hpp"

namespace qts::encoding {

namespace {

// log2 of a power of two in [2, 2^kMaxQubits], or -1.
int qubit_count_for(Eigen::Index len) {
  for (int n = 1; n <= qsim::kMaxQubits; ++n)
    if (len == (Eigen::Index(1) << n)) return n;
  return -1;
}

}  // namespace

RandomProjection RandomProjection::gaussian(int n_qubits, int lifted_dim,
                                            std::uint64_t seed) {
  if (n_qubits < 1 || n_qubits > qsim::kMaxQubits)
    throw std::invalid_argument("projection qubit count out of range");
  if (lifted_dim < 1)
    throw std::invalid_argument("projection input dimension must be positive");
  RandomProjection p;
  p.seed = seed;
  p.matrix.resize(Eigen::Index(1) << n_qubits, lifted_dim);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(lifted_dim));
  for (Eigen::Index r = 0; r < p.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < p.matrix.cols(); ++c)
      p.matrix(r, c) = rng.normal() * scale;
  return p;
}

RandomProjection RandomProjection::from_matrix(Eigen::MatrixXd m) {
  if (qubit_count_for(m.rows()) < 0)
    throw std::invalid_argument("projection row count must be a power of two");
  RandomProjection p;
  p.matrix = std::move(m);
  return p;
}

Eigen::VectorXd lift(const Eigen::VectorXd& vec, LiftKind kind) {
  switch (kind) {
    case LiftKind::Identity:
      return vec;
    case LiftKind::TanhConcat: {
      Eigen::VectorXd out(vec.size() * 2);
      out.head(vec.size()) = vec;
      out.tail(vec.size()) = vec.array().tanh();
      return out;
    }
  }
  throw std::invalid_argument("unknown lift kind");
}

Eigen::VectorXd lift_and_project(const Eigen::VectorXd& vec,
                                 const RandomProjection& proj, LiftKind kind) {
  Eigen::VectorXd lifted = lift(vec, kind);
  if (lifted.size() != proj.matrix.cols())
    throw std::invalid_argument(
        "lifted vector has length " + std::to_string(lifted.size()) +
        ", projection expects " + std::to_string(proj.matrix.cols()));
  return proj.matrix * lifted;
}

AmplitudeTarget prepare(const Eigen::VectorXd& raw,
                        const RandomProjection& proj, LiftKind kind) {
  AmplitudeTarget t;
  t.raw = raw;
  t.lifted = lift_and_project(raw, proj, kind);
  t.normalized = t.lifted / t.lifted.norm();
  return t;
}

qsim::StateVector amplitude_encode(const Eigen::VectorXd& vec) {
  int n = qubit_count_for(vec.size());
  if (n < 0)
    throw std::invalid_argument("amplitude_encode: length " +
                                std::to_string(vec.size()) +
                                " is not a power of two in range");
  double nrm = vec.norm();
  if (nrm == 0.0)
    throw EncodingError("amplitude_encode: all-zero vector has no direction");
  if (!std::isfinite(nrm))
    throw NumericError("amplitude_encode: non-finite input vector");
  std::vector<qsim::Complex> amps(vec.size());
  for (Eigen::Index i = 0; i < vec.size(); ++i) amps[i] = vec(i) / nrm;
  return qsim::StateVector::from_amplitudes(n, std::move(amps));
}

Eigen::VectorXd normalize_pullback(const Eigen::VectorXd& raw,
                                   const Eigen::VectorXd& d_normalized) {
  if (raw.size() != d_normalized.size())
    throw std::invalid_argument("normalize_pullback: size mismatch");
  double nrm = raw.norm();
  if (nrm == 0.0)
    throw EncodingError("normalize_pullback: zero vector");
  Eigen::VectorXd a = raw / nrm;
  return (d_normalized - a * a.dot(d_normalized)) / nrm;
}

}  // namespace qts::encoding
