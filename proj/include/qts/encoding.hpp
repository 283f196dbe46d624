#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "qts/qsim.hpp"

namespace qts::encoding {

enum class LiftKind { Identity, TanhConcat };

// Fixed (never trained) projection P: 2^n x d_lift, entries N(0,1)/sqrt(d_lift).
struct RandomProjection {
  Eigen::MatrixXd matrix;
  std::uint64_t seed = 0;

  static RandomProjection gaussian(int n_qubits, int lifted_dim,
                                   std::uint64_t seed);
  static RandomProjection from_matrix(Eigen::MatrixXd m);
};

// The three stages a feature vector passes through on its way into a circuit.
struct AmplitudeTarget {
  Eigen::VectorXd raw;
  Eigen::VectorXd lifted;      // length 2^n
  Eigen::VectorXd normalized;  // unit Euclidean norm
};

Eigen::VectorXd lift(const Eigen::VectorXd& vec, LiftKind kind);

// P * f_lift(vec), unnormalized; normalization happens once in
// amplitude_encode.
Eigen::VectorXd lift_and_project(const Eigen::VectorXd& vec,
                                 const RandomProjection& proj, LiftKind kind);

AmplitudeTarget prepare(const Eigen::VectorXd& raw,
                        const RandomProjection& proj, LiftKind kind);

// Exact amplitude encoding: amplitudes = vec / ||vec||, imaginary parts zero.
// Throws EncodingError on an all-zero vector, std::invalid_argument when the
// length is not a power of two in [2, 2^14].
qsim::StateVector amplitude_encode(const Eigen::VectorXd& vec);

// Chain-rule helper: gradient w.r.t. the unnormalized vector e given the
// gradient w.r.t. a = e/||e||:  de = (da - a (a . da)) / ||e||.
Eigen::VectorXd normalize_pullback(const Eigen::VectorXd& raw,
                                   const Eigen::VectorXd& d_normalized);

}  // namespace qts::encoding
