#pragma once

// Reference implementations used only by tests. Each one recomputes a result
// through a different route than the library (dense matrix chains instead of
// in-place statevector updates, a from-scratch MT19937-64 instead of
// std::mt19937_64, central differences instead of analytic/shift gradients)
// so agreement is evidence, not tautology.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "qts/qsim.hpp"

namespace oracles {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline Eigen::Matrix2cd gate_matrix_2x2(const qts::qsim::Gate& g) {
  using qts::qsim::GateKind;
  const Complex i1(0.0, 1.0);
  Eigen::Matrix2cd m;
  switch (g.kind) {
    case GateKind::Hadamard: {
      double s = 1.0 / std::sqrt(2.0);
      m << s, s, s, -s;
      break;
    }
    case GateKind::RX: {
      double c = std::cos(g.angles[0] / 2), s = std::sin(g.angles[0] / 2);
      m << c, -i1 * s, -i1 * s, c;
      break;
    }
    case GateKind::RY: {
      double c = std::cos(g.angles[0] / 2), s = std::sin(g.angles[0] / 2);
      m << c, Complex(-s), Complex(s), Complex(c);
      break;
    }
    case GateKind::RZ: {
      double h = g.angles[0] / 2;
      m << std::exp(-i1 * h), Complex(0), Complex(0), std::exp(i1 * h);
      break;
    }
    case GateKind::Rot: {
      double a = g.angles[0], b = g.angles[1], c = g.angles[2];
      Eigen::Matrix2cd rza, ryb, rzc;
      rza << std::exp(-i1 * (a / 2)), Complex(0), Complex(0),
          std::exp(i1 * (a / 2));
      ryb << Complex(std::cos(b / 2)), Complex(-std::sin(b / 2)),
          Complex(std::sin(b / 2)), Complex(std::cos(b / 2));
      rzc << std::exp(-i1 * (c / 2)), Complex(0), Complex(0),
          std::exp(i1 * (c / 2));
      m = rzc * ryb * rza;
      break;
    }
    default:
      throw std::logic_error("gate_matrix_2x2: not single-qubit");
  }
  return m;
}

// Embeds a single-qubit matrix on qubit q (little-endian) into 2^n x 2^n.
inline MatrixXcd embed_single(const Eigen::Matrix2cd& u, int n, int q) {
  const int dim = 1 << n;
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    int b = (col >> q) & 1;
    int base = col & ~(1 << q);
    m(base, col) += u(0, b);
    m(base | (1 << q), col) += u(1, b);
  }
  return m;
}

inline MatrixXcd cnot_matrix(int n, int control, int target) {
  const int dim = 1 << n;
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    int row = (col & (1 << control)) ? (col ^ (1 << target)) : col;
    m(row, col) = 1.0;
  }
  return m;
}

inline MatrixXcd dense_gate_matrix(const qts::qsim::Gate& g, int n) {
  if (g.kind == qts::qsim::GateKind::CNOT)
    return cnot_matrix(n, g.control, g.target);
  return embed_single(gate_matrix_2x2(g), n, g.target);
}

// Full circuit unitary with params bound into the slotted angles.
inline MatrixXcd dense_circuit_matrix(const qts::qsim::CircuitSpec& c,
                                      std::vector<double> params) {
  std::vector<qts::qsim::Gate> gates = c.gates;
  for (std::size_t k = 0; k < c.param_slots.size(); ++k)
    gates[c.param_slots[k].gate_index].angles[c.param_slots[k].angle_index] =
        params[k];
  MatrixXcd total = MatrixXcd::Identity(1 << c.n_qubits, 1 << c.n_qubits);
  for (const auto& g : gates) total = dense_gate_matrix(g, c.n_qubits) * total;
  return total;
}

inline MatrixXcd pauli_matrix(qts::qsim::PauliAxis axis, int n, int q) {
  Eigen::Matrix2cd p;
  const Complex i1(0.0, 1.0);
  switch (axis) {
    case qts::qsim::PauliAxis::X:
      p << Complex(0), Complex(1), Complex(1), Complex(0);
      break;
    case qts::qsim::PauliAxis::Y:
      p << Complex(0), -i1, i1, Complex(0);
      break;
    case qts::qsim::PauliAxis::Z:
      p << Complex(1), Complex(0), Complex(0), Complex(-1);
      break;
  }
  return embed_single(p, n, q);
}

inline VectorXcd to_eigen(const qts::qsim::StateVector& s) {
  VectorXcd v(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) v(i) = s.amplitudes[i];
  return v;
}

// From-scratch MT19937-64 (Matsumoto & Nishimura parameters), plus the exact
// uniform/normal transforms the library documents, for replaying Rng streams.
class RefMt64 {
 public:
  explicit RefMt64(std::uint64_t seed) {
    mt_[0] = seed;
    for (int i = 1; i < 312; ++i)
      mt_[i] = 6364136223846793005ull * (mt_[i - 1] ^ (mt_[i - 1] >> 62)) + i;
    index_ = 312;
  }

  std::uint64_t next() {
    if (index_ >= 312) twist();
    std::uint64_t y = mt_[index_++];
    y ^= (y >> 29) & 0x5555555555555555ull;
    y ^= (y << 17) & 0x71D67FFFEDA60000ull;
    y ^= (y << 37) & 0xFFF7EEE000000000ull;
    y ^= y >> 43;
    return y;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  void twist() {
    constexpr std::uint64_t upper = 0xFFFFFFFF80000000ull;
    constexpr std::uint64_t lower = 0x7FFFFFFFull;
    for (int i = 0; i < 312; ++i) {
      std::uint64_t x = (mt_[i] & upper) + (mt_[(i + 1) % 312] & lower);
      std::uint64_t xa = x >> 1;
      if (x & 1) xa ^= 0xB5026F5AA96619E9ull;
      mt_[i] = mt_[(i + 156) % 312] ^ xa;
    }
    index_ = 0;
  }

  std::uint64_t mt_[312];
  int index_ = 0;
};

inline std::uint64_t ref_derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double finite_diff(const std::function<double(double)>& f, double x,
                          double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles
