#include "qts/qsim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qts::qsim {

namespace {

void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("qubit count must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n));
}

void check_target(const StateVector& state, int q, const char* what) {
  if (q < 0 || q >= state.n_qubits)
    throw std::invalid_argument(std::string(what) + " qubit " +
                                std::to_string(q) + " out of range for " +
                                std::to_string(state.n_qubits) + " qubits");
}

// Column-major 2x2: [m00 m01; m10 m11].
struct Mat2 {
  Complex m00, m01, m10, m11;
};

Mat2 single_qubit_matrix(const Gate& g) {
  using std::cos, std::sin;
  const Complex i1(0.0, 1.0);
  switch (g.kind) {
    case GateKind::Hadamard: {
      const double s = 1.0 / std::numbers::sqrt2;
      return {s, s, s, -s};
    }
    case GateKind::RX: {
      double c = cos(g.angles[0] / 2), s = sin(g.angles[0] / 2);
      return {c, -i1 * s, -i1 * s, c};
    }
    case GateKind::RY: {
      double c = cos(g.angles[0] / 2), s = sin(g.angles[0] / 2);
      return {c, -s, s, c};
    }
    case GateKind::RZ: {
      double h = g.angles[0] / 2;
      return {std::exp(-i1 * h), 0.0, 0.0, std::exp(i1 * h)};
    }
    case GateKind::Rot: {
      // RZ(gamma) RY(beta) RZ(alpha)
      double a = g.angles[0], b = g.angles[1], c = g.angles[2];
      double cb = cos(b / 2), sb = sin(b / 2);
      return {std::exp(-i1 * ((a + c) / 2)) * cb,
              -std::exp(i1 * ((a - c) / 2)) * sb,
              std::exp(-i1 * ((a - c) / 2)) * sb,
              std::exp(i1 * ((a + c) / 2)) * cb};
    }
    default:
      throw std::invalid_argument("not a single-qubit gate");
  }
}

void apply_single_qubit_inplace(StateVector& state, int q, const Mat2& m) {
  const std::size_t mask = std::size_t(1) << q;
  const std::size_t dim = state.dim();
  for (std::size_t base = 0; base < dim; base += 2 * mask) {
    for (std::size_t i = base; i < base + mask; ++i) {
      Complex a0 = state.amplitudes[i];
      Complex a1 = state.amplitudes[i | mask];
      state.amplitudes[i] = m.m00 * a0 + m.m01 * a1;
      state.amplitudes[i | mask] = m.m10 * a0 + m.m11 * a1;
    }
  }
}

void apply_cnot_inplace(StateVector& state, int control, int target) {
  const std::size_t cmask = std::size_t(1) << control;
  const std::size_t tmask = std::size_t(1) << target;
  const std::size_t dim = state.dim();
  for (std::size_t i = 0; i < dim; ++i)
    if ((i & cmask) && !(i & tmask))
      std::swap(state.amplitudes[i], state.amplitudes[i | tmask]);
}

void apply_gate_inplace(StateVector& state, const Gate& g) {
  if (g.kind == GateKind::CNOT) {
    check_target(state, g.control, "control");
    check_target(state, g.target, "target");
    if (g.control == g.target)
      throw std::invalid_argument("CNOT control equals target");
    apply_cnot_inplace(state, g.control, g.target);
  } else {
    check_target(state, g.target, "target");
    apply_single_qubit_inplace(state, g.target, single_qubit_matrix(g));
  }
}

Gate inverse_gate(const Gate& g) {
  Gate inv = g;
  switch (g.kind) {
    case GateKind::Hadamard:
    case GateKind::CNOT:
      break;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      inv.angles[0] = -g.angles[0];
      break;
    case GateKind::Rot:
      inv.angles = {-g.angles[2], -g.angles[1], -g.angles[0]};
      break;
  }
  return inv;
}

// chi += w * P_q phi
void accumulate_pauli(std::vector<Complex>& chi, const std::vector<Complex>& phi,
                      PauliAxis axis, int q, double w) {
  const std::size_t mask = std::size_t(1) << q;
  const std::size_t dim = phi.size();
  const Complex i1(0.0, 1.0);
  for (std::size_t base = 0; base < dim; base += 2 * mask) {
    for (std::size_t i = base; i < base + mask; ++i) {
      switch (axis) {
        case PauliAxis::X:
          chi[i] += w * phi[i | mask];
          chi[i | mask] += w * phi[i];
          break;
        case PauliAxis::Y:
          chi[i] += w * (-i1) * phi[i | mask];
          chi[i | mask] += w * i1 * phi[i];
          break;
        case PauliAxis::Z:
          chi[i] += w * phi[i];
          chi[i | mask] -= w * phi[i | mask];
          break;
      }
    }
  }
}

void check_observables(const StateVector& state,
                       std::span<const Observable> observables,
                       std::span<const double> weights) {
  if (observables.size() != weights.size())
    throw std::invalid_argument("observable/weight count mismatch");
  for (const auto& o : observables) check_target(state, o.qubit, "observable");
}

}  // namespace

StateVector StateVector::zero_state(int n_qubits) {
  check_qubit_count(n_qubits);
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t(1) << n_qubits, Complex(0.0, 0.0));
  s.amplitudes[0] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(int n_qubits,
                                         std::vector<Complex> amps) {
  check_qubit_count(n_qubits);
  if (amps.size() != (std::size_t(1) << n_qubits))
    throw std::invalid_argument("amplitude vector has length " +
                                std::to_string(amps.size()) + ", expected 2^" +
                                std::to_string(n_qubits));
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes = std::move(amps);
  return s;
}

double StateVector::norm_sq() const {
  double acc = 0.0;
  for (const auto& a : amplitudes) acc += std::norm(a);
  return acc;
}

Gate Gate::hadamard(int target) { return {GateKind::Hadamard, target, -1, {}}; }
Gate Gate::rx(int target, double theta) {
  return {GateKind::RX, target, -1, {theta, 0, 0}};
}
Gate Gate::ry(int target, double theta) {
  return {GateKind::RY, target, -1, {theta, 0, 0}};
}
Gate Gate::rz(int target, double theta) {
  return {GateKind::RZ, target, -1, {theta, 0, 0}};
}
Gate Gate::rot(int target, double alpha, double beta, double gamma) {
  return {GateKind::Rot, target, -1, {alpha, beta, gamma}};
}
Gate Gate::cnot(int control, int target) {
  return {GateKind::CNOT, target, control, {}};
}

int Gate::angle_count() const {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      return 1;
    case GateKind::Rot:
      return 3;
    default:
      return 0;
  }
}

std::size_t CircuitSpec::add_parametrized(const Gate& g) {
  std::size_t first = param_slots.size();
  gates.push_back(g);
  for (int a = 0; a < g.angle_count(); ++a)
    param_slots.push_back({gates.size() - 1, a});
  if (param_slots.size() == first)
    throw std::invalid_argument("add_parametrized: gate has no angles");
  return first;
}

void CircuitSpec::validate() const {
  check_qubit_count(n_qubits);
  for (const auto& g : gates) {
    if (g.target < 0 || g.target >= n_qubits)
      throw std::invalid_argument("gate target out of range");
    if (g.kind == GateKind::CNOT) {
      if (g.control < 0 || g.control >= n_qubits)
        throw std::invalid_argument("CNOT control out of range");
      if (g.control == g.target)
        throw std::invalid_argument("CNOT control equals target");
    }
  }
  for (const auto& s : param_slots) {
    if (s.gate_index >= gates.size())
      throw std::invalid_argument("parameter slot references missing gate");
    const Gate& g = gates[s.gate_index];
    if (!g.is_rotation())
      throw std::invalid_argument(
          "parameter slot references a non-rotation gate");
    if (s.angle_index < 0 || s.angle_index >= g.angle_count())
      throw std::invalid_argument("parameter slot angle index out of range");
  }
}

StateVector apply_gate(const StateVector& state, const Gate& g) {
  StateVector out = state;
  apply_gate_inplace(out, g);
  return out;
}

StateVector run_circuit(const StateVector& input, const CircuitSpec& circuit,
                        std::span<const double> params) {
  circuit.validate();
  if (input.n_qubits != circuit.n_qubits)
    throw std::invalid_argument("state/circuit qubit count mismatch");
  if (params.size() != circuit.param_count())
    throw std::invalid_argument(
        "expected " + std::to_string(circuit.param_count()) + " params, got " +
        std::to_string(params.size()));

  std::vector<std::array<double, 3>> angles;
  angles.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) angles.push_back(g.angles);
  for (std::size_t k = 0; k < circuit.param_slots.size(); ++k) {
    const auto& s = circuit.param_slots[k];
    angles[s.gate_index][s.angle_index] = params[k];
  }

  StateVector out = input;
  for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
    Gate g = circuit.gates[gi];
    g.angles = angles[gi];
    apply_gate_inplace(out, g);
  }
  return out;
}

double expect_pauli(const StateVector& state, PauliAxis axis, int qubit) {
  check_target(state, qubit, "observable");
  const std::size_t mask = std::size_t(1) << qubit;
  const std::size_t dim = state.dim();
  double acc = 0.0;
  for (std::size_t base = 0; base < dim; base += 2 * mask) {
    for (std::size_t i = base; i < base + mask; ++i) {
      const Complex a0 = state.amplitudes[i];
      const Complex a1 = state.amplitudes[i | mask];
      switch (axis) {
        case PauliAxis::X:
          acc += 2.0 * (std::conj(a0) * a1).real();
          break;
        case PauliAxis::Y:
          acc += 2.0 * (std::conj(a0) * a1).imag();
          break;
        case PauliAxis::Z:
          acc += std::norm(a0) - std::norm(a1);
          break;
      }
    }
  }
  return acc;
}

double weighted_expectation(const StateVector& state,
                            std::span<const Observable> observables,
                            std::span<const double> weights) {
  check_observables(state, observables, weights);
  double acc = 0.0;
  for (std::size_t j = 0; j < observables.size(); ++j)
    acc += weights[j] * expect_pauli(state, observables[j].axis,
                                     observables[j].qubit);
  return acc;
}

std::vector<double> parameter_shift_grad(const CircuitSpec& circuit,
                                         std::span<const double> params,
                                         const StateVector& input,
                                         std::span<const Observable> observables,
                                         std::span<const double> weights) {
  circuit.validate();
  check_observables(input, observables, weights);
  if (params.size() != circuit.param_count())
    throw std::invalid_argument("parameter count mismatch");

  constexpr double half_pi = std::numbers::pi / 2;
  std::vector<double> shifted(params.begin(), params.end());
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    shifted[k] = params[k] + half_pi;
    double plus =
        weighted_expectation(run_circuit(input, circuit, shifted), observables,
                             weights);
    shifted[k] = params[k] - half_pi;
    double minus =
        weighted_expectation(run_circuit(input, circuit, shifted), observables,
                             weights);
    shifted[k] = params[k];
    grad[k] = 0.5 * (plus - minus);
  }
  return grad;
}

std::vector<double> input_amplitude_grad(const CircuitSpec& circuit,
                                         std::span<const double> params,
                                         const StateVector& input,
                                         std::span<const Observable> observables,
                                         std::span<const double> weights) {
  check_observables(input, observables, weights);
  StateVector phi = run_circuit(input, circuit, params);

  StateVector chi = phi;
  chi.amplitudes.assign(chi.dim(), Complex(0.0, 0.0));
  for (std::size_t j = 0; j < observables.size(); ++j)
    accumulate_pauli(chi.amplitudes, phi.amplitudes, observables[j].axis,
                     observables[j].qubit, weights[j]);

  std::vector<std::array<double, 3>> angles;
  angles.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) angles.push_back(g.angles);
  for (std::size_t k = 0; k < circuit.param_slots.size(); ++k) {
    const auto& s = circuit.param_slots[k];
    angles[s.gate_index][s.angle_index] = params[k];
  }
  for (std::size_t gi = circuit.gates.size(); gi-- > 0;) {
    Gate g = circuit.gates[gi];
    g.angles = angles[gi];
    apply_gate_inplace(chi, inverse_gate(g));
  }

  std::vector<double> grad(chi.dim());
  for (std::size_t i = 0; i < chi.dim(); ++i)
    grad[i] = 2.0 * chi.amplitudes[i].real();
  return grad;
}

}  // namespace qts::qsim
