#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qts::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 14;

// Dense statevector, little-endian: qubit q is bit q of the amplitude index.
struct StateVector {
  int n_qubits = 0;
  std::vector<Complex> amplitudes;

  static StateVector zero_state(int n_qubits);
  static StateVector from_amplitudes(int n_qubits, std::vector<Complex> amps);

  std::size_t dim() const { return amplitudes.size(); }
  double norm_sq() const;
};

enum class GateKind { Hadamard, RX, RY, RZ, Rot, CNOT };

// Rotation convention: R_A(theta) = exp(-i theta A / 2).
// Rot(alpha, beta, gamma) = RZ(gamma) * RY(beta) * RZ(alpha).
struct Gate {
  GateKind kind = GateKind::Hadamard;
  int target = 0;
  int control = -1;                  // CNOT only
  std::array<double, 3> angles{};    // [0] for RX/RY/RZ, all three for Rot

  static Gate hadamard(int target);
  static Gate rx(int target, double theta);
  static Gate ry(int target, double theta);
  static Gate rz(int target, double theta);
  static Gate rot(int target, double alpha, double beta, double gamma);
  static Gate cnot(int control, int target);

  // Number of angle entries the gate consumes (0, 1 or 3).
  int angle_count() const;
  bool is_rotation() const { return angle_count() > 0; }
};

// Marks one angle of one gate as fed from the external parameter vector.
struct ParamSlot {
  std::size_t gate_index = 0;
  int angle_index = 0;
};

struct CircuitSpec {
  int n_qubits = 0;
  std::vector<Gate> gates;
  std::vector<ParamSlot> param_slots;

  std::size_t param_count() const { return param_slots.size(); }
  void add(const Gate& g) { gates.push_back(g); }
  // Appends the gate and slots all of its angles, returning the first new
  // parameter index.
  std::size_t add_parametrized(const Gate& g);
  void validate() const;  // throws std::invalid_argument on malformed specs
};

enum class PauliAxis { X, Y, Z };

struct Observable {
  PauliAxis axis = PauliAxis::Z;
  int qubit = 0;
};

StateVector apply_gate(const StateVector& state, const Gate& g);

// Binds params into the slotted angles and applies every gate in order.
StateVector run_circuit(const StateVector& input, const CircuitSpec& circuit,
                        std::span<const double> params);

double expect_pauli(const StateVector& state, PauliAxis axis, int qubit);

double weighted_expectation(const StateVector& state,
                            std::span<const Observable> observables,
                            std::span<const double> weights);

// d/d(params) of sum_j weights[j] * <observables[j]> via the two-point
// parameter-shift rule, one (+pi/2, -pi/2) pair per slot.
std::vector<double> parameter_shift_grad(const CircuitSpec& circuit,
                                         std::span<const double> params,
                                         const StateVector& input,
                                         std::span<const Observable> observables,
                                         std::span<const double> weights);

// Gradient of the same weighted expectation with respect to the real input
// amplitudes a (assumes the input state is real, as amplitude encoding
// produces): dL/da = 2 Re[ (U a)^dagger (sum_j w_j P_j) U e_a ] computed by
// one adjoint sweep.
std::vector<double> input_amplitude_grad(const CircuitSpec& circuit,
                                         std::span<const double> params,
                                         const StateVector& input,
                                         std::span<const Observable> observables,
                                         std::span<const double> weights);

}  // namespace qts::qsim
