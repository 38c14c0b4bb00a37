#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qarg/pauli.hpp"
#include "qarg/sim.hpp"

namespace qarg {

/// "1^t 0^(T-t)". Throws RangeError unless 0 <= t <= T.
std::string unary_clock(int t, int T);

/// Basis index of unary_clock(t, T) read as a big-endian T-bit integer.
std::uint64_t unary_clock_index(int t, int T);

enum class ClockOpKind : std::uint8_t { Diag, Hop };

/// Clock operators on a T-qubit clock register (T >= 2).
///   Diag, j in [0, T]: projector onto the boundary pattern of time j.
///   Hop,  j in [1, T]: clock(|j><j-1|) plus its adjoint.
Hamiltonian clock_operator(ClockOpKind kind, int j, int T);

/// Register layout: data qubits 1..l (ancillas last, output at l), then
/// clock qubits l+1..l+T.
struct ClockLayout {
  int data_qubits = 0;
  int ancilla_count = 0;
  int clock_qubits = 0;

  int total_qubits() const { return data_qubits + clock_qubits; }
  int output_qubit() const { return data_qubits; }
  int ancilla_qubit(int i) const { return data_qubits - ancilla_count + i; }
  int clock_qubit(int j) const { return data_qubits + j; }
};

struct ClockBundle {
  ClockLayout layout;
  Hamiltonian h_init;
  Hamiltonian h_clock;
  Hamiltonian h_prop;
  Hamiltonian h_final;
  /// Concatenation of the four components; duplicate words are kept.
  Hamiltonian h_total;
  /// Local terms of each component, in summation order.
  std::vector<Hamiltonian> init_terms;
  std::vector<Hamiltonian> clock_terms;
  std::vector<Hamiltonian> prop_terms;
  /// Number of local terms before Pauli expansion: |Q| + (T-1) + T + 1.
  std::size_t pre_expansion_terms = 0;
  /// 2^7 per local term: each is at most 6-local with norm at most 2.
  double one_norm_bound = 0.0;
};

/// Compiles a circuit with T >= 2 gates into its clock Hamiltonian.
/// Throws TooFewGates when T < 2; pad with a pair of X gates.
ClockBundle compile(const QuantumCircuit& circuit);

struct HistoryState {
  RealState state;
  QuantumCircuit source_circuit;
  std::string input_label;
};

/// (T+1)^(-1/2) sum_t U_t...U_1 |input> (x) |1^t 0^(T-t)>, on l + T <= 20 qubits.
HistoryState history_state(const QuantumCircuit& circuit, const RealState& input, std::string input_label = "");

}  // namespace qarg
