#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qarg/pauli.hpp"
#include "qarg/rng.hpp"
#include "qarg/types.hpp"

namespace qarg {

// Qubits are 1-based and big-endian throughout: qubit 1 is the most
// significant bit of a basis index.

enum class GateKind : std::uint8_t { H, X, Z, CNOT, CZ, CCX, CCZ };

int gate_arity(GateKind kind);
std::string_view gate_name(GateKind kind);
std::optional<GateKind> parse_gate_kind(std::string_view name);

/// Local 2^arity matrix of a gate; the first listed qubit is the most
/// significant. Every supported gate is real, symmetric and an involution.
MatX gate_matrix(GateKind kind);

struct Gate {
  GateKind kind;
  std::vector<int> qubits;

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Builds a gate, checking arity and distinct positive indices.
Gate make_gate(GateKind kind, std::vector<int> qubits);

/// Gate list over the supported set. Ancillas are the last `ancilla_count`
/// qubits and the output qubit is the last qubit.
struct QuantumCircuit {
  int num_qubits = 0;
  int ancilla_count = 0;
  std::vector<Gate> gates;

  int output_qubit() const { return num_qubits; }
  int witness_qubits() const { return num_qubits - ancilla_count; }
  std::size_t gate_count() const { return gates.size(); }

  /// Throws IndexOutOfRange / RangeError when the layout is inconsistent.
  void validate() const;

  friend bool operator==(const QuantumCircuit&, const QuantumCircuit&) = default;
};

/// Real amplitude vector of length 2^n with unit norm.
class RealState {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit RealState(int num_qubits = 0);

  static RealState basis(int num_qubits, std::uint64_t index);
  /// Wraps amplitudes; throws unless the length is a power of two and the
  /// norm is 1 within 1e-10.
  static RealState from_amplitudes(VecX amplitudes);
  /// Normalizes first. Throws RangeError on the zero vector.
  static RealState normalized(VecX amplitudes);
  /// Gaussian-random direction.
  static RealState random(int num_qubits, Rng& rng);

  int num_qubits() const { return num_qubits_; }
  Index dimension() const { return amplitudes_.size(); }
  const VecX& amplitudes() const { return amplitudes_; }
  double operator[](Index i) const { return amplitudes_[i]; }

  /// this (x) other, with `this` on the leading qubits.
  RealState tensor(const RealState& other) const;

 private:
  RealState(int num_qubits, VecX amplitudes);

  int num_qubits_;
  VecX amplitudes_;
};

/// In-place application on a raw big-endian amplitude vector of
/// `num_qubits` qubits.
void apply_gate_inplace(Eigen::Ref<VecX> amplitudes, int num_qubits, const Gate& gate);

RealState apply_gate(const RealState& state, const Gate& gate);
RealState run_circuit(const QuantumCircuit& circuit, const RealState& input);

/// Relabels the gates of `circuit` so local qubit i acts on mapping[i - 1]
/// of a register of `num_qubits`.
QuantumCircuit remap(const QuantumCircuit& circuit, int num_qubits, const std::vector<int>& mapping,
                     int ancilla_count = 0);

/// Per-qubit basis choice; None means the qubit is not measured.
enum class Basis : std::uint8_t { Z = 0, X = 1, None = 2 };
using BasisString = std::vector<Basis>;

enum class Outcome : std::int8_t { Zero = 0, One = 1, None = -1 };
using MeasurementRecord = std::vector<Outcome>;

/// Parses '0' (Z), '1' (X), '-' (unmeasured).
BasisString parse_basis(std::string_view text);
std::string to_string(const BasisString& b);
std::string to_string(const MeasurementRecord& m);

struct MeasureResult {
  MeasurementRecord record;
  RealState post;
};

/// Born-rule measurement of every non-None position; X positions are
/// measured by conjugating with H. The returned state is the normalized
/// post-measurement state.
MeasureResult measure(const BasisString& basis, const RealState& state, Rng& rng);
MeasureResult measure(const BasisString& basis, const RealState& state, std::uint64_t seed);

/// Exact outcome law over the measured positions (ascending qubit order),
/// keyed by '0'/'1' strings. At most 20 measured qubits.
std::map<std::string, double> outcome_distribution(const BasisString& basis, const RealState& state);

/// <psi| S |psi> for a single word.
double word_expectation(const RealState& state, const PauliWord& word);
/// sum_S d_S <psi| S |psi>.
double expectation(const RealState& state, const Hamiltonian& h);

/// Probability that `qubit` reads 1 in the computational basis.
double probability_one(const RealState& state, int qubit);

// Circuit text format: `qubits n`, `ancillas k`, one gate per line
// (`H 1`, `CNOT 1 2`, `CCZ 1 2 3`, ...), `#` comments.
QuantumCircuit read_circuit(std::istream& is, const std::string& source = "<stream>");
void write_circuit(std::ostream& os, const QuantumCircuit& circuit);

// State dump: 2^n decimal reals, one per line, basis index order (big-endian).
RealState read_state(std::istream& is, const std::string& source = "<stream>");
void write_state(std::ostream& os, const RealState& state);

}  // namespace qarg
