#pragma once

#include <vector>

#include "qarg/sim.hpp"

namespace qarg {

/// Three-message public-coin protocol given as coherent circuits.
///   u1 acts on (A, B, C), in that local order.
///   u2 acts on (R, B, C) and may use R only as control.
///   v2 acts on (R, A, B, D, O); its ancillas are D and O, O last.
struct PublicCoinQIP {
  int reg_a = 0;
  int reg_b = 0;
  int reg_c = 0;
  int rand_len = 0;
  QuantumCircuit u1;
  QuantumCircuit u2;
  QuantumCircuit v2;

  int reg_d() const { return v2.ancilla_count - 1; }
  int witness_qubits() const { return reg_a + reg_b + reg_c; }
  int total_qubits() const { return witness_qubits() + rand_len + reg_d() + 1; }

  /// Throws LayoutError when register sizes and circuits disagree, or when
  /// a gate of u2 or v2 targets R.
  void validate() const;
};

/// Single verifier circuit on global layout A, B, C, R, D, O.
struct FlattenedVerifier {
  QuantumCircuit circuit;
  std::vector<int> witness_qubits;
  std::vector<int> ancilla_qubits;
  int output_qubit = 0;
};

/// H on every R qubit, then u1, u2, v2, remapped onto A, B, C, R, D, O.
FlattenedVerifier flatten(const PublicCoinQIP& qip);

/// Average over all 2^|R| coin strings of the probability that O reads 1
/// when the protocol runs with classical coins r on `aux`. |R| <= 12.
double interactive_accept_prob(const PublicCoinQIP& qip, const RealState& aux);

/// Probability that the output qubit reads 1 after running `verifier` on
/// witness (x) |0...0> (ancillas last).
double acceptance(const QuantumCircuit& verifier, const RealState& witness);

/// Witness-space operator M with <w|M|w> = acceptance(verifier, w).
/// At most 10 witness qubits.
MatX accept_operator(const QuantumCircuit& verifier);

struct BestWitness {
  RealState state;
  double acceptance;
};

/// Top eigenvector of accept_operator and its eigenvalue.
BestWitness best_witness(const QuantumCircuit& verifier);

struct AmplificationReport {
  double c;
  double s;
  std::size_t k;
  double tau;                  // (c + s) / 2
  std::size_t threshold;       // ceil(tau k)
  double completeness_bound;   // 1 - exp(-k (c - s)^2 / 2)
  double soundness_bound;      // exp(-k (c - s)^2 / 2)
  double exact_yes;            // P[Bin(k, c) >= threshold]
  double exact_no;             // P[Bin(k, s) >= threshold]

  bool bounds_hold() const { return exact_yes >= completeness_bound && exact_no <= soundness_bound; }
};

/// Threshold repetition at tau = (c + s) / 2 with exact binomial values.
/// Throws GapNonpositive unless c > s.
AmplificationReport threshold_amplify(double c, double s, std::size_t k);

/// exp(-2 eps^2 n). Throws RangeError unless 0 <= p <= 1 and eps > 0.
double chernoff(double p, double eps, std::size_t n);

/// k-copy threshold protocol (k <= 4): copies run side by side and O is set
/// iff at least ceil(tau k) copy outputs are 1. Registers:
///   A' = A_1..A_k, B' and C' likewise, R' = R_1..R_k,
///   D' = D_1..D_k, copy outputs o_1..o_k, two work qubits.
PublicCoinQIP threshold_product(const PublicCoinQIP& qip, int k, double tau);

/// aux^(x)k laid out as A', B', C' of threshold_product.
RealState product_witness(const PublicCoinQIP& qip, const RealState& aux, int k);

}  // namespace qarg
