#include "qarg/clock.hpp"

#include <array>
#include <cmath>

namespace qarg {

namespace {

// |bit><bit| on `qubit` of an n-qubit register: (I + (-1)^bit Z) / 2.
Hamiltonian projector(int n, int qubit, int bit) {
  Hamiltonian h(n);
  h.add(0.5, PauliWord(n));
  h.add(bit ? -0.5 : 0.5, PauliWord(n, {{qubit, Letter::Z}}));
  return h;
}

Hamiltonian pauli_x(int n, int qubit) {
  Hamiltonian h(n);
  h.add(1.0, PauliWord(n, {{qubit, Letter::X}}));
  return h;
}

// Product of single-qubit factors on distinct qubits.
Hamiltonian product(std::initializer_list<Hamiltonian> factors) {
  auto it = factors.begin();
  Hamiltonian acc = *it;
  for (++it; it != factors.end(); ++it) acc = disjoint_product(acc, *it);
  return acc;
}

// Y-free decomposition of each gate kind, computed once.
const Hamiltonian& gate_decomposition(GateKind kind) {
  static const auto table = [] {
    std::array<Hamiltonian, 7> t;
    for (int k = 0; k < 7; ++k) t[k] = decompose_yfree(gate_matrix(static_cast<GateKind>(k)));
    return t;
  }();
  return table[static_cast<int>(kind)];
}

}  // namespace

std::string unary_clock(int t, int T) {
  if (T < 0 || t < 0 || t > T) throw RangeError("unary_clock: need 0 <= t <= T");
  return std::string(t, '1') + std::string(T - t, '0');
}

std::uint64_t unary_clock_index(int t, int T) {
  if (T < 0 || t < 0 || t > T || T > 63) throw RangeError("unary_clock_index: need 0 <= t <= T <= 63");
  return ((std::uint64_t{1} << t) - 1) << (T - t);
}

Hamiltonian clock_operator(ClockOpKind kind, int j, int T) {
  if (T < 2) throw RangeError("clock operators need T >= 2");
  if (kind == ClockOpKind::Diag) {
    if (j < 0 || j > T) throw RangeError("diag index outside [0, T]");
    if (j == 0) return projector(T, 1, 0);
    if (j == T) return projector(T, T, 1);
    return product({projector(T, j, 1), projector(T, j + 1, 0)});
  }
  if (j < 1 || j > T) throw RangeError("hop index outside [1, T]");
  if (j == 1) return product({pauli_x(T, 1), projector(T, 2, 0)});
  if (j == T) return product({projector(T, T - 1, 1), pauli_x(T, T)});
  return product({projector(T, j - 1, 1), pauli_x(T, j), projector(T, j + 1, 0)});
}

ClockBundle compile(const QuantumCircuit& circuit) {
  circuit.validate();
  const int T = static_cast<int>(circuit.gate_count());
  if (T < 2) {
    throw TooFewGates("circuit has " + std::to_string(T) +
                      " gate(s); at least 2 are needed (append a pair of X gates on a data qubit)");
  }
  ClockBundle b;
  b.layout = ClockLayout{circuit.num_qubits, circuit.ancilla_count, T};
  const ClockLayout& lay = b.layout;
  const int n = lay.total_qubits();

  std::vector<int> clock_map(T);
  for (int j = 1; j <= T; ++j) clock_map[j - 1] = lay.clock_qubit(j);
  auto clock = [&](ClockOpKind kind, int j) { return embed(clock_operator(kind, j, T), n, clock_map); };

  b.h_init = Hamiltonian(n);
  for (int i = 1; i <= lay.ancilla_count; ++i) {
    b.init_terms.push_back(disjoint_product(projector(n, lay.ancilla_qubit(i), 1), clock(ClockOpKind::Diag, 0)));
    b.h_init.append(b.init_terms.back());
  }

  b.h_clock = Hamiltonian(n);
  for (int j = 1; j <= T - 1; ++j) {
    b.clock_terms.push_back(product({projector(n, lay.clock_qubit(j), 0), projector(n, lay.clock_qubit(j + 1), 1)}));
    b.h_clock.append(b.clock_terms.back());
  }

  b.h_prop = Hamiltonian(n);
  for (int j = 1; j <= T; ++j) {
    const Gate& g = circuit.gates[j - 1];
    const Hamiltonian u = embed(gate_decomposition(g.kind), n, g.qubits);
    Hamiltonian term = 0.5 * (clock(ClockOpKind::Diag, j) + clock(ClockOpKind::Diag, j - 1));
    term.append(-0.5 * disjoint_product(u, clock(ClockOpKind::Hop, j)));
    b.h_prop.append(term);
    b.prop_terms.push_back(std::move(term));
  }

  b.h_final = disjoint_product(projector(n, lay.output_qubit(), 0), clock(ClockOpKind::Diag, T));

  b.h_total = b.h_prop + b.h_init + b.h_clock + b.h_final;
  b.pre_expansion_terms = static_cast<std::size_t>(lay.ancilla_count) + (T - 1) + T + 1;
  b.one_norm_bound = 128.0 * static_cast<double>(b.pre_expansion_terms);
  return b;
}

HistoryState history_state(const QuantumCircuit& circuit, const RealState& input, std::string input_label) {
  if (input.num_qubits() != circuit.num_qubits) {
    throw DimensionMismatch("history_state: input has " + std::to_string(input.num_qubits()) +
                            " qubits, circuit has " + std::to_string(circuit.num_qubits));
  }
  circuit.validate();
  const int T = static_cast<int>(circuit.gate_count());
  const int n = circuit.num_qubits + T;
  if (n > kMaxQubits) throw TooLarge("history state would need " + std::to_string(n) + " qubits");

  VecX out = VecX::Zero(Index{1} << n);
  VecX v = input.amplitudes();
  const double scale = 1.0 / std::sqrt(static_cast<double>(T + 1));
  for (int t = 0; t <= T; ++t) {
    if (t > 0) apply_gate_inplace(v, circuit.num_qubits, circuit.gates[t - 1]);
    const auto clock = static_cast<Index>(unary_clock_index(t, T));
    for (Index i = 0; i < v.size(); ++i) out[(i << T) | clock] = scale * v[i];
  }
  return HistoryState{RealState::normalized(std::move(out)), circuit, std::move(input_label)};
}

}  // namespace qarg
