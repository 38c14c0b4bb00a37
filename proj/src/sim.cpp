#include "qarg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace qarg {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int arity;
};

constexpr GateInfo kGates[] = {
    {GateKind::H, "H", 1},       {GateKind::X, "X", 1},     {GateKind::Z, "Z", 1},
    {GateKind::CNOT, "CNOT", 2}, {GateKind::CZ, "CZ", 2},   {GateKind::CCX, "CCX", 3},
    {GateKind::CCZ, "CCZ", 3},
};

const GateInfo& info(GateKind kind) { return kGates[static_cast<int>(kind)]; }

void check_num_qubits(int n) {
  if (n < 0) throw RangeError("negative qubit count");
  if (n > kMaxQubits) throw TooLarge("statevector limited to 20 qubits, got " + std::to_string(n));
}

void hadamard(Eigen::Ref<VecX> a, std::uint64_t m) {
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & m) continue;
    const double u = a[static_cast<Index>(i)];
    const double v = a[static_cast<Index>(i | m)];
    a[static_cast<Index>(i)] = (u + v) * kInvSqrt2;
    a[static_cast<Index>(i | m)] = (u - v) * kInvSqrt2;
  }
}

// Swaps amplitude pairs differing in `target` among indices where all
// `controls` bits are set.
void controlled_flip(Eigen::Ref<VecX> a, std::uint64_t controls, std::uint64_t target) {
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & target) || (i & controls) != controls) continue;
    std::swap(a[static_cast<Index>(i)], a[static_cast<Index>(i | target)]);
  }
}

// Negates amplitudes where all bits of `mask` are set.
void phase(Eigen::Ref<VecX> a, std::uint64_t mask) {
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t i = 0; i < dim; ++i)
    if ((i & mask) == mask) a[static_cast<Index>(i)] = -a[static_cast<Index>(i)];
}

std::string trim_comment(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  return line;
}

}  // namespace

int gate_arity(GateKind kind) { return info(kind).arity; }

std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> parse_gate_kind(std::string_view name) {
  for (const auto& g : kGates)
    if (g.name == name) return g.kind;
  return std::nullopt;
}

MatX gate_matrix(GateKind kind) {
  const int a = gate_arity(kind);
  const Index dim = Index{1} << a;
  MatX m(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    VecX e = VecX::Zero(dim);
    e[col] = 1.0;
    std::vector<int> qubits(a);
    for (int i = 0; i < a; ++i) qubits[i] = i + 1;
    apply_gate_inplace(e, a, Gate{kind, qubits});
    m.col(col) = e;
  }
  return m;
}

Gate make_gate(GateKind kind, std::vector<int> qubits) {
  if (static_cast<int>(qubits.size()) != gate_arity(kind)) {
    throw RangeError(std::string(gate_name(kind)) + " takes " + std::to_string(gate_arity(kind)) + " qubit(s)");
  }
  std::set<int> seen;
  for (const int q : qubits) {
    if (q < 1) throw IndexOutOfRange("gate qubit index must be >= 1");
    if (!seen.insert(q).second) throw RangeError("gate qubits must be distinct");
  }
  return Gate{kind, std::move(qubits)};
}

void QuantumCircuit::validate() const {
  check_num_qubits(num_qubits);
  if (ancilla_count < 0 || ancilla_count > num_qubits) throw RangeError("ancilla count outside [0, qubits]");
  for (const auto& g : gates) {
    if (static_cast<int>(g.qubits.size()) != gate_arity(g.kind)) throw RangeError("gate arity mismatch");
    for (const int q : g.qubits)
      if (q < 1 || q > num_qubits) {
        throw IndexOutOfRange(std::string(gate_name(g.kind)) + " on qubit " + std::to_string(q) +
                              " outside [1, " + std::to_string(num_qubits) + "]");
      }
  }
}

RealState::RealState(int num_qubits) : num_qubits_(num_qubits) {
  check_num_qubits(num_qubits);
  amplitudes_ = VecX::Zero(Index{1} << num_qubits);
  amplitudes_[0] = 1.0;
}

RealState::RealState(int num_qubits, VecX amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

RealState RealState::basis(int num_qubits, std::uint64_t index) {
  RealState s(num_qubits);
  if (index >= static_cast<std::uint64_t>(s.dimension())) throw IndexOutOfRange("basis index out of range");
  s.amplitudes_[0] = 0.0;
  s.amplitudes_[static_cast<Index>(index)] = 1.0;
  return s;
}

RealState RealState::from_amplitudes(VecX amplitudes) {
  const Index dim = amplitudes.size();
  if (dim < 1 || (dim & (dim - 1)) != 0) throw DimensionMismatch("state length must be a power of two");
  const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(dim))));
  check_num_qubits(n);
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw RangeError("state is not normalized");
  return RealState(n, std::move(amplitudes));
}

RealState RealState::normalized(VecX amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0 || !std::isfinite(norm)) throw RangeError("cannot normalize a zero vector");
  return from_amplitudes(amplitudes / norm);
}

RealState RealState::random(int num_qubits, Rng& rng) {
  check_num_qubits(num_qubits);
  VecX v(Index{1} << num_qubits);
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return normalized(std::move(v));
}

RealState RealState::tensor(const RealState& other) const {
  check_num_qubits(num_qubits_ + other.num_qubits_);
  VecX v(dimension() * other.dimension());
  for (Index i = 0; i < dimension(); ++i) v.segment(i * other.dimension(), other.dimension()) = amplitudes_[i] * other.amplitudes_;
  return RealState(num_qubits_ + other.num_qubits_, std::move(v));
}

void apply_gate_inplace(Eigen::Ref<VecX> amplitudes, int num_qubits, const Gate& gate) {
  for (const int q : gate.qubits)
    if (q < 1 || q > num_qubits) {
      throw IndexOutOfRange(std::string(gate_name(gate.kind)) + " on qubit " + std::to_string(q) +
                            " outside [1, " + std::to_string(num_qubits) + "]");
    }
  auto mask = [&](int i) { return qubit_mask(num_qubits, gate.qubits[i]); };
  switch (gate.kind) {
    case GateKind::H: hadamard(amplitudes, mask(0)); break;
    case GateKind::X: controlled_flip(amplitudes, 0, mask(0)); break;
    case GateKind::Z: phase(amplitudes, mask(0)); break;
    case GateKind::CNOT: controlled_flip(amplitudes, mask(0), mask(1)); break;
    case GateKind::CZ: phase(amplitudes, mask(0) | mask(1)); break;
    case GateKind::CCX: controlled_flip(amplitudes, mask(0) | mask(1), mask(2)); break;
    case GateKind::CCZ: phase(amplitudes, mask(0) | mask(1) | mask(2)); break;
  }
}

RealState apply_gate(const RealState& state, const Gate& gate) {
  VecX a = state.amplitudes();
  apply_gate_inplace(a, state.num_qubits(), gate);
  return RealState::from_amplitudes(std::move(a));
}

RealState run_circuit(const QuantumCircuit& circuit, const RealState& input) {
  if (input.num_qubits() != circuit.num_qubits) {
    throw DimensionMismatch("circuit on " + std::to_string(circuit.num_qubits) + " qubits given a " +
                            std::to_string(input.num_qubits()) + "-qubit input");
  }
  circuit.validate();
  VecX a = input.amplitudes();
  for (const auto& g : circuit.gates) apply_gate_inplace(a, circuit.num_qubits, g);
  return RealState::normalized(std::move(a));
}

QuantumCircuit remap(const QuantumCircuit& circuit, int num_qubits, const std::vector<int>& mapping,
                     int ancilla_count) {
  if (static_cast<int>(mapping.size()) != circuit.num_qubits) {
    throw LayoutError("remap: mapping has " + std::to_string(mapping.size()) + " entries for a " +
                      std::to_string(circuit.num_qubits) + "-qubit circuit");
  }
  QuantumCircuit out{num_qubits, ancilla_count, {}};
  out.gates.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) {
    std::vector<int> qs;
    for (const int q : g.qubits) qs.push_back(mapping.at(q - 1));
    out.gates.push_back(make_gate(g.kind, std::move(qs)));
  }
  out.validate();
  return out;
}

BasisString parse_basis(std::string_view text) {
  BasisString b;
  for (const char c : text) {
    switch (c) {
      case '0': b.push_back(Basis::Z); break;
      case '1': b.push_back(Basis::X); break;
      case '-': b.push_back(Basis::None); break;
      default: throw RangeError(std::string("basis character '") + c + "' not in {0, 1, -}");
    }
  }
  return b;
}

std::string to_string(const BasisString& b) {
  std::string s;
  for (const auto x : b) s += x == Basis::Z ? '0' : x == Basis::X ? '1' : '-';
  return s;
}

std::string to_string(const MeasurementRecord& m) {
  std::string s;
  for (const auto x : m) s += x == Outcome::Zero ? '0' : x == Outcome::One ? '1' : '-';
  return s;
}

MeasureResult measure(const BasisString& basis, const RealState& state, Rng& rng) {
  const int n = state.num_qubits();
  if (static_cast<int>(basis.size()) != n) {
    throw DimensionMismatch("basis has " + std::to_string(basis.size()) + " entries for " + std::to_string(n) +
                            " qubits");
  }
  VecX a = state.amplitudes();
  for (int q = 1; q <= n; ++q)
    if (basis[q - 1] == Basis::X) hadamard(a, qubit_mask(n, q));

  MeasurementRecord record(n, Outcome::None);
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (int q = 1; q <= n; ++q) {
    if (basis[q - 1] == Basis::None) continue;
    const std::uint64_t m = qubit_mask(n, q);
    double p1 = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i)
      if (i & m) p1 += a[static_cast<Index>(i)] * a[static_cast<Index>(i)];
    const bool one = rng.uniform() < p1;
    record[q - 1] = one ? Outcome::One : Outcome::Zero;
    for (std::uint64_t i = 0; i < dim; ++i)
      if (((i & m) != 0) != one) a[static_cast<Index>(i)] = 0.0;
    a.normalize();
  }

  for (int q = 1; q <= n; ++q)
    if (basis[q - 1] == Basis::X) hadamard(a, qubit_mask(n, q));
  return {std::move(record), RealState::normalized(std::move(a))};
}

MeasureResult measure(const BasisString& basis, const RealState& state, std::uint64_t seed) {
  Rng rng(seed);
  return measure(basis, state, rng);
}

std::map<std::string, double> outcome_distribution(const BasisString& basis, const RealState& state) {
  const int n = state.num_qubits();
  if (static_cast<int>(basis.size()) != n) throw DimensionMismatch("basis length differs from qubit count");
  std::vector<int> measured;
  for (int q = 1; q <= n; ++q)
    if (basis[q - 1] != Basis::None) measured.push_back(q);
  if (measured.size() > 20) throw TooLarge("outcome_distribution: more than 20 measured qubits");

  VecX a = state.amplitudes();
  for (const int q : measured)
    if (basis[q - 1] == Basis::X) hadamard(a, qubit_mask(n, q));

  const std::size_t m = measured.size();
  std::vector<double> probs(std::size_t{1} << m, 0.0);
  const auto dim = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    std::size_t key = 0;
    for (const int q : measured) key = (key << 1) | ((i & qubit_mask(n, q)) ? 1 : 0);
    probs[key] += a[static_cast<Index>(i)] * a[static_cast<Index>(i)];
  }
  std::map<std::string, double> out;
  for (std::size_t key = 0; key < probs.size(); ++key) {
    std::string s(m, '0');
    for (std::size_t j = 0; j < m; ++j)
      if (key & (std::size_t{1} << (m - 1 - j))) s[j] = '1';
    out.emplace(std::move(s), probs[key]);
  }
  return out;
}

double word_expectation(const RealState& state, const PauliWord& word) {
  if (word.num_qubits() != state.num_qubits()) throw DimensionMismatch("word and state registers differ");
  const std::uint64_t x = word.x_mask();
  const std::uint64_t z = word.z_mask();
  const auto& a = state.amplitudes();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(a.size()); ++i) {
    const double sign = (__builtin_popcountll(i & z) & 1) ? -1.0 : 1.0;
    acc += sign * a[static_cast<Index>(i ^ x)] * a[static_cast<Index>(i)];
  }
  return acc;
}

double expectation(const RealState& state, const Hamiltonian& h) {
  if (h.num_qubits() != state.num_qubits()) {
    throw DimensionMismatch("Hamiltonian on " + std::to_string(h.num_qubits()) + " qubits, state on " +
                            std::to_string(state.num_qubits()));
  }
  double acc = 0.0;
  for (const auto& t : h.terms()) acc += t.coeff * word_expectation(state, t.word);
  return acc;
}

double probability_one(const RealState& state, int qubit) {
  const int n = state.num_qubits();
  if (qubit < 1 || qubit > n) throw IndexOutOfRange("probability_one: qubit out of range");
  const std::uint64_t m = qubit_mask(n, qubit);
  double p = 0.0;
  const auto& a = state.amplitudes();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(a.size()); ++i)
    if (i & m) p += a[static_cast<Index>(i)] * a[static_cast<Index>(i)];
  return p;
}

QuantumCircuit read_circuit(std::istream& is, const std::string& source) {
  QuantumCircuit c;
  bool have_qubits = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(trim_comment(line));
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "qubits" || head == "ancillas") {
      int v = -1;
      if (!(ls >> v) || v < 0) throw ParseError(source, lineno, "bad value for `" + head + "`");
      if (head == "qubits") {
        if (v > kMaxQubits) throw ParseError(source, lineno, "more than 20 qubits");
        c.num_qubits = v;
        have_qubits = true;
      } else {
        c.ancilla_count = v;
      }
      continue;
    }
    const auto kind = parse_gate_kind(head);
    if (!kind) throw ParseError(source, lineno, "unsupported gate '" + head + "'");
    if (!have_qubits) throw ParseError(source, lineno, "gate before `qubits` header");
    std::vector<int> qs;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        qs.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad qubit index '" + tok + "'");
      }
    }
    try {
      Gate g = make_gate(*kind, std::move(qs));
      for (const int q : g.qubits)
        if (q > c.num_qubits) throw IndexOutOfRange("qubit " + std::to_string(q) + " exceeds register");
      c.gates.push_back(std::move(g));
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (!have_qubits) throw ParseError(source, lineno, "missing `qubits` header");
  if (c.ancilla_count > c.num_qubits) throw ParseError(source, lineno, "more ancillas than qubits");
  return c;
}

void write_circuit(std::ostream& os, const QuantumCircuit& circuit) {
  os << "qubits " << circuit.num_qubits << '\n';
  os << "ancillas " << circuit.ancilla_count << '\n';
  for (const auto& g : circuit.gates) {
    os << gate_name(g.kind);
    for (const int q : g.qubits) os << ' ' << q;
    os << '\n';
  }
}

RealState read_state(std::istream& is, const std::string& source) {
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(trim_comment(line));
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad amplitude '" + tok + "'");
      }
    }
  }
  VecX v = Eigen::Map<VecX>(values.data(), static_cast<Index>(values.size()));
  try {
    return RealState::from_amplitudes(std::move(v));
  } catch (const Error& e) {
    throw ParseError(source, lineno, e.what());
  }
}

void write_state(std::ostream& os, const RealState& state) {
  char buf[40];
  for (Index i = 0; i < state.dimension(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", state[i]);
    os << buf << '\n';
  }
}

}  // namespace qarg
