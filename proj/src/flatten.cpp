#include "qarg/flatten.hpp"

#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qarg/mf.hpp"
#include "qarg/stats.hpp"

namespace qarg {

namespace {

std::vector<int> range(int first, int count) {
  std::vector<int> v(count);
  for (int i = 0; i < count; ++i) v[i] = first + i;
  return v;
}

std::vector<int> concat(std::initializer_list<std::vector<int>> parts) {
  std::vector<int> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void append_gates(QuantumCircuit& dst, const QuantumCircuit& local, const std::vector<int>& mapping) {
  const QuantumCircuit g = remap(local, dst.num_qubits, mapping);
  dst.gates.insert(dst.gates.end(), g.gates.begin(), g.gates.end());
}

bool changes_populations(const Gate& g, int qubit) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::X: return g.qubits[0] == qubit;
    case GateKind::CNOT:
    case GateKind::CCX: return g.qubits.back() == qubit;
    default: return false;
  }
}

// Multi-controlled X from CCX gates, with controls.size() - 2 work qubits
// that start and end in |0>.
void multi_controlled_x(QuantumCircuit& c, const std::vector<int>& controls, int target, const std::vector<int>& work) {
  const std::size_t n = controls.size();
  if (n == 1) {
    c.gates.push_back(make_gate(GateKind::CNOT, {controls[0], target}));
    return;
  }
  if (n == 2) {
    c.gates.push_back(make_gate(GateKind::CCX, {controls[0], controls[1], target}));
    return;
  }
  std::vector<Gate> compute;
  compute.push_back(make_gate(GateKind::CCX, {controls[0], controls[1], work[0]}));
  for (std::size_t i = 2; i + 1 < n; ++i) compute.push_back(make_gate(GateKind::CCX, {work[i - 2], controls[i], work[i - 1]}));
  c.gates.insert(c.gates.end(), compute.begin(), compute.end());
  c.gates.push_back(make_gate(GateKind::CCX, {work[n - 3], controls[n - 1], target}));
  c.gates.insert(c.gates.end(), compute.rbegin(), compute.rend());
}

// Moves old qubit q to dest[q - 1].
RealState permute_qubits(const RealState& s, const std::vector<int>& dest) {
  const int n = s.num_qubits();
  VecX out(s.dimension());
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(s.dimension()); ++i) {
    std::uint64_t j = 0;
    for (int q = 1; q <= n; ++q)
      if (i & qubit_mask(n, q)) j |= qubit_mask(n, dest[q - 1]);
    out[static_cast<Index>(j)] = s[static_cast<Index>(i)];
  }
  return RealState::from_amplitudes(std::move(out));
}

}  // namespace

void PublicCoinQIP::validate() const {
  if (reg_a < 0 || reg_b < 0 || reg_c < 0 || rand_len < 0) throw LayoutError("negative register size");
  if (u1.num_qubits != reg_a + reg_b + reg_c) throw LayoutError("u1 must act on |A| + |B| + |C| qubits");
  if (u2.num_qubits != rand_len + reg_b + reg_c) throw LayoutError("u2 must act on |R| + |B| + |C| qubits");
  if (v2.ancilla_count < 1) throw LayoutError("v2 needs at least the output ancilla");
  if (v2.num_qubits != rand_len + reg_a + reg_b + reg_d() + 1) {
    throw LayoutError("v2 must act on |R| + |A| + |B| + |D| + 1 qubits");
  }
  if (total_qubits() > kMaxQubits) throw TooLarge("flattened verifier exceeds 20 qubits");
  u1.validate();
  u2.validate();
  v2.validate();
  for (const auto* c : {&u2, &v2})
    for (const auto& g : c->gates)
      for (int q = 1; q <= rand_len; ++q)
        if (changes_populations(g, q)) throw LayoutError("u2 and v2 may use R only as a control");
}

FlattenedVerifier flatten(const PublicCoinQIP& qip) {
  qip.validate();
  const int a = qip.reg_a, b = qip.reg_b, c = qip.reg_c, r = qip.rand_len, d = qip.reg_d();
  const int w = a + b + c;
  const int n = qip.total_qubits();
  const auto A = range(1, a), B = range(a + 1, b), C = range(a + b + 1, c);
  const auto R = range(w + 1, r), D = range(w + r + 1, d);
  const std::vector<int> O{n};

  FlattenedVerifier f;
  f.circuit = QuantumCircuit{n, r + d + 1, {}};
  for (const int q : R) f.circuit.gates.push_back(make_gate(GateKind::H, {q}));
  append_gates(f.circuit, qip.u1, concat({A, B, C}));
  append_gates(f.circuit, qip.u2, concat({R, B, C}));
  append_gates(f.circuit, qip.v2, concat({R, A, B, D, O}));
  f.circuit.validate();
  f.witness_qubits = range(1, w);
  f.ancilla_qubits = range(w + 1, r + d + 1);
  f.output_qubit = n;
  return f;
}

double interactive_accept_prob(const PublicCoinQIP& qip, const RealState& aux) {
  qip.validate();
  if (qip.rand_len > 12) throw TooManyCoins("at most 12 coins can be enumerated");
  if (aux.num_qubits() != qip.witness_qubits()) throw DimensionMismatch("aux must cover A, B and C");
  const int a = qip.reg_a, b = qip.reg_b, c = qip.reg_c, r = qip.rand_len, d = qip.reg_d();
  const int w = a + b + c;
  const int n = qip.total_qubits();
  // Coins first: R, A, B, C, D, O.
  const auto R = range(1, r), A = range(r + 1, a), B = range(r + a + 1, b), C = range(r + a + b + 1, c);
  const auto D = range(r + w + 1, d);
  const std::vector<int> O{n};
  QuantumCircuit run{n, d + 1, {}};
  append_gates(run, qip.u1, concat({A, B, C}));
  append_gates(run, qip.u2, concat({R, B, C}));
  append_gates(run, qip.v2, concat({R, A, B, D, O}));

  const RealState tail = RealState(d + 1);
  double total = 0.0;
  const std::uint64_t coins = std::uint64_t{1} << r;
  for (std::uint64_t x = 0; x < coins; ++x) {
    const RealState in = RealState::basis(r, x).tensor(aux).tensor(tail);
    total += probability_one(run_circuit(run, in), n);
  }
  return total / static_cast<double>(coins);
}

double acceptance(const QuantumCircuit& verifier, const RealState& witness) {
  if (witness.num_qubits() != verifier.witness_qubits()) {
    throw DimensionMismatch("witness has " + std::to_string(witness.num_qubits()) + " qubits, verifier expects " +
                            std::to_string(verifier.witness_qubits()));
  }
  const RealState in = witness.tensor(RealState(verifier.ancilla_count));
  return probability_one(run_circuit(verifier, in), verifier.output_qubit());
}

MatX accept_operator(const QuantumCircuit& verifier) {
  verifier.validate();
  const int w = verifier.witness_qubits();
  if (w > 10) throw TooLarge("accept_operator: more than 10 witness qubits");
  const int n = verifier.num_qubits;
  const Index dim_w = Index{1} << w;
  const Index dim = Index{1} << n;
  MatX accepted = MatX::Zero(dim / 2, dim_w);
  for (Index j = 0; j < dim_w; ++j) {
    VecX v = VecX::Zero(dim);
    v[j << verifier.ancilla_count] = 1.0;
    for (const auto& g : verifier.gates) apply_gate_inplace(v, n, g);
    // The output is the last qubit, so odd indices are the accepting ones.
    for (Index i = 0; i < dim / 2; ++i) accepted(i, j) = v[2 * i + 1];
  }
  return accepted.transpose() * accepted;
}

BestWitness best_witness(const QuantumCircuit& verifier) {
  const MatX m = accept_operator(verifier);
  const Eigen::SelfAdjointEigenSolver<MatX> es(m);
  const Index top = m.rows() - 1;
  VecX v = es.eigenvectors().col(top);
  // Sign convention: largest-magnitude amplitude positive.
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0) v = -v;
  return {RealState::normalized(std::move(v)), es.eigenvalues()[top]};
}

AmplificationReport threshold_amplify(double c, double s, std::size_t k) {
  if (!(c > s)) throw GapNonpositive("threshold amplification needs c > s");
  if (c > 1.0 || s < 0.0) throw RangeError("c and s must lie in [0, 1]");
  AmplificationReport rep{};
  rep.c = c;
  rep.s = s;
  rep.k = k;
  rep.tau = 0.5 * (c + s);
  rep.threshold = threshold_count(k, rep.tau);
  const double e = std::exp(-static_cast<double>(k) * (c - s) * (c - s) / 2.0);
  rep.completeness_bound = 1.0 - e;
  rep.soundness_bound = e;
  rep.exact_yes = binomial_tail(k, c, rep.threshold);
  rep.exact_no = binomial_tail(k, s, rep.threshold);
  return rep;
}

double chernoff(double p, double eps, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("chernoff: p outside [0, 1]");
  if (!(eps > 0.0)) throw RangeError("chernoff: eps must be positive");
  return std::exp(-2.0 * eps * eps * static_cast<double>(n));
}

PublicCoinQIP threshold_product(const PublicCoinQIP& qip, int k, double tau) {
  qip.validate();
  if (k < 1 || k > 4) throw RangeError("threshold_product supports 1 to 4 copies");
  if (!(tau >= 0.0 && tau <= 1.0)) throw RangeError("threshold must lie in [0, 1]");
  const int a = qip.reg_a, b = qip.reg_b, c = qip.reg_c, r = qip.rand_len, d = qip.reg_d();

  PublicCoinQIP out;
  out.reg_a = k * a;
  out.reg_b = k * b;
  out.reg_c = k * c;
  out.rand_len = k * r;
  const int d_out = k * d + k + 2;
  const int n2 = out.rand_len + out.reg_a + out.reg_b + d_out + 1;
  if (k * qip.witness_qubits() + out.rand_len + d_out + 1 > kMaxQubits) {
    throw TooLarge("threshold product exceeds 20 qubits");
  }
  out.u1 = QuantumCircuit{out.reg_a + out.reg_b + out.reg_c, 0, {}};
  out.u2 = QuantumCircuit{out.rand_len + out.reg_b + out.reg_c, 0, {}};
  out.v2 = QuantumCircuit{n2, d_out + 1, {}};

  const int base_d = out.rand_len + out.reg_a + out.reg_b;
  std::vector<int> outputs;
  for (int i = 0; i < k; ++i) {
    const auto A1 = range(i * a + 1, a), B1 = range(out.reg_a + i * b + 1, b),
               C1 = range(out.reg_a + out.reg_b + i * c + 1, c);
    append_gates(out.u1, qip.u1, concat({A1, B1, C1}));

    const auto R2 = range(i * r + 1, r), B2 = range(out.rand_len + i * b + 1, b),
               C2 = range(out.rand_len + out.reg_b + i * c + 1, c);
    append_gates(out.u2, qip.u2, concat({R2, B2, C2}));

    const auto R3 = range(i * r + 1, r), A3 = range(out.rand_len + i * a + 1, a),
               B3 = range(out.rand_len + out.reg_a + i * b + 1, b), D3 = range(base_d + i * d + 1, d);
    const int o = base_d + k * d + i + 1;
    outputs.push_back(o);
    append_gates(out.v2, qip.v2, concat({R3, A3, B3, D3, {o}}));
  }
  const std::vector<int> work{base_d + k * d + k + 1, base_d + k * d + k + 2};
  const std::size_t m = threshold_count(static_cast<std::size_t>(k), tau);
  // Minterms with at least m ones are disjoint, so XOR-ing them into O is an OR.
  for (unsigned x = 0; x < (1u << k); ++x) {
    if (static_cast<std::size_t>(std::popcount(x)) < m) continue;
    std::vector<Gate> flips;
    for (int i = 0; i < k; ++i)
      if (!((x >> (k - 1 - i)) & 1)) flips.push_back(make_gate(GateKind::X, {outputs[i]}));
    out.v2.gates.insert(out.v2.gates.end(), flips.begin(), flips.end());
    multi_controlled_x(out.v2, outputs, n2, work);
    out.v2.gates.insert(out.v2.gates.end(), flips.begin(), flips.end());
  }
  out.validate();
  return out;
}

RealState product_witness(const PublicCoinQIP& qip, const RealState& aux, int k) {
  if (aux.num_qubits() != qip.witness_qubits()) throw DimensionMismatch("aux must cover A, B and C");
  if (k < 1) throw RangeError("need at least one copy");
  const int a = qip.reg_a, b = qip.reg_b, c = qip.reg_c, w = a + b + c;
  RealState s = aux;
  for (int i = 1; i < k; ++i) s = s.tensor(aux);
  std::vector<int> dest(k * w);
  for (int i = 0; i < k; ++i) {
    for (int j = 1; j <= a; ++j) dest[i * w + j - 1] = i * a + j;
    for (int j = 1; j <= b; ++j) dest[i * w + a + j - 1] = k * a + i * b + j;
    for (int j = 1; j <= c; ++j) dest[i * w + a + b + j - 1] = k * (a + b) + i * c + j;
  }
  return permute_qubits(s, dest);
}

}  // namespace qarg
