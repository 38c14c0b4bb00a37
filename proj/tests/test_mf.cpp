#include <cmath>
#include <set>

#include "doctest.h"
#include "oracle.hpp"
#include "qarg/clock.hpp"
#include "qarg/mf.hpp"
#include "qarg/stats.hpp"

using namespace qarg;

namespace {

PauliWord word(int n, std::initializer_list<std::pair<int, Letter>> ls) {
  PauliWord w(n);
  for (const auto& [q, l] : ls) w.set(q, l);
  return w;
}

// Random Hamiltonian of at most `max_local`-local Y-free words on qubits 1..q.
Hamiltonian random_h(int q, int terms, int max_local, Rng& rng) {
  Hamiltonian h(q);
  for (int t = 0; t < terms; ++t) {
    PauliWord w(q);
    const int loc = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_local)));
    for (int i = 0; i < loc; ++i) w.set(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(q))), rng.bit() ? Letter::X : Letter::Z);
    h.add(rng.normal(), w);
  }
  return h;
}

// Acceptance law of decide from Pauli expectations on the dense oracle:
// sum_k w_k (1 - sign(d_k) <P_k>) / 2.
double decide_oracle(const Hamiltonian& canonical, const RealState& psi) {
  const double norm = canonical.one_norm();
  double p = 0.0;
  for (const auto& t : canonical.terms()) {
    const double ev = psi.amplitudes().dot(oracle::word(t.word) * psi.amplitudes());
    p += std::abs(t.coeff) / norm * 0.5 * (1.0 - (t.coeff > 0 ? ev : -ev));
  }
  return p;
}

RandomnessTape tape_with_prefix(const MFSampler& s, const std::string& prefix) {
  std::vector<std::uint8_t> bits(s.tape_length(), 0);
  for (std::size_t i = 0; i < prefix.size(); ++i) bits[i] = prefix[i] == '1';
  return RandomnessTape(bits);
}

BasisString uniform_basis(int q, Rng& rng) {
  BasisString b(q);
  for (auto& x : b) x = rng.bit() ? Basis::X : Basis::Z;
  return b;
}

}  // namespace

TEST_CASE("decide examples") {
  Hamiltonian h(6);
  h.add(1.0, word(6, {{1, Letter::Z}}));
  h.add(-1.0, word(6, {{2, Letter::X}, {3, Letter::Z}}));
  MeasurementRecord m(6, Outcome::None);
  m[0] = Outcome::Zero;
  CHECK_FALSE(decide(h, 0, m));
  m[0] = Outcome::One;
  CHECK(decide(h, 0, m));
  m[1] = Outcome::One;
  m[2] = Outcome::Zero;
  CHECK_FALSE(decide(h, 1, m));
  m[2] = Outcome::One;
  CHECK(decide(h, 1, m));
  m[2] = Outcome::None;
  CHECK_THROWS_AS(decide(h, 1, m), MissingOutcome);
  CHECK_THROWS_AS(decide(h, 2, m), IndexOutOfRange);
}

TEST_CASE("acceptance laws") {
  CHECK(mf_acceptance_law(0.0, 1.0) == 0.5);
  CHECK(mf_acceptance_law(1.0, 1.0) == 0.0);
  CHECK(vmf_acceptance_law(0.0, 1.0) == 127.0 / 128.0);
  CHECK(vmf_acceptance_law(1.0, 1.0) == 126.0 / 128.0);
  CHECK(vmf_acceptance_law(-1.0, 1.0) == 1.0);
}

TEST_CASE("threshold rule") {
  CHECK(threshold_count(64, 0.5) == 32);
  CHECK(threshold_count(10, 0.3) == 3);
  CHECK(threshold_count(3, 0.5) == 2);
  CHECK(threshold_count(5, 0.0) == 0);
  CHECK(threshold_vmf({true, true, false, false}, 0.5));
  CHECK_FALSE(threshold_vmf({true, false, false, false}, 0.5));
  CHECK(threshold_vmf({}, 0.9));
}

TEST_CASE("sampler construction errors") {
  CHECK_THROWS_AS(MFSampler(Hamiltonian(6)), EmptyHamiltonian);
  Hamiltonian small(5);
  small.add(1.0, word(5, {{1, Letter::Z}}));
  CHECK_THROWS_AS(MFSampler{small}, PaddingExhausted);
  Hamiltonian wide(7);
  PauliWord w(7);
  for (int q = 1; q <= 7; ++q) w.set(q, Letter::Z);
  wide.add(1.0, w);
  CHECK_THROWS_AS(MFSampler{wide}, RangeError);
  Hamiltonian cancel(6);
  cancel.add(1.0, word(6, {{1, Letter::Z}}));
  cancel.add(-1.0, word(6, {{1, Letter::Z}}));
  CHECK_THROWS_AS(MFSampler{cancel}, EmptyHamiltonian);
}

TEST_CASE("tape layout and exact term thresholds") {
  Hamiltonian h(6);
  h.add(3.0, word(6, {{1, Letter::Z}}));
  h.add(-1.0, word(6, {{2, Letter::X}}));
  const MFSampler s(h);
  CHECK(s.term_bits() == 65);
  CHECK(s.position_bits() == 3);
  CHECK(s.tape_length() == 65 + 6 * 4);
  CHECK(s.term_weights()[0] == 0.75);
  CHECK(s.term_weights()[1] == 0.25);
  // The boundary is round(2^65 * 0.75) = 3 * 2^63: "11" then 63 zeros.
  CHECK(s.select_term(tape_with_prefix(s, "10" + std::string(63, '1'))) == 0);
  CHECK(s.select_term(tape_with_prefix(s, "11")) == 1);
  CHECK(s.select_term(tape_with_prefix(s, std::string(65, '1'))) == 1);
  CHECK_THROWS_AS(s.select_term(RandomnessTape(std::vector<std::uint8_t>(10, 0))), DimensionMismatch);

  Hamiltonian one(8);
  one.add(2.0, word(8, {{1, Letter::X}}));
  const MFSampler s1(one);
  CHECK(s1.term_bits() == 64);
  CHECK(s1.tape_length() == 64 + 6 * 4);
}

TEST_CASE("term frequencies follow the weights") {
  Hamiltonian h(6);
  h.add(3.0, word(6, {{1, Letter::Z}}));
  h.add(-1.0, word(6, {{2, Letter::X}}));
  const MFSampler s(h);
  Rng rng(301);
  const std::size_t n = 40000;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n; ++i) zeros += s.select_term(RandomnessTape::random(s.tape_length(), rng)) == 0;
  CHECK(std::abs(z_score(static_cast<double>(zeros) / n, 0.75, n)) < 4.0);
}

TEST_CASE("tape_for_term selects its term") {
  Rng rng(307);
  for (int trial = 0; trial < 20; ++trial) {
    const MFSampler s(random_h(7, 8, 4, rng));
    for (std::size_t k = 0; k < s.hamiltonian().size(); ++k) CHECK(s.select_term(s.tape_for_term(k, rng)) == k);
  }
}

TEST_CASE("sampled bases measure exactly six positions and contain the term") {
  Rng rng(311);
  for (int trial = 0; trial < 200; ++trial) {
    const MFSampler s(random_h(6 + static_cast<int>(rng.below(5)), 6, 6, rng));
    const auto [k, b] = s.sample(RandomnessTape::random(s.tape_length(), rng));
    int measured = 0;
    for (const Basis x : b) measured += x != Basis::None;
    CHECK(measured == kPaddedLocality);
    for (const auto& [q, l] : s.hamiltonian().terms()[k].word.letters())
      CHECK(b[q - 1] == (l == Letter::X ? Basis::X : Basis::Z));
  }
}

TEST_CASE("padding letters are uniform and cover every free qubit") {
  Hamiltonian h(8);
  h.add(1.0, word(8, {{1, Letter::Z}, {2, Letter::X}}));
  const MFSampler s(h);
  Rng rng(313);
  const std::size_t n = 20000;
  std::vector<std::size_t> x_count(8, 0), hit(8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const BasisString b = s.basis_for_term(0, RandomnessTape::random(s.tape_length(), rng));
    for (int q = 2; q < 8; ++q) {
      hit[q] += b[q] != Basis::None;
      x_count[q] += b[q] == Basis::X;
    }
  }
  for (int q = 2; q < 8; ++q) {
    CHECK(hit[q] > 0);
    CHECK(std::abs(z_score(static_cast<double>(x_count[q]) / hit[q], 0.5, hit[q])) < 4.0);
  }
}

TEST_CASE("decide acceptance equals the Pauli-expectation law and ignores padding") {
  Rng rng(317);
  for (int trial = 0; trial < 30; ++trial) {
    // Hamiltonians on at most 4 qubits, embedded in a 6- or 7-qubit register
    // so that padding always has room.
    const int q = 6 + static_cast<int>(rng.below(2));
    const MFSampler s(random_h(q, 1 + static_cast<int>(rng.below(8)), 4, rng));
    const RealState psi = RealState::random(q, rng);
    const double want = decide_oracle(s.hamiltonian(), psi);
    Rng pad_a(1), pad_b(2);
    const double a = exact_decide_acceptance(s, psi, pad_a);
    const double b = exact_decide_acceptance(s, psi, pad_b);
    CHECK(a == doctest::Approx(want).epsilon(1e-10));
    CHECK(b == doctest::Approx(a).epsilon(1e-12));
    const double e = expectation(psi, s.hamiltonian());
    CHECK(a == doctest::Approx(mf_acceptance_law(e, s.hamiltonian().one_norm())).epsilon(1e-10));
  }
}

TEST_CASE("exact wrapper acceptance equals the padded law") {
  Rng rng(331);
  for (int trial = 0; trial < 6; ++trial) {
    const MFSampler s(random_h(6, 1 + static_cast<int>(rng.below(5)), 3, rng));
    const RealState psi = RealState::random(6, rng);
    const double e = expectation(psi, s.hamiltonian());
    Rng pad(trial);
    CHECK(exact_vmf_acceptance(s, psi, pad) ==
          doctest::Approx(vmf_acceptance_law(e, s.hamiltonian().one_norm())).epsilon(1e-10));
  }
}

TEST_CASE("a uniform full basis agrees with the sampled basis with probability 1/64") {
  Hamiltonian h(6);
  h.add(1.0, word(6, {{3, Letter::X}}));
  const MFSampler s(h);
  Rng rng(337);
  const RandomnessTape r = s.tape_for_term(0, rng);
  const BasisString b_hat = s.basis_for_term(0, r);
  int consistent = 0;
  for (int bi = 0; bi < 64; ++bi) {
    BasisString b(6);
    for (int i = 0; i < 6; ++i) b[i] = (bi >> (5 - i)) & 1 ? Basis::X : Basis::Z;
    bool ok = true;
    for (int i = 0; i < 6; ++i) ok = ok && b_hat[i] == b[i];
    consistent += ok;
    // An inconsistent basis accepts whatever the record says.
    if (!ok) CHECK(vmf(s, r, b, MeasurementRecord(6, Outcome::Zero)));
  }
  CHECK(consistent == 1);
}

TEST_CASE("Monte Carlo wrapper acceptance on a history state matches the law") {
  const QuantumCircuit circ{3, 1, {make_gate(GateKind::H, {1}), make_gate(GateKind::CNOT, {1, 3}),
                                   make_gate(GateKind::CZ, {2, 3})}};
  const ClockBundle bundle = compile(circ);
  const MFSampler s(bundle.h_total);
  Rng rng(347);
  const RealState eta = history_state(circ, RealState::random(2, rng).tensor(RealState(1))).state;
  const double law = vmf_acceptance_law(expectation(eta, s.hamiltonian()), s.hamiltonian().one_norm());
  const std::size_t n = 30000;
  std::size_t accepts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const RandomnessTape r = RandomnessTape::random(s.tape_length(), rng);
    const BasisString b = uniform_basis(s.num_qubits(), rng);
    accepts += vmf(s, r, b, measure(b, eta, rng).record);
  }
  CHECK(std::abs(z_score(static_cast<double>(accepts) / n, law, n)) < 4.0);
}

TEST_CASE("randomness tape reads MSB-first") {
  const RandomnessTape t(std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(t.read(0, 4) == 0b1011);
  CHECK(t.read(1, 2) == 0b01);
  CHECK(t.to_string() == "1011");
  CHECK_THROWS_AS(t.read(2, 3), RangeError);
  CHECK_THROWS_AS(RandomnessTape(std::vector<std::uint8_t>{2}), RangeError);
}
