#include <cmath>
#include <set>

#include "doctest.h"
#include "oracle.hpp"
#include "qarg/commit.hpp"

using namespace qarg;

namespace {

BasisString basis_of(int bits, int n) {
  BasisString b(n);
  for (int i = 0; i < n; ++i) b[i] = (bits >> (n - 1 - i)) & 1 ? Basis::X : Basis::Z;
  return b;
}

std::string basis_text(const BasisString& b) {
  std::string s;
  for (const Basis x : b) s += x == Basis::X ? '1' : '0';
  return s;
}

RealState plus() { return run_circuit(QuantumCircuit{1, 0, {make_gate(GateKind::H, {1})}}, RealState(1)); }

}  // namespace

TEST_CASE("key generation") {
  const KeyPair a = gen(16, 7);
  const KeyPair b = gen(16, 7);
  CHECK(a.pk == b.pk);
  CHECK(a.sk == b.sk);
  CHECK(a.pk.size() == kKeyBytes);
  CHECK(public_key_of(a.sk) == a.pk);
  CHECK(gen(17, 7).sk != a.sk);
  CHECK_THROWS_AS(gen(8, 7), RangeError);

  std::set<Bytes> sks;
  for (std::uint64_t s = 0; s < 1000; ++s) sks.insert(gen(16, s).sk);
  CHECK(sks.size() == 1000);
}

TEST_CASE("pinned tag-scheme vectors") {
  // Reference values from an independent BLAKE2b implementation.
  const KeyPair kp = gen(16, 1);
  CHECK(to_hex(kp.sk) == "5a32ccce747aae2901dda58404ccc480a75eeeac5164f0cd203ce0ca53d18060");
  CHECK(to_hex(kp.pk) == "3df42d16f90d5d3e296f8780ca2f8ffa57645439fb600188f574033cb66fca31");
  // Commitment to l = 3 under nonce 00..0f, and the entry (j = 2, X, 0).
  const Bytes y = from_hex("000102030405060708090a0b0c0d0e0f000000031b05b2349906ec7aae08385287171261");
  const OpenRequest req{{2}, parse_basis("1")};
  const Bytes z = from_hex("00404353a271eb33bfed9754e72c49b8ad");
  CHECK(verify(kp.sk, y, req, z));
  CHECK(to_string(out(kp.sk, y, req, z)) == "0");
}

TEST_CASE("pk size does not depend on the committed length") {
  Rng rng(601);
  const KeyPair kp = gen(16, 3);
  for (const int l : {4, 64}) {
    std::vector<RealState> blocks(static_cast<std::size_t>(l / 4), RealState(4));
    const Commitment c = commit_ref(kp.pk, ProductState(blocks), rng);
    CHECK(kp.pk.size() == kKeyBytes);
    CHECK(c.y.size() == kCommitmentBytes);
  }
}

TEST_CASE("honest openings of basis states") {
  Rng rng(607);
  const KeyPair kp = gen(16, 11);
  Commitment c = commit_ref(kp.pk, ProductState(RealState(5)), rng);
  const OpenRequest req = open_all(parse_basis("00000"));
  const Bytes z = open_ref(c.residual, req, rng);
  CHECK(z.size() == 5 * kEntryBytes);
  CHECK(verify(kp.sk, c.y, req, z));
  CHECK(to_string(out(kp.sk, c.y, req, z)) == "00000");

  for (int t = 0; t < 20; ++t) {
    Commitment p = commit_ref(kp.pk, ProductState(plus()), rng);
    const OpenRequest rx = open_all(parse_basis("1"));
    CHECK(to_string(out(kp.sk, p.y, rx, open_ref(p.residual, rx, rng))) == "0");
  }
}

TEST_CASE("Real experiment law equals the outcome law of sigma for every basis") {
  Rng rng(613);
  for (int n = 1; n <= 4; ++n) {
    const RealState sigma = RealState::random(n, rng);
    for (int bits = 0; bits < (1 << n); ++bits) {
      const BasisString b = basis_of(bits, n);
      const auto real = real_distribution_exact(16, b, ProductState(sigma), 5);
      CHECK(real.count("bot") == 0);
      CHECK(total_variation(real, oracle::outcome_law(basis_text(b), sigma.amplitudes())) < 1e-9);
    }
  }
}

TEST_CASE("Real law on a product of blocks equals the law of the dense state") {
  Rng rng(617);
  const RealState a = RealState::random(2, rng), b = RealState::random(1, rng);
  const ProductState sigma({a, b});
  const RealState dense = a.tensor(b);
  CHECK((sigma.dense().amplitudes() - dense.amplitudes()).norm() == 0.0);
  for (int bits = 0; bits < 8; ++bits) {
    const BasisString basis = basis_of(bits, 3);
    CHECK(total_variation(real_distribution_exact(16, basis, sigma, 1),
                          oracle::outcome_law(basis_text(basis), dense.amplitudes())) < 1e-9);
  }
}

TEST_CASE("opening disjoint sets in sequence matches opening jointly") {
  Rng rng(619);
  const RealState a = RealState::random(2, rng), b = RealState::random(2, rng);
  const ProductState sigma({a, b});
  const KeyPair kp = gen(16, 2);
  const BasisString basis = parse_basis("1010");
  std::map<std::string, double> joint, split;
  const std::size_t n = 40000;
  for (std::size_t t = 0; t < n; ++t) {
    Commitment c1 = commit_ref(kp.pk, sigma, rng);
    const OpenRequest all = open_all(basis);
    joint[to_string(out(kp.sk, c1.y, all, open_ref(c1.residual, all, rng)))] += 1.0 / n;

    Commitment c2 = commit_ref(kp.pk, sigma, rng);
    const OpenRequest first{{3, 1}, {basis[2], basis[0]}};
    const OpenRequest second{{4, 2}, {basis[3], basis[1]}};
    const auto m1 = out(kp.sk, c2.y, first, open_ref(c2.residual, first, rng));
    const auto m2 = out(kp.sk, c2.y, second, open_ref(c2.residual, second, rng));
    const MeasurementRecord m{m1[1], m2[1], m1[0], m2[0]};
    split[to_string(m)] += 1.0 / n;
  }
  const auto exact = oracle::outcome_law("1010", sigma.dense().amplitudes());
  CHECK(total_variation(joint, exact) < 0.02);
  CHECK(total_variation(split, exact) < 0.02);
}

TEST_CASE("opened entries cover exactly the requested indices") {
  Rng rng(631);
  const KeyPair kp = gen(16, 4);
  Commitment c = commit_ref(kp.pk, ProductState(RealState::random(4, rng)), rng);
  const OpenRequest req{{3, 1}, parse_basis("10")};
  const Bytes z = open_ref(c.residual, req, rng);
  CHECK(z.size() == 2 * kEntryBytes);
  CHECK(c.residual.opened == std::set<int>{1, 3});
  CHECK(verify(kp.sk, c.y, req, z));
  CHECK_THROWS_AS(open_ref(c.residual, OpenRequest{{1}, parse_basis("0")}, rng), InvalidIndex);
  CHECK_THROWS_AS(open_ref(c.residual, OpenRequest{{5}, parse_basis("0")}, rng), InvalidIndex);
  CHECK_THROWS_AS(open_ref(c.residual, OpenRequest{{2, 2}, parse_basis("00")}, rng), InvalidIndex);
}

TEST_CASE("verify rejects malformed and forged openings") {
  Rng rng(641);
  const KeyPair kp = gen(16, 5);
  Commitment c = commit_ref(kp.pk, ProductState(RealState::random(8, rng)), rng);
  const OpenRequest req = open_all(parse_basis("01100101"));
  const Bytes z = open_ref(c.residual, req, rng);
  REQUIRE(verify(kp.sk, c.y, req, z));

  CHECK_FALSE(verify(kp.sk, c.y, req, Bytes(z.begin(), z.end() - 1)));
  CHECK_FALSE(verify(kp.sk, c.y, req, Bytes{}));
  for (std::size_t i = 0; i < 8; ++i) {
    Bytes flipped = z;
    flipped[i * kEntryBytes] ^= 1;
    CHECK_FALSE(verify(kp.sk, c.y, req, flipped));
    Bytes forged = z;
    forged[i * kEntryBytes + 5] ^= 0x40;
    CHECK_FALSE(verify(kp.sk, c.y, req, forged));
  }
  Bytes bad_y = c.y;
  bad_y[0] ^= 1;
  CHECK_FALSE(verify(kp.sk, bad_y, req, z));
  CHECK_FALSE(verify(gen(16, 6).sk, c.y, req, z));
  OpenRequest other_basis = req;
  other_basis.bases[0] = Basis::X;
  CHECK_FALSE(verify(kp.sk, c.y, other_basis, z));
}

TEST_CASE("y does not depend on sigma") {
  Rng rng(643);
  const KeyPair kp = gen(16, 9);
  const RealState s1 = RealState::random(3, rng), s2 = RealState::random(3, rng);
  Rng r1(77), r2(77);
  CHECK(commit_ref(kp.pk, ProductState(s1), r1).y == commit_ref(kp.pk, ProductState(s2), r2).y);
  const SeedBundle seeds = SeedBundle::derive(3, 0);
  HonestCommitter h;
  CHECK(real_experiment(h, 16, parse_basis("000"), ProductState(s1), seeds).y ==
        real_experiment(h, 16, parse_basis("000"), ProductState(s2), seeds).y);
}

TEST_CASE("experiment outcomes by strategy") {
  Rng rng(647);
  const ProductState sigma(RealState::random(3, rng));
  const BasisString b = parse_basis("101");
  HonestCommitter honest;
  RefusingCommitter refuse;
  for (std::uint64_t run = 0; run < 10000; ++run) {
    const auto o = real_experiment(honest, 16, b, sigma, SeedBundle::derive(1, run));
    REQUIRE(o.m.has_value());
    CHECK(o.m->size() == 3);
  }
  for (std::uint64_t run = 0; run < 200; ++run) CHECK(real_experiment(refuse, 16, b, sigma, SeedBundle::derive(2, run)).key() == "bot");
  const auto o = real_experiment(honest, 16, b, sigma, SeedBundle::derive(4, 0));
  CHECK(o.pk.size() == kKeyBytes);
  CHECK(o.y.size() == kCommitmentBytes);
  CHECK(o.b == b);
  CHECK(make_committer("nope") == nullptr);
  CHECK(make_committer("basis-flipper")->name() == "basis-flipper");
}

TEST_CASE("Ideal experiment with the reference extractor") {
  Rng rng(653);
  const RealState sigma = RealState::random(3, rng);
  HonestCommitter honest;
  for (int bits = 0; bits < 8; ++bits) {
    const BasisString b = basis_of(bits, 3);
    const auto exact = oracle::outcome_law(basis_text(b), sigma.amplitudes());
    std::map<std::string, double> ideal;
    const std::size_t n = 20000;
    for (std::uint64_t run = 0; run < n; ++run)
      ideal[ideal_experiment(honest, reference_extractor, 16, b, ProductState(sigma), SeedBundle::derive(bits, run)).key()] +=
          1.0 / n;
    CHECK(total_variation(ideal, exact) < 0.02);
  }
  Commitment bare;
  CHECK_THROWS_AS(reference_extractor({}, {}, bare), ExtractorUnavailable);
}

TEST_CASE("honest binding: delta is zero and Real is close to Ideal") {
  Rng rng(659);
  HonestCommitter honest;
  const ProductState sigma(RealState::random(3, rng));
  const BindingReport r = binding_experiment(honest, 16, parse_basis("011"), sigma, 100000, 2000, 17);
  CHECK(r.delta.delta_hat == 0.0);
  CHECK(r.delta.per_basis.size() == 3);
  CHECK(r.tv <= 0.01);
  CHECK(r.real.count("bot") == 0);
}

TEST_CASE("refusing and flipping committers stay within the binding bound") {
  Rng rng(661);
  const ProductState sigma(RealState::random(3, rng));
  RefusingCommitter partial(0.2);
  const BindingReport rp = binding_experiment(partial, 16, parse_basis("110"), sigma, 20000, 4000, 19);
  CHECK(rp.delta.delta_hat == doctest::Approx(0.2).epsilon(0.15));
  CHECK(rp.real.at("bot") == doctest::Approx(0.2).epsilon(0.1));
  CHECK(rp.within_bound());

  BasisFlipper flipper(0.5);
  const BindingReport rf = binding_experiment(flipper, 16, parse_basis("110"), sigma, 20000, 4000, 23);
  // The all-Z basis has nothing to flip; the other two reject half the time.
  CHECK(rf.delta.delta_hat == doctest::Approx(0.5).epsilon(0.1));
  CHECK(rf.within_bound());
}

TEST_CASE("hex helpers") {
  CHECK(to_hex(Bytes{0x00, 0xab, 0x10}) == "00ab10");
  CHECK(from_hex("00ab10") == Bytes{0x00, 0xab, 0x10});
  CHECK(from_hex("").empty());
  CHECK_THROWS_AS(from_hex("0g"), RangeError);
  CHECK_THROWS_AS(from_hex("abc"), RangeError);
}
