#include "qarg/commit.hpp"

#include <cmath>
#include <string_view>

#include <sodium.h>

#include "sodium_init.hpp"

namespace qarg {

namespace {

Bytes blake2b(std::size_t out_len, const Bytes& key, std::initializer_list<std::pair<const void*, std::size_t>> parts) {
  detail::ensure_sodium();
  crypto_generichash_state st;
  crypto_generichash_init(&st, key.empty() ? nullptr : key.data(), key.size(), out_len);
  for (const auto& [ptr, len] : parts) crypto_generichash_update(&st, static_cast<const unsigned char*>(ptr), len);
  Bytes out(out_len);
  crypto_generichash_final(&st, out.data(), out_len);
  return out;
}

std::array<std::uint8_t, 4> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

std::array<std::uint8_t, 8> be64(std::uint64_t v) {
  std::array<std::uint8_t, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
  return out;
}

constexpr std::string_view kSkLabel = "qarg-sk";
constexpr std::string_view kPkLabel = "qarg-pk";
constexpr std::string_view kTagLabel = "qarg-tag";
constexpr std::string_view kCommitLabel = "commit";
constexpr std::string_view kOpenLabel = "open";

Bytes tag_key(const Bytes& pk) { return blake2b(kKeyBytes, pk, {{kTagLabel.data(), kTagLabel.size()}}); }

Bytes commitment_tag(const Bytes& key, const Bytes& nonce, std::uint32_t ell) {
  const auto l = be32(ell);
  return blake2b(kTagBytes, key,
                 {{kCommitLabel.data(), kCommitLabel.size()}, {nonce.data(), nonce.size()}, {l.data(), l.size()}});
}

Bytes entry_tag(const Bytes& key, const Bytes& nonce, int j, Basis basis, Outcome outcome) {
  const auto jj = be32(static_cast<std::uint32_t>(j));
  const std::uint8_t bb = static_cast<std::uint8_t>(basis);
  const std::uint8_t oo = static_cast<std::uint8_t>(outcome);
  return blake2b(kTagBytes, key,
                 {{kOpenLabel.data(), kOpenLabel.size()},
                  {nonce.data(), nonce.size()},
                  {jj.data(), jj.size()},
                  {&bb, 1},
                  {&oo, 1}});
}

void append_entry(Bytes& z, const Bytes& key, const Bytes& nonce, int j, Basis basis, Outcome outcome) {
  z.push_back(static_cast<std::uint8_t>(outcome));
  const Bytes t = entry_tag(key, nonce, j, basis, outcome);
  z.insert(z.end(), t.begin(), t.end());
}

// Indices in [1, ell], distinct, one measured basis each.
bool well_formed(const OpenRequest& req, int ell) {
  if (req.indices.size() != req.bases.size()) return false;
  std::set<int> seen;
  for (std::size_t i = 0; i < req.indices.size(); ++i) {
    const int j = req.indices[i];
    if (j < 1 || j > ell || !seen.insert(j).second || req.bases[i] == Basis::None) return false;
  }
  return true;
}

void check_request(const Residual& r, const OpenRequest& req) {
  if (!well_formed(req, r.held.num_qubits())) {
    throw InvalidIndex("open request must name distinct indices in [1, " + std::to_string(r.held.num_qubits()) +
                       "] with a Z or X basis each");
  }
  for (const int j : req.indices)
    if (r.opened.count(j)) throw InvalidIndex("index " + std::to_string(j) + " was already opened");
}

std::optional<std::uint32_t> commitment_length(const Bytes& sk, const Bytes& y) {
  if (y.size() != kCommitmentBytes || sk.size() != kKeyBytes) return std::nullopt;
  const Bytes nonce(y.begin(), y.begin() + kNonceBytes);
  const std::uint32_t ell = (std::uint32_t{y[16]} << 24) | (std::uint32_t{y[17]} << 16) |
                            (std::uint32_t{y[18]} << 8) | std::uint32_t{y[19]};
  const Bytes expect = commitment_tag(tag_key(public_key_of(sk)), nonce, ell);
  if (sodium_memcmp(expect.data(), y.data() + kNonceBytes + 4, kTagBytes) != 0) return std::nullopt;
  return ell;
}

void branches(const ProductState& state, const Residual& r, const OpenRequest& req, std::size_t pos, double prob,
              Bytes& z, const Bytes& key, std::vector<std::pair<double, Bytes>>& out) {
  if (pos == req.indices.size()) {
    out.emplace_back(prob, z);
    return;
  }
  const int j = req.indices[pos];
  const double p1 = state.probability_one(j, req.bases[pos]);
  for (const Outcome o : {Outcome::Zero, Outcome::One}) {
    const double p = o == Outcome::One ? p1 : 1.0 - p1;
    if (p <= 0.0) continue;
    ProductState next = state;
    next.project(j, req.bases[pos], o);
    const std::size_t mark = z.size();
    append_entry(z, key, r.nonce, j, req.bases[pos], o);
    branches(next, r, req, pos + 1, prob * p, z, key, out);
    z.resize(mark);
  }
}

}  // namespace

std::string to_hex(const Bytes& b) {
  std::string s(b.size() * 2 + 1, '\0');
  sodium_bin2hex(s.data(), s.size(), b.data(), b.size());
  s.pop_back();
  return s;
}

Bytes from_hex(const std::string& s) {
  Bytes out(s.size() / 2 + 1);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_hex2bin(out.data(), out.size(), s.data(), s.size(), nullptr, &len, &end) != 0 ||
      end != s.data() + s.size()) {
    throw RangeError("malformed hex string");
  }
  out.resize(len);
  return out;
}

KeyPair gen(std::size_t lambda, std::uint64_t seed) {
  if (lambda < kMinLambda) throw RangeError("security parameter must be at least 16");
  const auto s = be64(seed);
  const auto l = be32(static_cast<std::uint32_t>(lambda));
  KeyPair kp;
  kp.sk = blake2b(kKeyBytes, {}, {{kSkLabel.data(), kSkLabel.size()}, {s.data(), s.size()}, {l.data(), l.size()}});
  kp.pk = public_key_of(kp.sk);
  return kp;
}

Bytes public_key_of(const Bytes& sk) { return blake2b(kKeyBytes, sk, {{kPkLabel.data(), kPkLabel.size()}}); }

ProductState::ProductState(std::vector<RealState> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    offsets_.push_back(num_qubits_);
    num_qubits_ += b.num_qubits();
  }
}

std::pair<std::size_t, int> ProductState::locate(int j) const {
  if (j < 1 || j > num_qubits_) throw IndexOutOfRange("qubit " + std::to_string(j) + " outside the register");
  std::size_t b = 0;
  while (b + 1 < blocks_.size() && offsets_[b + 1] < j) ++b;
  return {b, j - offsets_[b]};
}

double ProductState::probability_one(int j, Basis basis) const {
  const auto [b, local] = locate(j);
  const RealState& s = blocks_[b];
  if (basis == Basis::X) return qarg::probability_one(apply_gate(s, Gate{GateKind::H, {local}}), local);
  return qarg::probability_one(s, local);
}

void ProductState::project(int j, Basis basis, Outcome outcome) {
  const auto [b, local] = locate(j);
  const int n = blocks_[b].num_qubits();
  VecX a = blocks_[b].amplitudes();
  const Gate h{GateKind::H, {local}};
  if (basis == Basis::X) apply_gate_inplace(a, n, h);
  const std::uint64_t m = qubit_mask(n, local);
  const bool one = outcome == Outcome::One;
  for (Index i = 0; i < a.size(); ++i)
    if (((static_cast<std::uint64_t>(i) & m) != 0) != one) a[i] = 0.0;
  if (basis == Basis::X) apply_gate_inplace(a, n, h);
  blocks_[b] = RealState::normalized(std::move(a));
}

Outcome ProductState::measure(int j, Basis basis, Rng& rng) {
  const Outcome o = rng.uniform() < probability_one(j, basis) ? Outcome::One : Outcome::Zero;
  project(j, basis, o);
  return o;
}

RealState ProductState::dense() const {
  if (num_qubits_ > kMaxQubits) throw TooLarge("product state exceeds 20 qubits");
  RealState s(0);
  for (const auto& b : blocks_) s = s.tensor(b);
  return s;
}

Commitment commit_ref(const Bytes& pk, ProductState sigma, Rng& rng) {
  for (const auto& b : sigma.blocks())
    if (b.num_qubits() > kMaxQubits) throw TooLarge("committed block exceeds 20 qubits");
  Commitment c;
  c.residual.pk = pk;
  c.residual.nonce.resize(kNonceBytes);
  for (auto& x : c.residual.nonce) x = static_cast<std::uint8_t>(rng.next() >> 56);
  const auto ell = static_cast<std::uint32_t>(sigma.num_qubits());
  c.y = c.residual.nonce;
  const auto l = be32(ell);
  c.y.insert(c.y.end(), l.begin(), l.end());
  const Bytes t = commitment_tag(tag_key(pk), c.residual.nonce, ell);
  c.y.insert(c.y.end(), t.begin(), t.end());
  c.residual.committed = sigma;
  c.residual.held = std::move(sigma);
  return c;
}

OpenRequest open_all(const BasisString& b) {
  OpenRequest req;
  req.bases = b;
  for (std::size_t i = 0; i < b.size(); ++i) req.indices.push_back(static_cast<int>(i) + 1);
  return req;
}

Bytes open_ref(Residual& residual, const OpenRequest& request, Rng& rng) {
  check_request(residual, request);
  const Bytes key = tag_key(residual.pk);
  Bytes z;
  z.reserve(request.indices.size() * kEntryBytes);
  for (std::size_t i = 0; i < request.indices.size(); ++i) {
    const int j = request.indices[i];
    const Outcome o = residual.held.measure(j, request.bases[i], rng);
    residual.opened.insert(j);
    append_entry(z, key, residual.nonce, j, request.bases[i], o);
  }
  return z;
}

std::vector<std::pair<double, Bytes>> open_ref_branches(const Residual& residual, const OpenRequest& request) {
  check_request(residual, request);
  std::vector<std::pair<double, Bytes>> out;
  Bytes z;
  branches(residual.held, residual, request, 0, 1.0, z, tag_key(residual.pk), out);
  return out;
}

bool verify(const Bytes& sk, const Bytes& y, const OpenRequest& request, const Bytes& z) {
  const auto ell = commitment_length(sk, y);
  if (!ell || !well_formed(request, static_cast<int>(*ell))) return false;
  if (z.size() != request.indices.size() * kEntryBytes) return false;
  const Bytes key = tag_key(public_key_of(sk));
  const Bytes nonce(y.begin(), y.begin() + kNonceBytes);
  bool ok = true;
  for (std::size_t i = 0; i < request.indices.size(); ++i) {
    const std::uint8_t o = z[i * kEntryBytes];
    if (o > 1) return false;
    const Bytes t = entry_tag(key, nonce, request.indices[i], request.bases[i], static_cast<Outcome>(o));
    ok = (sodium_memcmp(t.data(), z.data() + i * kEntryBytes + 1, kTagBytes) == 0) && ok;
  }
  return ok;
}

MeasurementRecord out(const Bytes& /*sk*/, const Bytes& /*y*/, const OpenRequest& request, const Bytes& z) {
  if (z.size() != request.indices.size() * kEntryBytes) throw RangeError("opening has the wrong length");
  MeasurementRecord m(request.indices.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = z[i * kEntryBytes] ? Outcome::One : Outcome::Zero;
  return m;
}

Commitment HonestCommitter::commit(const Bytes& pk, const ProductState& sigma, Rng& rng) {
  return commit_ref(pk, sigma, rng);
}

Bytes HonestCommitter::open(Commitment& c, const OpenRequest& request, Rng& rng) {
  return open_ref(c.residual, request, rng);
}

Commitment WrongStateCommitter::commit(const Bytes& pk, const ProductState& /*sigma*/, Rng& rng) {
  return commit_ref(pk, replacement_, rng);
}

Bytes RefusingCommitter::open(Commitment& c, const OpenRequest& request, Rng& rng) {
  if (rng.uniform() < p_) return {};
  return HonestCommitter::open(c, request, rng);
}

Bytes BasisFlipper::open(Commitment& c, const OpenRequest& request, Rng& rng) {
  const bool flip = rng.uniform() < f_;
  Bytes z = HonestCommitter::open(c, request, rng);
  if (flip)
    for (std::size_t i = 0; i < request.indices.size(); ++i)
      if (request.bases[i] == Basis::X) z[i * kEntryBytes] ^= 1;
  return z;
}

std::unique_ptr<CommitterStrategy> make_committer(const std::string& name) {
  if (name == "honest") return std::make_unique<HonestCommitter>();
  if (name == "refuse") return std::make_unique<RefusingCommitter>();
  if (name == "basis-flipper") return std::make_unique<BasisFlipper>();
  return nullptr;
}

ProductState reference_extractor(const Bytes& /*sk*/, const Bytes& /*y*/, const Commitment& c) {
  if (!c.residual.committed) throw ExtractorUnavailable("commitment carries no snapshot for the reference extractor");
  return *c.residual.committed;
}

SeedBundle SeedBundle::derive(std::uint64_t seed, std::uint64_t run) {
  const std::uint64_t base = derive_seed(seed, run);
  return {derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

std::string ExperimentOutcome::key() const { return m ? to_string(*m) : "bot"; }

ExperimentOutcome real_experiment(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                                  const ProductState& sigma, const SeedBundle& seeds) {
  const KeyPair kp = gen(lambda, seeds.gen);
  Rng commit_rng(seeds.commit);
  Commitment c = strategy.commit(kp.pk, sigma, commit_rng);
  Rng open_rng(seeds.open);
  const OpenRequest req = open_all(b);
  const Bytes z = strategy.open(c, req, open_rng);
  ExperimentOutcome o{kp.pk, c.y, b, std::nullopt};
  if (verify(kp.sk, c.y, req, z)) o.m = out(kp.sk, c.y, req, z);
  return o;
}

ExperimentOutcome ideal_experiment(CommitterStrategy& strategy, const Extractor& extractor, std::size_t lambda,
                                   const BasisString& b, const ProductState& sigma, const SeedBundle& seeds) {
  const KeyPair kp = gen(lambda, seeds.gen);
  Rng commit_rng(seeds.commit);
  Commitment c = strategy.commit(kp.pk, sigma, commit_rng);
  ProductState tau = extractor(kp.sk, c.y, c);
  if (static_cast<std::size_t>(tau.num_qubits()) != b.size()) throw DimensionMismatch("extracted state size differs from b");
  Rng rng(derive_seed(seeds.open, 0x1dea1));
  MeasurementRecord m(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) m[i] = tau.measure(static_cast<int>(i) + 1, b[i], rng);
  return {kp.pk, c.y, b, std::move(m)};
}

std::map<std::string, double> real_distribution_exact(std::size_t lambda, const BasisString& b,
                                                      const ProductState& sigma, std::uint64_t seed) {
  const KeyPair kp = gen(lambda, seed);
  Rng rng(seed);
  const Commitment c = commit_ref(kp.pk, sigma, rng);
  const OpenRequest req = open_all(b);
  std::map<std::string, double> dist;
  for (const auto& [p, z] : open_ref_branches(c.residual, req))
    dist[verify(kp.sk, c.y, req, z) ? to_string(out(kp.sk, c.y, req, z)) : "bot"] += p;
  return dist;
}

DeltaReport estimate_delta(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                           const ProductState& sigma, std::size_t samples, std::uint64_t seed) {
  DeltaReport rep;
  const std::pair<std::string, BasisString> cases[] = {
      {"b", b}, {"0", BasisString(b.size(), Basis::Z)}, {"1", BasisString(b.size(), Basis::X)}};
  for (const auto& [label, basis] : cases) {
    RejectionEstimate e;
    e.label = label;
    e.trials = samples;
    for (std::size_t i = 0; i < samples; ++i) {
      const ExperimentOutcome o = real_experiment(strategy, lambda, basis, sigma, SeedBundle::derive(seed, i));
      if (!o.m) ++e.rejections;
    }
    e.rate = samples ? static_cast<double>(e.rejections) / static_cast<double>(samples) : 0.0;
    e.wilson = wilson_interval(e.rejections, samples);
    rep.delta_hat = std::max(rep.delta_hat, e.rate);
    rep.per_basis.push_back(e);
  }
  return rep;
}

BindingReport binding_experiment(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                                 const ProductState& sigma, std::size_t runs, std::size_t delta_samples,
                                 std::uint64_t seed) {
  BindingReport rep;
  rep.strategy = strategy.name();
  rep.runs = runs;
  rep.delta = estimate_delta(strategy, lambda, b, sigma, delta_samples, derive_seed(seed, 0xde17a));
  const double w = runs ? 1.0 / static_cast<double>(runs) : 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    const SeedBundle seeds = SeedBundle::derive(seed, i);
    rep.real[real_experiment(strategy, lambda, b, sigma, seeds).key()] += w;
    rep.ideal[ideal_experiment(strategy, reference_extractor, lambda, b, sigma, seeds).key()] += w;
  }
  rep.tv = total_variation(rep.real, rep.ideal);
  rep.bound = kBindingConstant * std::sqrt(rep.delta.delta_hat);
  return rep;
}

}  // namespace qarg
