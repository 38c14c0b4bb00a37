#include "qarg/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qarg {

namespace {

constexpr std::uint64_t kDeltaStream = 0xd1;
constexpr std::uint64_t kSeedStream = 0x51;
constexpr std::uint64_t kSessionStream = 0x5e;

SessionConfig make_config(const ClockBundle& bundle, const MFSampler& sampler, double c, double s,
                          std::size_t lambda, std::size_t max_copies) {
  if (!(c > s)) throw GapNonpositive("instance needs c > s");
  if (lambda < 1 || lambda > kMaxSeedBits) throw RangeError("lambda must lie in [1, 248]");
  if (max_copies < 1) throw RangeError("need at least one copy");
  SessionConfig cfg;
  cfg.lambda = lambda;
  cfg.c = c;
  cfg.s = s;
  const double steps = static_cast<double>(bundle.layout.clock_qubits + 1);
  const double norm = sampler.hamiltonian().one_norm();
  cfg.c_mf = vmf_acceptance_law((1.0 - c) / steps, norm);
  cfg.s_mf = vmf_acceptance_law((1.0 - s) / steps, norm);
  cfg.p = std::ceil(1.0 / (cfg.c_mf - cfg.s_mf));
  const double want = static_cast<double>(lambda) * static_cast<double>(lambda) * cfg.p * cfg.p;
  cfg.copies = want >= static_cast<double>(max_copies) ? max_copies : std::max<std::size_t>(1, static_cast<std::size_t>(want));
  cfg.tau = 0.5 * (cfg.c_mf + cfg.s_mf);
  cfg.copy_qubits = bundle.layout.total_qubits();
  cfg.ell = cfg.copies * static_cast<std::size_t>(cfg.copy_qubits);
  cfg.tape_bits = sampler.tape_length();
  cfg.prg_output_lens = {cfg.ell, cfg.copies * cfg.tape_bits};
  return cfg;
}

std::size_t seed_bytes(std::size_t lambda) { return (lambda + 7) / 8; }

Bits concat_bits(const Bits& a, const Bits& b) {
  Bits out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

BasisString bases_from_bits(const Bits& bits, std::size_t len) {
  BasisString b(len);
  for (std::size_t i = 0; i < len; ++i) b[i] = bits[i] ? Basis::X : Basis::Z;
  return b;
}

int read_bit_payload(const Message& m) {
  if (m.payload.size() != 1 || m.payload[0] > 1) throw ProtocolViolation(m.round + ": payload must be one bit");
  return m.payload[0];
}

void expect_message(const Message& m, Party sender, const std::string& round) {
  if (m.sender != sender || m.round != round) {
    throw ProtocolViolation("expected " + std::string(sender == Party::Verifier ? "V" : "P") + " " + round +
                            ", got " + (m.sender == Party::Verifier ? "V " : "P ") + m.round);
  }
}

}  // namespace

ProtocolContext::ProtocolContext(QuantumCircuit c, double cc, double ss, std::size_t lambda, std::size_t max_copies)
    : circuit(std::move(c)),
      bundle(compile(circuit)),
      sampler(bundle.h_total),
      config(make_config(bundle, sampler, cc, ss, lambda, max_copies)) {}

RealState circuit_input(const QuantumCircuit& circuit, const RealState& witness) {
  if (witness.num_qubits() != circuit.witness_qubits()) {
    throw DimensionMismatch("witness has " + std::to_string(witness.num_qubits()) + " qubits, circuit expects " +
                            std::to_string(circuit.witness_qubits()));
  }
  return witness.tensor(RealState(circuit.ancilla_count));
}

ProverStrategy honest_prover(const ProtocolContext& ctx, const RealState& witness) {
  const RealState phi = history_state(ctx.circuit, circuit_input(ctx.circuit, witness)).state;
  return {"honest", ProductState(std::vector<RealState>(ctx.config.copies, phi)), std::make_shared<HonestCommitter>()};
}

ProverStrategy make_prover(const std::string& name, const ProtocolContext& ctx, const RealState& witness,
                           std::uint64_t seed) {
  if (name == "honest") return honest_prover(ctx, witness);
  if (name == "wrong-state") {
    Rng rng(seed);
    ProverStrategy p = honest_prover(ctx, RealState::random(ctx.circuit.witness_qubits(), rng));
    p.name = name;
    return p;
  }
  ProverStrategy p = honest_prover(ctx, witness);
  p.name = name;
  if (name == "refuse") {
    p.committer = std::make_shared<RefusingCommitter>(1.0);
  } else if (name == "basis-flipper") {
    p.committer = std::make_shared<BasisFlipper>(0.5);
  } else {
    throw RangeError("unknown prover '" + name + "' (honest, wrong-state, refuse, basis-flipper)");
  }
  return p;
}

std::string Transcript::serialize() const {
  std::string out;
  for (const auto& m : messages) {
    out += m.sender == Party::Verifier ? 'V' : 'P';
    out += ' ';
    out += m.round;
    out += ' ';
    out += m.payload.empty() ? std::string("-") : to_hex(m.payload);
    out += '\n';
  }
  return out;
}

Transcript Transcript::parse(const std::string& text) {
  Transcript t;
  std::istringstream is(text);
  std::string sender, round, hex;
  while (is >> sender >> round >> hex) {
    if (sender != "V" && sender != "P") throw ProtocolViolation("unknown sender '" + sender + "'");
    Message m{sender == "V" ? Party::Verifier : Party::Prover, round, hex == "-" ? Bytes{} : from_hex(hex)};
    if (round == "challenge") t.challenge = read_bit_payload(m);
    if (round == "verdict") t.accept = read_bit_payload(m) == 1;
    t.messages.push_back(std::move(m));
  }
  return t;
}

BasisString measurement_bases(const ProtocolContext& ctx, const Bits& s1) {
  return bases_from_bits(prg_expand(s1, ctx.config.ell), ctx.config.ell);
}

VerifierSession::VerifierSession(const ProtocolContext& ctx, std::uint64_t seed, VerifierOverrides overrides)
    : ctx_(ctx), overrides_(std::move(overrides)), rng_(seed) {}

void VerifierSession::expect(State s, const char* what) const {
  if (state_ != s) throw ProtocolViolation(std::string("verifier: ") + what + " out of order");
}

Message VerifierSession::send_pk() {
  expect(State::Start, "send_pk");
  keys_ = gen(std::max(ctx_.config.lambda, kMinLambda), rng_.next());
  state_ = State::AwaitCommit;
  return {Party::Verifier, "pk", keys_.pk};
}

void VerifierSession::receive_commit(const Message& m) {
  expect(State::AwaitCommit, "receive_commit");
  expect_message(m, Party::Prover, "commit");
  if (m.payload.size() != kCommitmentBytes) throw ProtocolViolation("commit: malformed commitment");
  y_ = m.payload;
  state_ = State::Challenge;
}

Message VerifierSession::send_challenge() {
  expect(State::Challenge, "send_challenge");
  const int coin = rng_.bit() ? 1 : 0;
  challenge_ = overrides_.challenge.value_or(coin);
  state_ = State::Round;
  return {Party::Verifier, "challenge", {static_cast<std::uint8_t>(challenge_)}};
}

Message VerifierSession::send_round() {
  expect(State::Round, "send_round");
  const SessionConfig& cfg = ctx_.config;
  state_ = State::AwaitOpening;
  if (challenge_ == 0) {
    const int coin = rng_.bit() ? 1 : 0;
    const int h = overrides_.test_basis.value_or(coin);
    request_ = open_all(BasisString(cfg.ell, h ? Basis::X : Basis::Z));
    return {Party::Verifier, "test-basis", {static_cast<std::uint8_t>(h)}};
  }
  const Bits s1 = overrides_.s1.value_or(random_bits(cfg.lambda, rng_));
  const Bits s2 = overrides_.s2.value_or(random_bits(cfg.lambda, rng_));
  if (s1.size() != cfg.lambda || s2.size() != cfg.lambda) throw RangeError("seed overrides must have lambda bits");
  if (overrides_.true_randomness) {
    const Bits b = random_bits(cfg.ell, rng_);
    r_ = random_bits(cfg.copies * cfg.tape_bits, rng_);
    request_ = open_all(bases_from_bits(b, cfg.ell));
    return {Party::Verifier, "coins", pack_bits(concat_bits(b, r_))};
  }
  request_ = open_all(measurement_bases(ctx_, s1));
  r_ = prg_expand(s2, cfg.copies * cfg.tape_bits);
  Bytes payload = pack_bits(s1);
  const Bytes second = pack_bits(s2);
  payload.insert(payload.end(), second.begin(), second.end());
  return {Party::Verifier, "seeds", payload};
}

void VerifierSession::receive_opening(const Message& m) {
  expect(State::AwaitOpening, "receive_opening");
  expect_message(m, Party::Prover, "opening");
  const SessionConfig& cfg = ctx_.config;
  const bool u = verify(keys_.sk, y_, request_, m.payload);
  copy_verdicts_.clear();
  if (challenge_ == 0 || !u) {
    accept_ = u;
  } else {
    const MeasurementRecord v = out(keys_.sk, y_, request_, m.payload);
    const auto q = static_cast<std::size_t>(cfg.copy_qubits);
    for (std::size_t i = 0; i < cfg.copies; ++i) {
      const BasisString b(request_.bases.begin() + i * q, request_.bases.begin() + (i + 1) * q);
      const MeasurementRecord mi(v.begin() + i * q, v.begin() + (i + 1) * q);
      const RandomnessTape tape(Bits(r_.begin() + i * cfg.tape_bits, r_.begin() + (i + 1) * cfg.tape_bits));
      copy_verdicts_.push_back(vmf(ctx_.sampler, tape, b, mi));
    }
    accept_ = threshold_vmf(copy_verdicts_, cfg.tau);
  }
  state_ = State::Verdict;
}

Message VerifierSession::send_verdict() {
  expect(State::Verdict, "send_verdict");
  state_ = State::Done;
  return {Party::Verifier, "verdict", {static_cast<std::uint8_t>(accept_ ? 1 : 0)}};
}

bool VerifierSession::accepted() const {
  if (state_ != State::Done && state_ != State::Verdict) throw ProtocolViolation("verifier has not decided yet");
  return accept_;
}

ProverSession::ProverSession(const ProtocolContext& ctx, const ProverStrategy& strategy, std::uint64_t seed)
    : ctx_(ctx), strategy_(strategy), rng_(seed) {}

void ProverSession::expect(State s, const char* what) const {
  if (state_ != s) throw ProtocolViolation(std::string("prover: ") + what + " out of order");
}

void ProverSession::receive_pk(const Message& m) {
  expect(State::AwaitPk, "receive_pk");
  expect_message(m, Party::Verifier, "pk");
  if (m.payload.size() != kKeyBytes) throw ProtocolViolation("pk: malformed key");
  pk_ = m.payload;
  state_ = State::Commit;
}

Message ProverSession::send_commit() {
  expect(State::Commit, "send_commit");
  commitment_ = strategy_.committer->commit(pk_, strategy_.state, rng_);
  state_ = State::AwaitChallenge;
  return {Party::Prover, "commit", commitment_->y};
}

void ProverSession::receive_challenge(const Message& m) {
  expect(State::AwaitChallenge, "receive_challenge");
  expect_message(m, Party::Verifier, "challenge");
  challenge_ = read_bit_payload(m);
  state_ = State::AwaitRound;
}

void ProverSession::receive_round(const Message& m) {
  expect(State::AwaitRound, "receive_round");
  const SessionConfig& cfg = ctx_.config;
  if (challenge_ == 0) {
    expect_message(m, Party::Verifier, "test-basis");
    const int h = read_bit_payload(m);
    request_ = open_all(BasisString(cfg.ell, h ? Basis::X : Basis::Z));
  } else if (m.sender == Party::Verifier && m.round == "seeds") {
    if (m.payload.size() != 2 * seed_bytes(cfg.lambda)) throw ProtocolViolation("seeds: malformed payload");
    const Bytes first(m.payload.begin(), m.payload.begin() + seed_bytes(cfg.lambda));
    request_ = open_all(measurement_bases(ctx_, unpack_bits(first, cfg.lambda)));
  } else if (m.sender == Party::Verifier && m.round == "coins") {
    if (m.payload.size() * 8 < cfg.ell) throw ProtocolViolation("coins: malformed payload");
    request_ = open_all(bases_from_bits(unpack_bits(m.payload, cfg.ell), cfg.ell));
  } else {
    expect_message(m, Party::Verifier, "seeds");
  }
  state_ = State::Open;
}

Message ProverSession::send_opening() {
  expect(State::Open, "send_opening");
  const Bytes z = strategy_.committer->open(*commitment_, request_, rng_);
  state_ = State::AwaitVerdict;
  return {Party::Prover, "opening", z};
}

void ProverSession::receive_verdict(const Message& m) {
  expect(State::AwaitVerdict, "receive_verdict");
  expect_message(m, Party::Verifier, "verdict");
  read_bit_payload(m);
  state_ = State::Done;
}

Transcript run_session(const ProtocolContext& ctx, const ProverStrategy& prover, std::uint64_t prover_seed,
                       std::uint64_t verifier_seed, const VerifierOverrides& overrides) {
  VerifierSession v(ctx, verifier_seed, overrides);
  ProverSession p(ctx, prover, prover_seed);
  Transcript t;
  auto log = [&t](Message m) -> const Message& { return t.messages.emplace_back(std::move(m)); };

  p.receive_pk(log(v.send_pk()));
  v.receive_commit(log(p.send_commit()));
  p.receive_challenge(log(v.send_challenge()));
  p.receive_round(log(v.send_round()));
  v.receive_opening(log(p.send_opening()));
  p.receive_verdict(log(v.send_verdict()));

  t.challenge = t.messages[2].payload[0];
  t.accept = v.accepted();
  return t;
}

RepeatedResult run_repeated(const ProtocolContext& ctx, const ProverStrategy& prover, std::size_t n_reps,
                            std::uint64_t prover_seed, std::uint64_t verifier_seed) {
  if (n_reps < 1) throw RangeError("need at least one repetition");
  RepeatedResult r;
  r.accept = true;
  for (std::size_t i = 0; i < n_reps; ++i) {
    r.transcripts.push_back(run_session(ctx, prover, derive_seed(prover_seed, i), derive_seed(verifier_seed, i)));
    r.accept = r.accept && r.transcripts.back().accept;
  }
  return r;
}

double copy_acceptance(const ProtocolContext& ctx, const RealState& per_copy_state) {
  const Hamiltonian& h = ctx.sampler.hamiltonian();
  return vmf_acceptance_law(expectation(per_copy_state, h), h.one_norm(), ctx.sampler.padded_locality());
}

double composed_prediction(const SessionConfig& config, double per_copy_acceptance) {
  return 0.5 + 0.5 * binomial_tail(config.copies, per_copy_acceptance, config.threshold());
}

GoodSetReport good_set_experiment(const ProtocolContext& ctx, const ProverStrategy& prover, std::size_t n_s1,
                                  std::size_t n_s2, std::size_t delta_sessions, std::uint64_t seed) {
  GoodSetReport rep;
  rep.prover = prover.name;
  const double lambda = static_cast<double>(ctx.config.lambda);

  std::size_t rejections = 0;
  const std::uint64_t dseed = derive_seed(seed, kDeltaStream);
  for (std::size_t i = 0; i < delta_sessions; ++i) {
    const std::uint64_t s = derive_seed(dseed, i);
    if (!run_session(ctx, prover, derive_seed(s, 0), derive_seed(s, 1)).accept) ++rejections;
  }
  rep.delta_hat = delta_sessions ? static_cast<double>(rejections) / static_cast<double>(delta_sessions) : 0.0;
  rep.delta_wilson = wilson_interval(rejections, delta_sessions);
  rep.threshold = 1.0 - lambda * rep.delta_hat;
  rep.markov_bound = 1.0 - 2.0 / lambda;

  Rng seed_rng(derive_seed(seed, kSeedStream));
  const std::uint64_t sseed = derive_seed(seed, kSessionStream);
  std::size_t good = 0;
  for (std::size_t a = 0; a < n_s1; ++a) {
    SeedRow row;
    row.s1 = random_bits(ctx.config.lambda, seed_rng);
    row.trials = n_s2;
    for (std::size_t b = 0; b < n_s2; ++b) {
      const std::uint64_t s = derive_seed(derive_seed(sseed, a), b);
      VerifierOverrides o;
      o.challenge = 1;
      o.s1 = row.s1;
      if (run_session(ctx, prover, derive_seed(s, 0), derive_seed(s, 1), o).accept) ++row.accepts;
    }
    row.rate = n_s2 ? static_cast<double>(row.accepts) / static_cast<double>(n_s2) : 0.0;
    row.wilson = wilson_interval(row.accepts, n_s2);
    row.good = rep.threshold > 0.0 ? row.wilson.hi >= rep.threshold : row.accepts > 0;
    good += row.good ? 1 : 0;
    rep.rows.push_back(std::move(row));
  }
  rep.good_fraction = n_s1 ? static_cast<double>(good) / static_cast<double>(n_s1) : 0.0;
  return rep;
}

}  // namespace qarg
