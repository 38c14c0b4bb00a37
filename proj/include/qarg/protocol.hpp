#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qarg/clock.hpp"
#include "qarg/commit.hpp"
#include "qarg/mf.hpp"
#include "qarg/prg.hpp"
#include "qarg/stats.hpp"

namespace qarg {

inline constexpr std::size_t kDefaultMaxCopies = 64;
inline constexpr std::size_t kMaxRepetitions = 16;

struct SessionConfig {
  std::size_t lambda = 8;   // seed length of s1 and s2, in bits
  double c = 1.0;           // circuit completeness
  double s = 0.0;           // circuit soundness
  double c_mf = 0.0;        // per-copy V_MF acceptance at energy (1 - c) / (T + 1)
  double s_mf = 0.0;        // same at (1 - s) / (T + 1)
  double p = 0.0;           // ceil(1 / (c_mf - s_mf))
  std::size_t copies = 1;   // min(lambda^2 p^2, max_copies)
  double tau = 0.0;         // (c_mf + s_mf) / 2
  int copy_qubits = 0;      // qubits of one history state
  std::size_t ell = 0;      // copies * copy_qubits
  std::size_t tape_bits = 0;
  /// Bits drawn from PRG(s1) and PRG(s2).
  std::vector<std::size_t> prg_output_lens;

  std::size_t threshold() const { return threshold_count(copies, tau); }
};

/// Everything a session needs about the instance.
struct ProtocolContext {
  QuantumCircuit circuit;
  ClockBundle bundle;
  MFSampler sampler;
  SessionConfig config;

  /// Compiles `circuit` and derives the session parameters. Throws
  /// GapNonpositive unless c > s.
  ProtocolContext(QuantumCircuit circuit, double c, double s, std::size_t lambda,
                  std::size_t max_copies = kDefaultMaxCopies);
};

/// What a prover commits to and how it commits and opens.
struct ProverStrategy {
  std::string name;
  ProductState state;
  std::shared_ptr<CommitterStrategy> committer;
};

/// witness (x) |0^|Q|>, the input the verifier circuit expects.
RealState circuit_input(const QuantumCircuit& circuit, const RealState& witness);

/// Commits `copies` history states of `witness` and opens truthfully.
ProverStrategy honest_prover(const ProtocolContext& ctx, const RealState& witness);

/// Built-in provers: honest, wrong-state (history state of a random
/// witness drawn from `seed`), refuse, basis-flipper. Throws RangeError for
/// other names.
ProverStrategy make_prover(const std::string& name, const ProtocolContext& ctx, const RealState& witness,
                           std::uint64_t seed);

enum class Party : std::uint8_t { Verifier, Prover };

struct Message {
  Party sender;
  std::string round;
  Bytes payload;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Transcript {
  std::vector<Message> messages;
  int challenge = -1;
  bool accept = false;

  /// One line per message: `V|P round_tag payload_hex`.
  std::string serialize() const;
  static Transcript parse(const std::string& text);
};

/// Forced verifier coins for experiments.
struct VerifierOverrides {
  std::optional<int> challenge;
  std::optional<int> test_basis;
  std::optional<Bits> s1;
  std::optional<Bits> s2;
  /// Draw b and r uniformly instead of expanding s1 and s2.
  bool true_randomness = false;
};

/// Verifier side. Each method is legal only in its turn; anything else
/// raises ProtocolViolation.
class VerifierSession {
 public:
  VerifierSession(const ProtocolContext& ctx, std::uint64_t seed, VerifierOverrides overrides = {});

  Message send_pk();
  void receive_commit(const Message& m);
  Message send_challenge();
  /// h in the test branch, seeds (or raw coins) in the measurement branch.
  Message send_round();
  void receive_opening(const Message& m);
  Message send_verdict();

  bool done() const { return state_ == State::Done; }
  bool accepted() const;
  /// Per-copy V_MF verdicts of the measurement branch.
  const std::vector<bool>& copy_verdicts() const { return copy_verdicts_; }

 private:
  enum class State { Start, AwaitCommit, Challenge, Round, AwaitOpening, Verdict, Done };
  void expect(State s, const char* what) const;

  const ProtocolContext& ctx_;
  VerifierOverrides overrides_;
  Rng rng_;
  State state_ = State::Start;
  KeyPair keys_;
  Bytes y_;
  int challenge_ = -1;
  OpenRequest request_;
  Bits r_;
  bool accept_ = false;
  std::vector<bool> copy_verdicts_;
};

/// Prover side, driving a ProverStrategy.
class ProverSession {
 public:
  ProverSession(const ProtocolContext& ctx, const ProverStrategy& strategy, std::uint64_t seed);

  void receive_pk(const Message& m);
  Message send_commit();
  void receive_challenge(const Message& m);
  void receive_round(const Message& m);
  Message send_opening();
  void receive_verdict(const Message& m);

 private:
  enum class State { AwaitPk, Commit, AwaitChallenge, AwaitRound, Open, AwaitVerdict, Done };
  void expect(State s, const char* what) const;

  const ProtocolContext& ctx_;
  const ProverStrategy& strategy_;
  Rng rng_;
  State state_ = State::AwaitPk;
  Bytes pk_;
  std::optional<Commitment> commitment_;
  int challenge_ = -1;
  OpenRequest request_;
};

/// Basis string of the measurement branch: PRG(s1) truncated to l bits.
BasisString measurement_bases(const ProtocolContext& ctx, const Bits& s1);

/// One full session.
Transcript run_session(const ProtocolContext& ctx, const ProverStrategy& prover, std::uint64_t prover_seed,
                       std::uint64_t verifier_seed, const VerifierOverrides& overrides = {});

struct RepeatedResult {
  std::vector<Transcript> transcripts;
  bool accept = false;
};

/// n_reps sequential sessions with fresh keys; every session runs even after
/// a rejection, and the verdict is the conjunction.
RepeatedResult run_repeated(const ProtocolContext& ctx, const ProverStrategy& prover, std::size_t n_reps,
                            std::uint64_t prover_seed, std::uint64_t verifier_seed);

/// Exact per-copy V_MF acceptance of `per_copy_state` (a history state).
double copy_acceptance(const ProtocolContext& ctx, const RealState& per_copy_state);

/// 1/2 (test branch, passed with certainty) + 1/2 P[Bin(k, q) >= threshold].
double composed_prediction(const SessionConfig& config, double per_copy_acceptance);

struct SeedRow {
  Bits s1;
  std::size_t accepts = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  Interval wilson{0.0, 1.0};
  bool good = false;
};

struct GoodSetReport {
  std::string prover;
  double delta_hat = 0.0;      // overall rejection rate
  Interval delta_wilson{0.0, 1.0};
  double threshold = 0.0;      // 1 - lambda delta_hat
  std::vector<SeedRow> rows;
  double good_fraction = 0.0;
  double markov_bound = 0.0;   // 1 - 2 / lambda
};

/// Conditional acceptance over s2 for `n_s1` seeds s1, with the Good-set
/// threshold 1 - lambda delta_hat. A seed counts as Good when the upper
/// Wilson bound of its rate reaches the threshold; when the threshold is not
/// positive, iff it was accepted at least once.
GoodSetReport good_set_experiment(const ProtocolContext& ctx, const ProverStrategy& prover, std::size_t n_s1,
                                  std::size_t n_s2, std::size_t delta_sessions, std::uint64_t seed);

}  // namespace qarg
