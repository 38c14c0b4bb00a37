#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qarg/rng.hpp"
#include "qarg/sim.hpp"
#include "qarg/stats.hpp"

namespace qarg {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kMinLambda = 16;
inline constexpr std::size_t kKeyBytes = 32;
inline constexpr std::size_t kNonceBytes = 16;
inline constexpr std::size_t kTagBytes = 16;
/// y = nonce || l (4 bytes, big-endian) || tag.
inline constexpr std::size_t kCommitmentBytes = kNonceBytes + 4 + kTagBytes;
/// One opening entry: outcome byte || tag.
inline constexpr std::size_t kEntryBytes = 1 + kTagBytes;

/// Ratio C in TV(Real, Ideal) <= C sqrt(delta) used by the binding harness.
inline constexpr double kBindingConstant = 1.0;

std::string to_hex(const Bytes& b);
Bytes from_hex(const std::string& s);

struct KeyPair {
  Bytes pk;
  Bytes sk;
};

/// Keys of a transparent tag scheme (BLAKE2b):
///   sk = H("qarg-sk" || seed || lambda), pk = H_sk("qarg-pk").
/// Throws RangeError when lambda < 16.
KeyPair gen(std::size_t lambda, std::uint64_t seed);

/// Public key recomputed from the secret key.
Bytes public_key_of(const Bytes& sk);

/// State on l qubits stored as independent blocks; qubit j of the whole
/// register is qubit j - offset of its block.
class ProductState {
 public:
  ProductState() = default;
  explicit ProductState(std::vector<RealState> blocks);
  explicit ProductState(RealState single) : ProductState(std::vector<RealState>{std::move(single)}) {}

  int num_qubits() const { return num_qubits_; }
  const std::vector<RealState>& blocks() const { return blocks_; }
  /// (block index, 1-based qubit in that block) of global qubit j.
  std::pair<std::size_t, int> locate(int j) const;

  /// Probability that qubit j reads 1 in `basis`.
  double probability_one(int j, Basis basis) const;
  /// Collapses qubit j onto `outcome` in `basis`. The outcome must have
  /// nonzero probability.
  void project(int j, Basis basis, Outcome outcome);
  /// Born-rule measurement of qubit j.
  Outcome measure(int j, Basis basis, Rng& rng);

  /// Dense state; at most 20 qubits in total.
  RealState dense() const;

 private:
  std::vector<RealState> blocks_;
  std::vector<int> offsets_;
  int num_qubits_ = 0;
};

/// Committer-held handle. `committed` is the snapshot the reference
/// extractor returns; `held` evolves as indices are opened.
struct Residual {
  Bytes pk;
  Bytes nonce;
  ProductState held;
  std::optional<ProductState> committed;
  std::set<int> opened;
};

struct Commitment {
  Bytes y;
  Residual residual;
};

/// Reference commitment: stores sigma and publishes a tag over (pk, nonce,
/// l). y does not depend on sigma. Throws TooLarge for a single block of more
/// than 20 qubits.
Commitment commit_ref(const Bytes& pk, ProductState sigma, Rng& rng);

/// Indices J (1-based) with one basis each.
struct OpenRequest {
  std::vector<int> indices;
  BasisString bases;
};

/// Full request: every index in order, in the bases of `b`.
OpenRequest open_all(const BasisString& b);

/// Measures each requested index in its basis and tags the outcome.
/// Throws InvalidIndex for indices outside [1, l], repeated, or already
/// opened.
Bytes open_ref(Residual& residual, const OpenRequest& request, Rng& rng);

/// Every outcome branch of open_ref with its probability.
std::vector<std::pair<double, Bytes>> open_ref_branches(const Residual& residual, const OpenRequest& request);

/// Conjunction of per-index tag checks; false for malformed input.
bool verify(const Bytes& sk, const Bytes& y, const OpenRequest& request, const Bytes& z);
/// Decoded outcomes in request order. Call only after verify.
MeasurementRecord out(const Bytes& sk, const Bytes& y, const OpenRequest& request, const Bytes& z);

/// Adversary interface: the two handles of the binding experiment.
class CommitterStrategy {
 public:
  virtual ~CommitterStrategy() = default;
  virtual std::string name() const = 0;
  virtual Commitment commit(const Bytes& pk, const ProductState& sigma, Rng& rng) = 0;
  virtual Bytes open(Commitment& c, const OpenRequest& request, Rng& rng) = 0;
};

/// Follows the reference scheme.
class HonestCommitter : public CommitterStrategy {
 public:
  std::string name() const override { return "honest"; }
  Commitment commit(const Bytes& pk, const ProductState& sigma, Rng& rng) override;
  Bytes open(Commitment& c, const OpenRequest& request, Rng& rng) override;
};

/// Commits `replacement` instead of the state it is handed; opens honestly.
class WrongStateCommitter : public HonestCommitter {
 public:
  explicit WrongStateCommitter(ProductState replacement) : replacement_(std::move(replacement)) {}
  std::string name() const override { return "wrong-state"; }
  Commitment commit(const Bytes& pk, const ProductState& sigma, Rng& rng) override;

 private:
  ProductState replacement_;
};

/// Commits honestly; each opening is refused (empty z) with probability p.
class RefusingCommitter : public HonestCommitter {
 public:
  explicit RefusingCommitter(double p = 1.0) : p_(p) {}
  std::string name() const override { return "refuse"; }
  Bytes open(Commitment& c, const OpenRequest& request, Rng& rng) override;

 private:
  double p_;
};

/// Commits honestly; with probability f per opening, flips every reported
/// X-basis outcome without recomputing its tag.
class BasisFlipper : public HonestCommitter {
 public:
  explicit BasisFlipper(double f = 0.5) : f_(f) {}
  std::string name() const override { return "basis-flipper"; }
  Bytes open(Commitment& c, const OpenRequest& request, Rng& rng) override;

 private:
  double f_;
};

/// Builds a strategy by name: honest, refuse, basis-flipper. Returns nullptr
/// for unknown names. wrong-state needs a state and is built directly.
std::unique_ptr<CommitterStrategy> make_committer(const std::string& name);

/// Extractor: (sk, y, commitment) -> state to be measured in the Ideal world.
using Extractor = std::function<ProductState(const Bytes& sk, const Bytes& y, const Commitment& c)>;

/// Returns the committed snapshot; throws ExtractorUnavailable without one.
ProductState reference_extractor(const Bytes& sk, const Bytes& y, const Commitment& c);

/// Seeds for one experiment run; each step draws from its own stream.
struct SeedBundle {
  std::uint64_t gen = 0;
  std::uint64_t commit = 0;
  std::uint64_t open = 0;

  static SeedBundle derive(std::uint64_t seed, std::uint64_t run);
};

struct ExperimentOutcome {
  Bytes pk;
  Bytes y;
  BasisString b;
  /// Empty in the Real world when Ver rejects.
  std::optional<MeasurementRecord> m;

  /// "bot" for a rejected run, else the outcome bits.
  std::string key() const;
};

ExperimentOutcome real_experiment(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                                  const ProductState& sigma, const SeedBundle& seeds);
ExperimentOutcome ideal_experiment(CommitterStrategy& strategy, const Extractor& extractor, std::size_t lambda,
                                   const BasisString& b, const ProductState& sigma, const SeedBundle& seeds);

/// Exact law of the honest Real experiment, from every open_ref branch
/// passed through Ver and Out.
std::map<std::string, double> real_distribution_exact(std::size_t lambda, const BasisString& b,
                                                      const ProductState& sigma, std::uint64_t seed);

struct RejectionEstimate {
  std::string label;  // "b", "0" or "1"
  std::size_t rejections = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  Interval wilson{0.0, 1.0};
};

struct DeltaReport {
  std::vector<RejectionEstimate> per_basis;
  double delta_hat = 0.0;
};

/// Rejection rate of Ver on strategy openings for b' in {b, 0^l, 1^l};
/// delta_hat is the largest of the three.
DeltaReport estimate_delta(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                           const ProductState& sigma, std::size_t samples, std::uint64_t seed);

struct BindingReport {
  std::string strategy;
  DeltaReport delta;
  std::map<std::string, double> real;
  std::map<std::string, double> ideal;
  double tv = 0.0;
  double bound = 0.0;  // kBindingConstant * sqrt(delta_hat)
  std::size_t runs = 0;

  bool within_bound() const { return tv <= bound; }
};

/// Real and Ideal frequencies over `runs` seeded runs, their TV distance,
/// and delta_hat from `delta_samples` openings per basis.
BindingReport binding_experiment(CommitterStrategy& strategy, std::size_t lambda, const BasisString& b,
                                 const ProductState& sigma, std::size_t runs, std::size_t delta_samples,
                                 std::uint64_t seed);

}  // namespace qarg
