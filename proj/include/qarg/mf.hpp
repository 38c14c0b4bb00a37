#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qarg/pauli.hpp"
#include "qarg/rng.hpp"
#include "qarg/sim.hpp"

namespace qarg {

/// Number of measured positions in every sampled basis.
inline constexpr int kPaddedLocality = 6;

/// Slack subtracted before rounding tau * k up, so that tau * k landing on an
/// integer is not pushed to the next one by rounding error.
inline constexpr double kThresholdSlack = 1e-9;

/// Fixed-length string of random bits, read MSB-first.
class RandomnessTape {
 public:
  RandomnessTape() = default;
  /// Each entry must be 0 or 1.
  explicit RandomnessTape(std::vector<std::uint8_t> bits);
  static RandomnessTape random(std::size_t length, Rng& rng);

  std::size_t size() const { return bits_.size(); }
  int bit(std::size_t i) const { return bits_.at(i); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Bits [pos, pos + width) as an unsigned integer, first bit most
  /// significant. width <= 127.
  unsigned __int128 read(std::size_t pos, int width) const;

  std::string to_string() const;

  friend bool operator==(const RandomnessTape&, const RandomnessTape&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Derandomized term sampler over a canonicalized Hamiltonian.
///
/// Tape layout, with n terms on q qubits:
///   term bits:    B = ceil(log2 n) + 64 bits, an integer u in [0, 2^B);
///                 the term is the first k with u < round(2^B * cdf_k).
///   padding:      L slots of (ceil(log2 q) position bits, 1 letter bit).
///                 Slot i picks v mod q and probes forward (cyclically) to
///                 the first unused qubit. Only the first L - |support|
///                 slots are read.
/// The selection probability of each term differs from its weight by at
/// most 2^-64 relative to the cumulative weight.
class MFSampler {
 public:
  /// Throws EmptyHamiltonian, PaddingExhausted (q < L), or RangeError when a
  /// term is more than L-local.
  explicit MFSampler(const Hamiltonian& h, int padded_locality = kPaddedLocality);

  struct Sample {
    std::size_t term;
    BasisString basis;
  };

  const Hamiltonian& hamiltonian() const { return h_; }
  int num_qubits() const { return h_.num_qubits(); }
  int padded_locality() const { return locality_; }
  const std::vector<double>& term_weights() const { return weights_; }

  int term_bits() const { return term_bits_; }
  int position_bits() const { return position_bits_; }
  std::size_t tape_length() const;

  std::size_t select_term(const RandomnessTape& r) const;
  /// Basis with term k's letters (X -> 1, Z -> 0) plus padding read from r.
  BasisString basis_for_term(std::size_t k, const RandomnessTape& r) const;
  Sample sample(const RandomnessTape& r) const;

  /// A tape that selects term k, with padding bits drawn from `rng`.
  RandomnessTape tape_for_term(std::size_t k, Rng& rng) const;

 private:
  void check_tape(const RandomnessTape& r) const;

  Hamiltonian h_;
  int locality_;
  std::vector<double> weights_;
  std::vector<unsigned __int128> thresholds_;
  int term_bits_ = 0;
  int position_bits_ = 0;
};

/// Verdict on term k: 1 iff sign(d_k) * prod_{i in support} (-1)^{m_i} = -1.
/// Throws MissingOutcome when m lacks a support position.
bool decide(const Hamiltonian& h, std::size_t k, const MeasurementRecord& m);

/// Instance-independent wrapper: resamples (k, b_hat) from r, accepts when
/// b_hat disagrees with the full basis b on a measured position, otherwise
/// decides on m.
bool vmf(const MFSampler& sampler, const RandomnessTape& r, const BasisString& b, const MeasurementRecord& m);

/// Accept iff the number of 1s is at least ceil(tau * k).
bool threshold_vmf(const std::vector<bool>& verdicts, double tau);
/// ceil(tau * k - kThresholdSlack).
std::size_t threshold_count(std::size_t k, double tau);

/// 1/2 - energy / (2 one_norm).
double mf_acceptance_law(double energy, double one_norm);
/// 1 - 2^-(L+1) - energy / (2^(L+1) one_norm); 127/128 - ... for L = 6.
double vmf_acceptance_law(double energy, double one_norm, int padded_locality = kPaddedLocality);

/// Exact Pr[decide(sample(r)) = 1] on `state`, summing term weights times
/// the outcome law of each term's basis. Padding comes from `rng`.
double exact_decide_acceptance(const MFSampler& sampler, const RealState& state, Rng& rng);
/// Exact Pr over uniform full b and term choice of vmf accepting `state`.
/// Enumerates all 2^q bases; q <= 12.
double exact_vmf_acceptance(const MFSampler& sampler, const RealState& state, Rng& rng);

}  // namespace qarg
