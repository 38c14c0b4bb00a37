#include "qarg/mf.hpp"

#include <cmath>

namespace qarg {

namespace {

int ceil_log2(std::uint64_t n) {
  int c = 0;
  while ((std::uint64_t{1} << c) < n) ++c;
  return c;
}

MeasurementRecord record_from_string(const std::string& bits, const BasisString& basis) {
  MeasurementRecord m(basis.size(), Outcome::None);
  std::size_t j = 0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i] != Basis::None) m[i] = bits[j++] == '1' ? Outcome::One : Outcome::Zero;
  return m;
}

}  // namespace

RandomnessTape::RandomnessTape(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (const auto b : bits_)
    if (b > 1) throw RangeError("tape entries must be 0 or 1");
}

RandomnessTape RandomnessTape::random(std::size_t length, Rng& rng) {
  std::vector<std::uint8_t> bits(length);
  for (auto& b : bits) b = rng.bit() ? 1 : 0;
  return RandomnessTape(std::move(bits));
}

unsigned __int128 RandomnessTape::read(std::size_t pos, int width) const {
  if (width < 0 || width > 127 || pos + static_cast<std::size_t>(width) > bits_.size()) {
    throw RangeError("tape read past the end");
  }
  unsigned __int128 v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | bits_[pos + i];
  return v;
}

std::string RandomnessTape::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

MFSampler::MFSampler(const Hamiltonian& h, int padded_locality)
    : h_(canonicalize(h)), locality_(padded_locality) {
  if (h_.empty()) throw EmptyHamiltonian("MF sampler needs at least one nonzero term");
  if (h_.num_qubits() < locality_) {
    throw PaddingExhausted("cannot pad to " + std::to_string(locality_) + " positions on " +
                           std::to_string(h_.num_qubits()) + " qubits");
  }
  if (h_.max_locality() > locality_) {
    throw RangeError("term locality " + std::to_string(h_.max_locality()) + " exceeds padded locality " +
                     std::to_string(locality_));
  }
  const std::size_t n = h_.size();
  term_bits_ = ceil_log2(n) + 64;
  position_bits_ = ceil_log2(static_cast<std::uint64_t>(h_.num_qubits()));

  const double norm = h_.one_norm();
  weights_.reserve(n);
  thresholds_.reserve(n);
  long double cum = 0.0L;
  unsigned __int128 prev = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::abs(h_.terms()[k].coeff);
    weights_.push_back(w / norm);
    cum += static_cast<long double>(w);
    unsigned __int128 t = k + 1 == n ? (static_cast<unsigned __int128>(1) << term_bits_)
                                     : static_cast<unsigned __int128>(
                                           std::ldexp(cum / static_cast<long double>(norm), term_bits_));
    if (t < prev) t = prev;
    thresholds_.push_back(t);
    prev = t;
  }
}

std::size_t MFSampler::tape_length() const {
  return static_cast<std::size_t>(term_bits_) + static_cast<std::size_t>(locality_) * (position_bits_ + 1);
}

void MFSampler::check_tape(const RandomnessTape& r) const {
  if (r.size() != tape_length()) {
    throw DimensionMismatch("tape has " + std::to_string(r.size()) + " bits, sampler needs " +
                            std::to_string(tape_length()));
  }
}

std::size_t MFSampler::select_term(const RandomnessTape& r) const {
  check_tape(r);
  const unsigned __int128 u = r.read(0, term_bits_);
  std::size_t k = 0;
  while (u >= thresholds_[k]) ++k;
  return k;
}

BasisString MFSampler::basis_for_term(std::size_t k, const RandomnessTape& r) const {
  check_tape(r);
  if (k >= h_.size()) throw IndexOutOfRange("term index out of range");
  const int q = num_qubits();
  BasisString b(q, Basis::None);
  int used = 0;
  for (const auto& [qubit, letter] : h_.terms()[k].word.letters()) {
    b[qubit - 1] = letter == Letter::X ? Basis::X : Basis::Z;
    ++used;
  }
  std::size_t pos = term_bits_;
  for (; used < locality_; ++used) {
    auto v = static_cast<int>(r.read(pos, position_bits_) % static_cast<unsigned>(q));
    while (b[v] != Basis::None) v = (v + 1) % q;
    b[v] = r.bit(pos + position_bits_) ? Basis::X : Basis::Z;
    pos += position_bits_ + 1;
  }
  return b;
}

MFSampler::Sample MFSampler::sample(const RandomnessTape& r) const {
  const std::size_t k = select_term(r);
  return {k, basis_for_term(k, r)};
}

RandomnessTape MFSampler::tape_for_term(std::size_t k, Rng& rng) const {
  if (k >= h_.size()) throw IndexOutOfRange("term index out of range");
  const unsigned __int128 lo = k == 0 ? 0 : thresholds_[k - 1];
  if (lo >= thresholds_[k]) throw RangeError("term " + std::to_string(k) + " has no tape of its own");
  std::vector<std::uint8_t> bits = RandomnessTape::random(tape_length(), rng).bits();
  for (int i = 0; i < term_bits_; ++i) bits[i] = static_cast<std::uint8_t>((lo >> (term_bits_ - 1 - i)) & 1);
  return RandomnessTape(std::move(bits));
}

bool decide(const Hamiltonian& h, std::size_t k, const MeasurementRecord& m) {
  if (k >= h.size()) throw IndexOutOfRange("term index out of range");
  if (static_cast<int>(m.size()) != h.num_qubits()) throw DimensionMismatch("record length differs from register");
  const PauliTerm& term = h.terms()[k];
  int parity = 0;
  for (const auto& [qubit, letter] : term.word.letters()) {
    const Outcome o = m[qubit - 1];
    if (o == Outcome::None) throw MissingOutcome("no outcome for qubit " + std::to_string(qubit));
    parity ^= o == Outcome::One ? 1 : 0;
  }
  const bool negative_product = (parity == 1) != (term.coeff < 0);
  return negative_product;
}

bool vmf(const MFSampler& sampler, const RandomnessTape& r, const BasisString& b, const MeasurementRecord& m) {
  const int q = sampler.num_qubits();
  if (static_cast<int>(b.size()) != q || static_cast<int>(m.size()) != q) {
    throw DimensionMismatch("basis or record length differs from the Hamiltonian register");
  }
  const auto [k, b_hat] = sampler.sample(r);
  for (int i = 0; i < q; ++i)
    if (b_hat[i] != Basis::None && b_hat[i] != b[i]) return true;
  return decide(sampler.hamiltonian(), k, m);
}

std::size_t threshold_count(std::size_t k, double tau) {
  const double t = std::ceil(tau * static_cast<double>(k) - kThresholdSlack);
  return t <= 0.0 ? 0 : static_cast<std::size_t>(t);
}

bool threshold_vmf(const std::vector<bool>& verdicts, double tau) {
  std::size_t ones = 0;
  for (const bool v : verdicts) ones += v ? 1 : 0;
  return ones >= threshold_count(verdicts.size(), tau);
}

double mf_acceptance_law(double energy, double one_norm) { return 0.5 - energy / (2.0 * one_norm); }

double vmf_acceptance_law(double energy, double one_norm, int padded_locality) {
  const double scale = std::ldexp(1.0, padded_locality + 1);
  return 1.0 - 1.0 / scale - energy / (scale * one_norm);
}

double exact_decide_acceptance(const MFSampler& sampler, const RealState& state, Rng& rng) {
  const Hamiltonian& h = sampler.hamiltonian();
  double p = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const RandomnessTape r = sampler.tape_for_term(k, rng);
    const BasisString b = sampler.basis_for_term(k, r);
    for (const auto& [bits, prob] : outcome_distribution(b, state))
      if (prob > 0.0 && decide(h, k, record_from_string(bits, b))) p += sampler.term_weights()[k] * prob;
  }
  return p;
}

double exact_vmf_acceptance(const MFSampler& sampler, const RealState& state, Rng& rng) {
  const int q = sampler.num_qubits();
  if (q > 12) throw TooLarge("exact_vmf_acceptance enumerates 2^q bases; q <= 12");
  const Hamiltonian& h = sampler.hamiltonian();
  const std::uint64_t nb = std::uint64_t{1} << q;
  const MeasurementRecord unused(q, Outcome::Zero);
  double p = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const RandomnessTape r = sampler.tape_for_term(k, rng);
    double pk = 0.0;
    for (std::uint64_t bi = 0; bi < nb; ++bi) {
      BasisString b(q);
      for (int i = 0; i < q; ++i) b[i] = (bi >> (q - 1 - i)) & 1 ? Basis::X : Basis::Z;
      const BasisString b_hat = sampler.basis_for_term(k, r);
      bool consistent = true;
      for (int i = 0; i < q; ++i) consistent = consistent && (b_hat[i] == Basis::None || b_hat[i] == b[i]);
      if (!consistent) {
        pk += vmf(sampler, r, b, unused) ? 1.0 : 0.0;
        continue;
      }
      for (const auto& [bits, prob] : outcome_distribution(b, state))
        if (prob > 0.0 && vmf(sampler, r, b, record_from_string(bits, b))) pk += prob;
    }
    p += sampler.term_weights()[k] * pk / static_cast<double>(nb);
  }
  return p;
}

}  // namespace qarg
