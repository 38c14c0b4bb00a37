#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qarg/error.hpp"
#include "qarg/types.hpp"

namespace qarg {

/// Tolerance for Hermiticity and Y-content checks in decompositions.
inline constexpr double kDecomposeTol = 1e-9;

/// Largest register realizable by word_matrix.
inline constexpr int kMaxWordMatrixQubits = 10;
/// Largest register realizable by realize / operator_norm.
inline constexpr int kMaxRealizeQubits = 12;
/// Largest register accepted by decompose_yfree.
inline constexpr int kMaxDecomposeQubits = 4;

/// Non-identity Pauli letters. There is no Y: it cannot be represented.
enum class Letter : std::uint8_t { X, Z };

char letter_char(Letter l);

/// Tensor product of X, Z and I on `num_qubits` qubits, stored sparsely as
/// qubit index (1-based) -> letter. Absent indices are identity.
class PauliWord {
 public:
  PauliWord() = default;
  explicit PauliWord(int num_qubits);
  PauliWord(int num_qubits, std::map<int, Letter> letters);

  int num_qubits() const { return num_qubits_; }
  const std::map<int, Letter>& letters() const { return letters_; }
  int locality() const { return static_cast<int>(letters_.size()); }
  bool is_identity() const { return letters_.empty(); }

  void set(int qubit, Letter letter);
  std::optional<Letter> at(int qubit) const;

  /// Big-endian flip / phase masks; S|i> = (-1)^popcount(i & z) |i ^ x>.
  std::uint64_t x_mask() const;
  std::uint64_t z_mask() const;

  /// Relabels qubit i as mapping[i - 1] on a register of `num_qubits`.
  PauliWord remapped(int num_qubits, std::span<const int> mapping) const;

  /// "1:X 3:Z", or "I" for the identity word.
  std::string to_string() const;

  friend bool operator==(const PauliWord&, const PauliWord&) = default;

 private:
  int num_qubits_ = 0;
  std::map<int, Letter> letters_;
};

/// Canonical order: support index list first, then letter sequence.
bool canonical_less(const PauliWord& a, const PauliWord& b);

struct PauliTerm {
  double coeff;
  PauliWord word;
};

/// Weighted sum of Y-free Pauli words with real, nonzero coefficients.
/// Duplicate words are allowed and kept; see canonicalize().
class Hamiltonian {
 public:
  Hamiltonian() = default;
  explicit Hamiltonian(int num_qubits) : num_qubits_(num_qubits) {}

  int num_qubits() const { return num_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Sum of |coefficient|, maintained as terms are added.
  double one_norm() const { return one_norm_; }
  int max_locality() const;

  /// Appends a term. Zero coefficients are silently skipped.
  void add(double coeff, PauliWord word);
  /// Concatenates the terms of `other`, keeping duplicates.
  void append(const Hamiltonian& other);

 private:
  int num_qubits_ = 0;
  std::vector<PauliTerm> terms_;
  double one_norm_ = 0.0;
};

Hamiltonian operator+(const Hamiltonian& a, const Hamiltonian& b);
Hamiltonian operator*(double s, const Hamiltonian& h);

/// Operator product of two Hamiltonians on the same register whose supports
/// are disjoint, expanded term by term.
Hamiltonian disjoint_product(const Hamiltonian& a, const Hamiltonian& b);

/// Places a local Hamiltonian on a larger register: local qubit i becomes
/// qubit mapping[i - 1].
Hamiltonian embed(const Hamiltonian& local, int num_qubits, std::span<const int> mapping);

namespace detail {
void decompose_input_check(const MatX& m, double tol);
Hamiltonian decompose_yfree_impl(const MatX& m, double tol);
}  // namespace detail

/// Dense 2^q x 2^q matrix of a word: tensor of I, X, Z factors.
template <typename Scalar = double>
MatT<Scalar> word_matrix(const PauliWord& word) {
  const int q = word.num_qubits();
  if (q > kMaxWordMatrixQubits) throw TooLarge("word_matrix: more than 10 qubits");
  const Index dim = Index{1} << q;
  const std::uint64_t x = word.x_mask();
  const std::uint64_t z = word.z_mask();
  MatT<Scalar> m = MatT<Scalar>::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    const auto col = static_cast<std::uint64_t>(i);
    const int sign = (__builtin_popcountll(col & z) & 1) ? -1 : 1;
    m(static_cast<Index>(col ^ x), i) = Scalar(sign);
  }
  return m;
}

/// Dense matrix of a Hamiltonian (register of at most 12 qubits).
MatX realize(const Hamiltonian& h);

/// Y-free Pauli decomposition of a real Hermitian matrix on k <= 4 qubits.
/// Coefficients are trace(P M) / 2^k; words with |c| < tol are dropped.
/// Throws NotHermitian, or YFreeViolation when the matrix has Y content.
template <typename Derived>
Hamiltonian decompose_yfree(const Eigen::MatrixBase<Derived>& m, double tol = kDecomposeTol) {
  return detail::decompose_yfree_impl(MatX(m), tol);
}

/// CCZ built from (I - |11><11|) (x) I + |11><11| (x) Z.
Hamiltonian ccz_decomposition();

struct NormBoundReport {
  int k;              // qubits the matrix acts on nontrivially
  double op_norm;     // ||M||
  double one_norm;    // sum |c_P|
  double lower;       // ||M|| / 2^(k/2)
  double upper;       // 2^k ||M||
  std::size_t nonzero;
  bool lower_ok;
  bool upper_ok;
  bool count_ok;      // nonzero <= 4^k

  bool ok() const { return lower_ok && upper_ok && count_ok; }
};

/// Checks ||M|| / 2^(k/2) <= sum |c_P| <= 2^k ||M|| for a decomposition of M.
NormBoundReport one_norm_bound_check(const MatX& m, const Hamiltonian& decomposition);

/// Merges duplicate words, drops zero sums, sorts canonically.
Hamiltonian canonicalize(const Hamiltonian& h);

/// Largest singular value of the realized matrix (at most 12 qubits).
double operator_norm(const Hamiltonian& h);

/// Smallest eigenvalue of the realized matrix (at most 12 qubits).
double min_eigenvalue(const Hamiltonian& h);

// Hamiltonian text format:
//   qubits q
//   coeff idx1:L1 idx2:L2 ...     (L in {X, Z}; no letters = identity)
// plus optional metadata lines `ell`, `ancillas`, `clockT`, `component`.

struct HamiltonianMetadata {
  std::map<std::string, std::string> fields;
};

void write_hamiltonian(std::ostream& os, const Hamiltonian& h, const HamiltonianMetadata& meta = {});
Hamiltonian read_hamiltonian(std::istream& is, const std::string& source = "<stream>",
                             HamiltonianMetadata* meta = nullptr);

}  // namespace qarg
