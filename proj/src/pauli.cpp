#include "qarg/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qarg {

char letter_char(Letter l) { return l == Letter::X ? 'X' : 'Z'; }

PauliWord::PauliWord(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 0 || num_qubits > 64) throw RangeError("PauliWord: qubit count out of range");
}

PauliWord::PauliWord(int num_qubits, std::map<int, Letter> letters) : PauliWord(num_qubits) {
  for (const auto& [q, l] : letters) set(q, l);
}

void PauliWord::set(int qubit, Letter letter) {
  if (qubit < 1 || qubit > num_qubits_) {
    throw IndexOutOfRange("PauliWord: qubit " + std::to_string(qubit) + " outside [1, " +
                          std::to_string(num_qubits_) + "]");
  }
  letters_[qubit] = letter;
}

std::optional<Letter> PauliWord::at(int qubit) const {
  const auto it = letters_.find(qubit);
  if (it == letters_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t PauliWord::x_mask() const {
  std::uint64_t m = 0;
  for (const auto& [q, l] : letters_)
    if (l == Letter::X) m |= qubit_mask(num_qubits_, q);
  return m;
}

std::uint64_t PauliWord::z_mask() const {
  std::uint64_t m = 0;
  for (const auto& [q, l] : letters_)
    if (l == Letter::Z) m |= qubit_mask(num_qubits_, q);
  return m;
}

PauliWord PauliWord::remapped(int num_qubits, std::span<const int> mapping) const {
  PauliWord out(num_qubits);
  for (const auto& [q, l] : letters_) {
    if (q > static_cast<int>(mapping.size())) throw IndexOutOfRange("remapped: mapping too short");
    out.set(mapping[q - 1], l);
  }
  return out;
}

std::string PauliWord::to_string() const {
  if (letters_.empty()) return "I";
  std::string s;
  for (const auto& [q, l] : letters_) {
    if (!s.empty()) s += ' ';
    s += std::to_string(q);
    s += ':';
    s += letter_char(l);
  }
  return s;
}

bool canonical_less(const PauliWord& a, const PauliWord& b) {
  const auto& la = a.letters();
  const auto& lb = b.letters();
  // Support first.
  auto ia = la.begin();
  auto ib = lb.begin();
  for (; ia != la.end() && ib != lb.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
  }
  if (ia != la.end() || ib != lb.end()) return ib != lb.end();
  // Same support: letters.
  for (ia = la.begin(), ib = lb.begin(); ia != la.end(); ++ia, ++ib) {
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return false;
}

int Hamiltonian::max_locality() const {
  int m = 0;
  for (const auto& t : terms_) m = std::max(m, t.word.locality());
  return m;
}

void Hamiltonian::add(double coeff, PauliWord word) {
  if (!std::isfinite(coeff)) throw RangeError("Hamiltonian: non-finite coefficient");
  if (word.num_qubits() != num_qubits_) {
    throw DimensionMismatch("Hamiltonian: word on " + std::to_string(word.num_qubits()) +
                            " qubits added to " + std::to_string(num_qubits_) + "-qubit Hamiltonian");
  }
  if (coeff == 0.0) return;
  one_norm_ += std::abs(coeff);
  terms_.push_back({coeff, std::move(word)});
}

void Hamiltonian::append(const Hamiltonian& other) {
  if (other.num_qubits_ != num_qubits_) throw DimensionMismatch("Hamiltonian::append: register mismatch");
  for (const auto& t : other.terms_) add(t.coeff, t.word);
}

Hamiltonian operator+(const Hamiltonian& a, const Hamiltonian& b) {
  Hamiltonian out = a;
  out.append(b);
  return out;
}

Hamiltonian operator*(double s, const Hamiltonian& h) {
  Hamiltonian out(h.num_qubits());
  for (const auto& t : h.terms()) out.add(s * t.coeff, t.word);
  return out;
}

Hamiltonian disjoint_product(const Hamiltonian& a, const Hamiltonian& b) {
  if (a.num_qubits() != b.num_qubits()) throw DimensionMismatch("disjoint_product: register mismatch");
  Hamiltonian out(a.num_qubits());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      PauliWord w = ta.word;
      for (const auto& [q, l] : tb.word.letters()) {
        if (w.at(q)) throw LayoutError("disjoint_product: supports overlap on qubit " + std::to_string(q));
        w.set(q, l);
      }
      out.add(ta.coeff * tb.coeff, std::move(w));
    }
  }
  return out;
}

Hamiltonian embed(const Hamiltonian& local, int num_qubits, std::span<const int> mapping) {
  if (static_cast<int>(mapping.size()) != local.num_qubits()) {
    throw DimensionMismatch("embed: mapping size differs from local register");
  }
  Hamiltonian out(num_qubits);
  for (const auto& t : local.terms()) out.add(t.coeff, t.word.remapped(num_qubits, mapping));
  return out;
}

MatX realize(const Hamiltonian& h) {
  const int q = h.num_qubits();
  if (q > kMaxRealizeQubits) throw TooLarge("realize: more than 12 qubits");
  const Index dim = Index{1} << q;
  MatX m = MatX::Zero(dim, dim);
  for (const auto& t : h.terms()) {
    const std::uint64_t x = t.word.x_mask();
    const std::uint64_t z = t.word.z_mask();
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(dim); ++i) {
      const double sign = (__builtin_popcountll(i & z) & 1) ? -1.0 : 1.0;
      m(static_cast<Index>(i ^ x), static_cast<Index>(i)) += sign * t.coeff;
    }
  }
  return m;
}

namespace detail {

void decompose_input_check(const MatX& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionMismatch("decompose_yfree: matrix not square");
  const Index dim = m.rows();
  if (dim < 1 || (dim & (dim - 1)) != 0) throw DimensionMismatch("decompose_yfree: dimension not a power of two");
  if (dim > (Index{1} << kMaxDecomposeQubits)) throw TooLarge("decompose_yfree: more than 4 qubits");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) throw NotHermitian("decompose_yfree: matrix not symmetric");
}

Hamiltonian decompose_yfree_impl(const MatX& m, double tol) {
  decompose_input_check(m, tol);
  const Index dim = m.rows();
  const int k = static_cast<int>(std::lround(std::log2(static_cast<double>(dim))));

  int words = 1;
  for (int i = 0; i < k; ++i) words *= 3;

  Hamiltonian out(k);
  MatX reconstruction = MatX::Zero(dim, dim);
  for (int code = 0; code < words; ++code) {
    PauliWord w(k);
    int c = code;
    // Qubit k varies fastest.
    for (int q = k; q >= 1; --q, c /= 3) {
      if (c % 3 == 1) w.set(q, Letter::X);
      if (c % 3 == 2) w.set(q, Letter::Z);
    }
    // trace(P M) = sum_b (-1)^popcount(b & z) M(b, b ^ x)
    const std::uint64_t x = w.x_mask();
    const std::uint64_t z = w.z_mask();
    double tr = 0.0;
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
      const double sign = (__builtin_popcountll(b & z) & 1) ? -1.0 : 1.0;
      tr += sign * m(static_cast<Index>(b), static_cast<Index>(b ^ x));
    }
    const double coeff = tr / static_cast<double>(dim);
    if (coeff == 0.0) continue;
    reconstruction += coeff * word_matrix(w);
    if (std::abs(coeff) >= tol) out.add(coeff, std::move(w));
  }
  const double residual = (m - reconstruction).cwiseAbs().maxCoeff();
  if (residual > tol) {
    throw YFreeViolation("decompose_yfree: residual " + std::to_string(residual) +
                         " after removing Y-free part; matrix has Y content");
  }
  return out;
}

}  // namespace detail

Hamiltonian ccz_decomposition() {
  Hamiltonian id1(1);
  id1.add(1.0, PauliWord(1));
  Hamiltonian z1(1);
  z1.add(1.0, PauliWord(1, {{1, Letter::Z}}));

  // |11><11| = 1/4 (II - IZ - ZI + ZZ) on qubits 1, 2.
  Hamiltonian p11(3);
  p11.add(0.25, PauliWord(3));
  p11.add(-0.25, PauliWord(3, {{2, Letter::Z}}));
  p11.add(-0.25, PauliWord(3, {{1, Letter::Z}}));
  p11.add(0.25, PauliWord(3, {{1, Letter::Z}, {2, Letter::Z}}));

  Hamiltonian identity(3);
  identity.add(1.0, PauliWord(3));

  const std::vector<int> third{3};
  const Hamiltonian z3 = embed(z1, 3, third);

  // (I - P11) (x) I + P11 (x) Z, with duplicates merged.
  const Hamiltonian ccz = identity + (-1.0) * p11 + disjoint_product(p11, z3);
  return canonicalize(ccz);
}

NormBoundReport one_norm_bound_check(const MatX& m, const Hamiltonian& decomposition) {
  Eigen::SelfAdjointEigenSolver<MatX> es(m, Eigen::EigenvaluesOnly);
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  if (norm == 0.0) throw ZeroMatrix("one_norm_bound_check: zero matrix");

  std::map<int, bool> support;
  for (const auto& t : decomposition.terms())
    for (const auto& [q, l] : t.word.letters()) support[q] = true;
  const int k = static_cast<int>(support.size());

  NormBoundReport r{};
  r.k = k;
  r.op_norm = norm;
  r.one_norm = decomposition.one_norm();
  r.lower = norm / std::pow(2.0, 0.5 * k);
  r.upper = std::pow(2.0, k) * norm;
  r.nonzero = decomposition.size();
  // Relative slack for round-off only; the inequalities are tight for e.g. Z.
  const double slack = 1e-12 * std::max(1.0, r.upper);
  r.lower_ok = r.lower <= r.one_norm + slack;
  r.upper_ok = r.one_norm <= r.upper + slack;
  r.count_ok = static_cast<double>(r.nonzero) <= std::pow(4.0, k);
  return r;
}

Hamiltonian canonicalize(const Hamiltonian& h) {
  std::vector<PauliTerm> sorted = h.terms();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PauliTerm& a, const PauliTerm& b) { return canonical_less(a.word, b.word); });
  Hamiltonian out(h.num_qubits());
  std::size_t i = 0;
  while (i < sorted.size()) {
    double sum = 0.0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].word == sorted[i].word; ++j) sum += sorted[j].coeff;
    if (std::abs(sum) > 1e-12) out.add(sum, sorted[i].word);
    i = j;
  }
  return out;
}

double operator_norm(const Hamiltonian& h) {
  if (h.num_qubits() > kMaxRealizeQubits) throw TooLarge("operator_norm: more than 12 qubits");
  if (h.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatX> es(realize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Hamiltonian& h) {
  if (h.num_qubits() > kMaxRealizeQubits) throw TooLarge("min_eigenvalue: more than 12 qubits");
  if (h.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatX> es(realize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void write_hamiltonian(std::ostream& os, const Hamiltonian& h, const HamiltonianMetadata& meta) {
  for (const auto& [key, value] : meta.fields) os << key << ' ' << value << '\n';
  os << "qubits " << h.num_qubits() << '\n';
  char buf[40];
  for (const auto& t : h.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g", t.coeff);
    os << buf;
    for (const auto& [q, l] : t.word.letters()) os << ' ' << q << ':' << letter_char(l);
    os << '\n';
  }
}

Hamiltonian read_hamiltonian(std::istream& is, const std::string& source, HamiltonianMetadata* meta) {
  std::optional<Hamiltonian> h;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;

    if (head == "qubits") {
      int q = -1;
      if (!(ls >> q) || q < 0 || q > 64) throw ParseError(source, lineno, "bad qubit count");
      if (h) throw ParseError(source, lineno, "duplicate qubits header");
      h.emplace(q);
      continue;
    }
    if (head == "ell" || head == "ancillas" || head == "clockT" || head == "component") {
      std::string value;
      ls >> value;
      if (meta) meta->fields[head] = value;
      continue;
    }
    if (!h) throw ParseError(source, lineno, "term before `qubits` header");

    double coeff = 0.0;
    try {
      std::size_t used = 0;
      coeff = std::stod(head, &used);
      if (used != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "bad coefficient '" + head + "'");
    }
    PauliWord w(h->num_qubits());
    std::string tok;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon + 2 != tok.size()) {
        throw ParseError(source, lineno, "bad letter token '" + tok + "'");
      }
      int q = 0;
      try {
        q = std::stoi(tok.substr(0, colon));
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad qubit index in '" + tok + "'");
      }
      const char c = tok[colon + 1];
      if (c != 'X' && c != 'Z') throw ParseError(source, lineno, "letter must be X or Z in '" + tok + "'");
      if (q < 1 || q > h->num_qubits()) throw ParseError(source, lineno, "qubit index out of range in '" + tok + "'");
      if (w.at(q)) throw ParseError(source, lineno, "repeated qubit in term");
      w.set(q, c == 'X' ? Letter::X : Letter::Z);
    }
    if (coeff == 0.0) throw ParseError(source, lineno, "zero coefficient");
    h->add(coeff, std::move(w));
  }
  if (!h) throw ParseError(source, lineno, "missing `qubits` header");
  return *h;
}

}  // namespace qarg
