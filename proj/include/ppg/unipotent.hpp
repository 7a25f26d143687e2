// Upper unitriangular matrix groups U_{n+1}(Z/p^m).
//
// Entries are addressed with 1-based indices (i, j), 1 <= i < j <= n+1, so
// that E_{12} is the first superdiagonal position. The diagonal is implicit.
#pragma once

#include "ppg/ring.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg {

inline constexpr std::size_t kMaxUniSize = 32;

class UniShape {
 public:
  UniShape(std::size_t n, const PrimePower& ring) : n_(n), ring_(ring) {
    if (n < 1) throw std::invalid_argument("UniShape: n must be >= 1");
    if (n > kMaxUniSize) throw std::invalid_argument("UniShape: n must be <= 32");
  }

  /// Matrices are (n+1) x (n+1).
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_ + 1; }
  [[nodiscard]] const PrimePower& ring() const noexcept { return ring_; }
  [[nodiscard]] std::size_t num_entries() const noexcept { return size() * n_ / 2; }

  /// Packed row-major position of (i, j).
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const {
    if (i < 1 || j > size() || i >= j) throw std::out_of_range("UniShape: position is not strictly upper");
    const std::size_t N = size();
    return (i - 1) * N - (i - 1) * i / 2 + (j - i - 1);
  }

  friend bool operator==(const UniShape& a, const UniShape& b) noexcept {
    return a.n_ == b.n_ && a.ring_ == b.ring_;
  }

 private:
  std::size_t n_;
  PrimePower ring_;
};

class UniMatrix {
 public:
  explicit UniMatrix(const UniShape& shape) : shape_(shape), upper_(shape.num_entries(), 0) {}

  static UniMatrix identity(const UniShape& shape) { return UniMatrix(shape); }

  /// I + value * E_{ij}.
  static UniMatrix elementary(const UniShape& shape, std::size_t i, std::size_t j, i64 value = 1) {
    UniMatrix m(shape);
    m.set(i, j, shape.ring().reduce(value));
    return m;
  }

  /// Builds from the row-major strictly-upper literal used in witness files.
  static UniMatrix from_literal(const UniShape& shape, const std::vector<u64>& literal) {
    if (literal.size() != shape.num_entries()) throw std::invalid_argument("UniMatrix: literal has wrong length");
    UniMatrix m(shape);
    for (std::size_t k = 0; k < literal.size(); ++k) {
      if (literal[k] >= shape.ring().modulus()) throw std::invalid_argument("UniMatrix: literal entry out of range");
      m.upper_[k] = literal[k];
    }
    return m;
  }

  [[nodiscard]] const UniShape& shape() const noexcept { return shape_; }
  [[nodiscard]] const std::vector<u64>& literal() const noexcept { return upper_; }

  [[nodiscard]] u64 at(std::size_t i, std::size_t j) const {
    if (i == j) return 1;
    if (i > j) return 0;
    return upper_[shape_.index(i, j)];
  }
  void set(std::size_t i, std::size_t j, u64 value) {
    upper_[shape_.index(i, j)] = value % shape_.ring().modulus();
  }
  void add_to(std::size_t i, std::size_t j, u64 delta) {
    auto& e = upper_[shape_.index(i, j)];
    e = shape_.ring().add(e, delta % shape_.ring().modulus());
  }

  [[nodiscard]] bool is_identity() const noexcept {
    for (u64 x : upper_)
      if (x != 0) return false;
    return true;
  }

  /// True iff every entry at offset j - i < k vanishes.
  [[nodiscard]] bool vanishes_below_offset(std::size_t k) const {
    const std::size_t N = shape_.size();
    for (std::size_t off = 1; off < k && off < N; ++off)
      for (std::size_t i = 1; i + off <= N; ++i)
        if (at(i, i + off) != 0) return false;
    return true;
  }

  friend bool operator==(const UniMatrix& a, const UniMatrix& b) noexcept {
    return a.shape_ == b.shape_ && a.upper_ == b.upper_;
  }
  friend bool operator!=(const UniMatrix& a, const UniMatrix& b) noexcept { return !(a == b); }

 private:
  UniShape shape_;
  std::vector<u64> upper_;
};

inline void require_same_shape(const UniMatrix& a, const UniMatrix& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("unipotent: shape mismatch");
}

inline UniMatrix compose(const UniMatrix& a, const UniMatrix& b) {
  require_same_shape(a, b);
  const UniShape& S = a.shape();
  const PrimePower& R = S.ring();
  const std::size_t N = S.size();
  UniMatrix c(S);
  for (std::size_t i = 1; i <= N; ++i) {
    for (std::size_t j = i + 1; j <= N; ++j) {
      u64 acc = R.add(a.at(i, j), b.at(i, j));
      for (std::size_t k = i + 1; k < j; ++k) {
        u64 x = a.at(i, k);
        if (x != 0) acc = R.add(acc, R.mul(x, b.at(k, j)));
      }
      c.set(i, j, acc);
    }
  }
  return c;
}

inline UniMatrix operator*(const UniMatrix& a, const UniMatrix& b) { return compose(a, b); }

/// Back-substitution: x_{ij} = -a_{ij} - sum_{i<k<j} a_{ik} x_{kj}.
inline UniMatrix invert(const UniMatrix& a) {
  const UniShape& S = a.shape();
  const PrimePower& R = S.ring();
  const std::size_t N = S.size();
  UniMatrix x(S);
  for (std::size_t i = N; i-- > 1;) {
    for (std::size_t j = i + 1; j <= N; ++j) {
      u64 acc = a.at(i, j);
      for (std::size_t k = i + 1; k < j; ++k) {
        u64 aik = a.at(i, k);
        if (aik != 0) acc = R.add(acc, R.mul(aik, x.at(k, j)));
      }
      x.set(i, j, R.neg(acc));
    }
  }
  return x;
}

/// log_p of a multiple of the group exponent: m + ceil(log_p n).
inline unsigned exponent_log(const UniShape& shape) {
  const u64 p = shape.ring().p();
  unsigned c = 0;
  u128 pk = 1;
  while (pk < shape.n()) {
    pk *= p;
    ++c;
  }
  return shape.ring().m() + c;
}

inline UniMatrix power_unsigned(UniMatrix base, const mpz_class& e) {
  UniMatrix result = UniMatrix::identity(base.shape());
  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (std::size_t b = 0; b < bits; ++b) {
    if (mpz_tstbit(e.get_mpz_t(), b) != 0) result = compose(result, base);
    if (b + 1 < bits) base = compose(base, base);
  }
  return result;
}

/// a^e for any integer e. The exponent is reduced modulo
/// p^(m + ceil(log_p n)), a multiple of the exponent of U_{n+1}(Z/p^m).
inline UniMatrix power(const UniMatrix& a, const mpz_class& e) {
  mpz_class period;
  mpz_ui_pow_ui(period.get_mpz_t(), static_cast<unsigned long>(a.shape().ring().p()), exponent_log(a.shape()));
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), e.get_mpz_t(), period.get_mpz_t());
  return power_unsigned(a, r);
}

inline UniMatrix power(const UniMatrix& a, i64 e) { return power(a, to_mpz(e)); }

/// a b a^-1 b^-1.
inline UniMatrix commutator(const UniMatrix& a, const UniMatrix& b) {
  require_same_shape(a, b);
  return compose(compose(a, b), compose(invert(a), invert(b)));
}

/// Superdiagonal (M_{1,2}, ..., M_{n,n+1}) reduced mod p.
inline std::vector<u64> phi_m(const UniMatrix& a) {
  const std::size_t n = a.shape().n();
  const u64 p = a.shape().ring().p();
  std::vector<u64> out(n);
  for (std::size_t u = 1; u <= n; ++u) out[u - 1] = a.at(u, u + 1) % p;
  return out;
}

/// Burnside basis test: the images span the Frattini quotient F_p^n.
inline std::size_t frattini_rank(const std::vector<UniMatrix>& gens) {
  if (gens.empty()) return 0;
  std::vector<std::vector<u64>> rows;
  rows.reserve(gens.size());
  for (const auto& g : gens) {
    require_same_shape(g, gens.front());
    rows.push_back(phi_m(g));
  }
  return fp_rank(rows, gens.front().shape().ring().p());
}

inline bool is_generating(const std::vector<UniMatrix>& gens) {
  return !gens.empty() && frattini_rank(gens) == gens.front().shape().n();
}

/// Element of U_{n+1}(F_p) / Z_{n+1}: the (1, n+1) entry is dropped.
class QuotientUniMatrix {
 public:
  explicit QuotientUniMatrix(const UniMatrix& rep) : rep_(rep) {
    if (!rep.shape().ring().is_field()) throw std::invalid_argument("QuotientUniMatrix: ring must be F_p");
    rep_.set(1, rep.shape().size(), 0);
  }

  static QuotientUniMatrix identity(const UniShape& shape) { return QuotientUniMatrix(UniMatrix::identity(shape)); }

  [[nodiscard]] const UniShape& shape() const noexcept { return rep_.shape(); }
  /// Canonical representative with zero corner.
  [[nodiscard]] const UniMatrix& representative() const noexcept { return rep_; }
  [[nodiscard]] u64 at(std::size_t i, std::size_t j) const {
    if (i == 1 && j == shape().size()) throw std::out_of_range("QuotientUniMatrix: corner entry is not defined");
    return rep_.at(i, j);
  }
  [[nodiscard]] bool is_identity() const noexcept { return rep_.is_identity(); }

  friend QuotientUniMatrix compose(const QuotientUniMatrix& a, const QuotientUniMatrix& b) {
    return QuotientUniMatrix(compose(a.rep_, b.rep_));
  }
  friend bool operator==(const QuotientUniMatrix& a, const QuotientUniMatrix& b) noexcept {
    return a.rep_ == b.rep_;
  }

 private:
  UniMatrix rep_;
};

/// The canonical surjection psi: U_{n+1}(F_p) -> U_{n+1}(F_p) / Z_{n+1}.
inline QuotientUniMatrix project_quotient(const UniMatrix& a) {
  if (!a.shape().ring().is_field()) throw std::invalid_argument("project_quotient: ring must be F_p");
  return QuotientUniMatrix(a);
}

}  // namespace ppg
