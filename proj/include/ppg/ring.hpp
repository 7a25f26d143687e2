// Exact arithmetic in Z/p^m and F_p, with linear algebra over both.
#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 mod) {
  return static_cast<u64>(static_cast<u128>(a) * b % mod);
}

inline u64 powmod(u64 base, u64 exp, u64 mod) {
  u64 result = 1 % mod;
  base %= mod;
  while (exp != 0) {
    if (exp & 1U) result = mulmod(result, base, mod);
    base = mulmod(base, base, mod);
    exp >>= 1U;
  }
  return result;
}

/// base^exp without reduction; throws on 64-bit overflow.
inline u64 ipow(u64 base, unsigned exp) {
  u64 r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base) throw std::overflow_error("ipow: overflow");
    r *= base;
  }
  return r;
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Largest e with p^e | x. x must be nonzero.
inline unsigned valuation(const mpz_class& x, u64 p) {
  if (x == 0) throw std::domain_error("valuation of 0 over the integers is infinite");
  if (p < 2) throw std::invalid_argument("valuation base must be >= 2");
  mpz_class y = abs(x);
  mpz_class pp;
  mpz_set_ui(pp.get_mpz_t(), static_cast<unsigned long>(p));
  unsigned e = 0;
  while (mpz_divisible_p(y.get_mpz_t(), pp.get_mpz_t()) != 0) {
    y /= pp;
    ++e;
  }
  return e;
}

inline mpz_class to_mpz(u64 v) {
  mpz_class r;
  mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return r;
}

inline mpz_class to_mpz(i64 v) {
  if (v >= 0) return to_mpz(static_cast<u64>(v));
  // -(v+1) avoids overflow at INT64_MIN
  return -to_mpz(static_cast<u64>(-(v + 1))) - 1;
}

/// Value of an mpz known to lie in [0, 2^64).
inline u64 mpz_to_u64(const mpz_class& v) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) throw std::out_of_range("integer does not fit in 64 bits");
  u64 out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

/// The ring Z/p^m. p must be prime and p^m < 2^63 so that sums and
/// 128-bit products never overflow.
class PrimePower {
 public:
  PrimePower(u64 p, unsigned m) : p_(p), m_(m) {
    if (!is_prime_u64(p)) throw std::invalid_argument("PrimePower: " + std::to_string(p) + " is not prime");
    if (m < 1) throw std::invalid_argument("PrimePower: exponent must be >= 1");
    u128 acc = 1;
    for (unsigned i = 0; i < m; ++i) {
      acc *= p;
      if (acc >= (static_cast<u128>(1) << 63)) throw std::invalid_argument("PrimePower: p^m must be < 2^63");
    }
    modulus_ = static_cast<u64>(acc);
  }

  [[nodiscard]] u64 p() const noexcept { return p_; }
  [[nodiscard]] unsigned m() const noexcept { return m_; }
  [[nodiscard]] u64 modulus() const noexcept { return modulus_; }
  [[nodiscard]] bool is_field() const noexcept { return m_ == 1; }

  [[nodiscard]] u64 reduce(i64 v) const noexcept {
    i64 r = v % static_cast<i64>(modulus_);
    return static_cast<u64>(r < 0 ? r + static_cast<i64>(modulus_) : r);
  }
  [[nodiscard]] u64 reduce(const mpz_class& v) const {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), v.get_mpz_t(), to_mpz(modulus_).get_mpz_t());
    return mpz_to_u64(r);
  }

  [[nodiscard]] u64 add(u64 a, u64 b) const noexcept {
    u64 s = a + b;
    return s >= modulus_ ? s - modulus_ : s;
  }
  [[nodiscard]] u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + modulus_ - b; }
  [[nodiscard]] u64 neg(u64 a) const noexcept { return a == 0 ? 0 : modulus_ - a; }
  [[nodiscard]] u64 mul(u64 a, u64 b) const noexcept { return mulmod(a, b, modulus_); }

  /// p-adic valuation of a residue; 0 is saturated at m.
  [[nodiscard]] unsigned valuation(u64 a) const noexcept {
    if (a == 0) return m_;
    unsigned e = 0;
    while (a % p_ == 0) {
      a /= p_;
      ++e;
    }
    return e;
  }

  [[nodiscard]] bool is_unit(u64 a) const noexcept { return a % p_ != 0; }

  [[nodiscard]] u64 inverse(u64 a) const {
    if (!is_unit(a)) throw std::domain_error("inverse of a non-unit in Z/p^m");
    // Euler: a^(phi(p^m) - 1)
    u64 phi = modulus_ / p_ * (p_ - 1);
    return powmod(a, phi - 1, modulus_);
  }

  /// p^e as a residue (0 once e >= m).
  [[nodiscard]] u64 prime_power(unsigned e) const noexcept {
    if (e >= m_) return 0;
    u64 r = 1;
    for (unsigned i = 0; i < e; ++i) r *= p_;
    return r;
  }

  friend bool operator==(const PrimePower& a, const PrimePower& b) noexcept {
    return a.p_ == b.p_ && a.m_ == b.m_;
  }

 private:
  u64 p_;
  unsigned m_;
  u64 modulus_ = 0;
};

/// An element of Z/p^m.
class ZMod {
 public:
  ZMod(const PrimePower& ring, i64 v) : ring_(ring), value_(ring.reduce(v)) {}
  ZMod(const PrimePower& ring, const mpz_class& v) : ring_(ring), value_(ring.reduce(v)) {}

  static ZMod from_residue(const PrimePower& ring, u64 residue) {
    ZMod z(ring, 0);
    z.value_ = residue % ring.modulus();
    return z;
  }

  [[nodiscard]] u64 value() const noexcept { return value_; }
  [[nodiscard]] const PrimePower& ring() const noexcept { return ring_; }
  [[nodiscard]] unsigned valuation() const noexcept { return ring_.valuation(value_); }
  [[nodiscard]] bool is_unit() const noexcept { return ring_.is_unit(value_); }
  [[nodiscard]] ZMod inverse() const { return from_residue(ring_, ring_.inverse(value_)); }

  friend ZMod operator+(const ZMod& a, const ZMod& b) {
    check_same(a, b);
    return from_residue(a.ring_, a.ring_.add(a.value_, b.value_));
  }
  friend ZMod operator-(const ZMod& a, const ZMod& b) {
    check_same(a, b);
    return from_residue(a.ring_, a.ring_.sub(a.value_, b.value_));
  }
  friend ZMod operator*(const ZMod& a, const ZMod& b) {
    check_same(a, b);
    return from_residue(a.ring_, a.ring_.mul(a.value_, b.value_));
  }
  ZMod operator-() const { return from_residue(ring_, ring_.neg(value_)); }

  friend bool operator==(const ZMod& a, const ZMod& b) noexcept {
    return a.ring_ == b.ring_ && a.value_ == b.value_;
  }
  friend std::ostream& operator<<(std::ostream& os, const ZMod& z) {
    return os << z.value_ << " (mod " << z.ring_.modulus() << ")";
  }

 private:
  static void check_same(const ZMod& a, const ZMod& b) {
    if (!(a.ring_ == b.ring_)) throw std::invalid_argument("ZMod: ring mismatch");
  }

  PrimePower ring_;
  u64 value_;
};

inline unsigned valuation(const ZMod& x) { return x.valuation(); }

/// A x = b over Z/p^m, A stored row-major.
struct LinSystem {
  PrimePower ring;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<u64> matrix;
  std::vector<u64> rhs;

  LinSystem(const PrimePower& r, std::size_t nrows, std::size_t ncols)
      : ring(r), rows(nrows), cols(ncols), matrix(nrows * ncols, 0), rhs(nrows, 0) {}

  u64& at(std::size_t i, std::size_t j) { return matrix[i * cols + j]; }
  [[nodiscard]] u64 at(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
};

/// Solution set = particular + Z/p^m-span(kernel_basis).
struct AffineSolution {
  std::vector<u64> particular;
  std::vector<std::vector<u64>> kernel_basis;
};

/// Additive order of a vector over Z/p^m, as p^k.
inline u64 additive_order(const PrimePower& ring, const std::vector<u64>& v) {
  unsigned min_val = ring.m();
  for (u64 x : v) min_val = std::min(min_val, ring.valuation(x));
  u64 order = 1;
  for (unsigned i = min_val; i < ring.m(); ++i) order *= ring.p();
  return order;
}

/// Solves A x = b over Z/p^m by diagonalising A with row and column
/// operations. Each pivot is the entry of minimal valuation in the remaining
/// submatrix, scanning columns left to right and rows top to bottom; the
/// first strict minimum wins. Returns nullopt iff the system is inconsistent.
inline std::optional<AffineSolution> solve_affine(const LinSystem& sys) {
  const PrimePower& R = sys.ring;
  const std::size_t rows = sys.rows;
  const std::size_t cols = sys.cols;
  if (sys.matrix.size() != rows * cols || sys.rhs.size() != rows)
    throw std::invalid_argument("solve_affine: inconsistent dimensions");

  std::vector<u64> a = sys.matrix;
  std::vector<u64> b = sys.rhs;
  auto A = [&](std::size_t i, std::size_t j) -> u64& { return a[i * cols + j]; };
  // Column transform Q (cols x cols), x = Q y.
  std::vector<u64> q(cols * cols, 0);
  for (std::size_t j = 0; j < cols; ++j) q[j * cols + j] = 1;
  auto Q = [&](std::size_t i, std::size_t j) -> u64& { return q[i * cols + j]; };

  std::vector<unsigned> pivot_val;
  std::vector<u64> pivot_unit_inv;
  std::size_t rank = 0;
  while (rank < rows && rank < cols) {
    std::size_t best_i = rows;
    std::size_t best_j = cols;
    unsigned best_v = R.m();
    for (std::size_t j = rank; j < cols && best_v > 0; ++j) {
      for (std::size_t i = rank; i < rows; ++i) {
        unsigned v = R.valuation(A(i, j));
        if (v < best_v) {
          best_v = v;
          best_i = i;
          best_j = j;
          if (v == 0) break;
        }
      }
    }
    if (best_i == rows) break;  // remaining block is zero

    if (best_i != rank) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(A(best_i, j), A(rank, j));
      std::swap(b[best_i], b[rank]);
    }
    if (best_j != rank) {
      for (std::size_t i = 0; i < rows; ++i) std::swap(A(i, best_j), A(i, rank));
      for (std::size_t i = 0; i < cols; ++i) std::swap(Q(i, best_j), Q(i, rank));
    }

    const u64 scale = R.prime_power(best_v);
    const u64 unit = A(rank, rank) / scale;  // coprime to p
    const u64 unit_inv = R.inverse(unit % R.modulus());

    for (std::size_t i = rank + 1; i < rows; ++i) {
      if (A(i, rank) == 0) continue;
      u64 f = R.mul(A(i, rank) / scale, unit_inv);
      for (std::size_t j = rank; j < cols; ++j) A(i, j) = R.sub(A(i, j), R.mul(f, A(rank, j)));
      b[i] = R.sub(b[i], R.mul(f, b[rank]));
    }
    for (std::size_t j = rank + 1; j < cols; ++j) {
      if (A(rank, j) == 0) continue;
      u64 g = R.mul(A(rank, j) / scale, unit_inv);
      for (std::size_t i = rank; i < rows; ++i) A(i, j) = R.sub(A(i, j), R.mul(g, A(i, rank)));
      for (std::size_t i = 0; i < cols; ++i) Q(i, j) = R.sub(Q(i, j), R.mul(g, Q(i, rank)));
    }
    pivot_val.push_back(best_v);
    pivot_unit_inv.push_back(unit_inv);
    ++rank;
  }

  for (std::size_t i = rank; i < rows; ++i)
    if (b[i] != 0) return std::nullopt;

  std::vector<u64> y(cols, 0);
  for (std::size_t i = 0; i < rank; ++i) {
    if (R.valuation(b[i]) < pivot_val[i]) return std::nullopt;
    u64 scale = R.prime_power(pivot_val[i]);
    y[i] = R.mul(b[i] / scale, pivot_unit_inv[i]);
  }

  auto apply_q = [&](const std::vector<u64>& vec) {
    std::vector<u64> out(cols, 0);
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (vec[j] != 0) out[i] = R.add(out[i], R.mul(Q(i, j), vec[j]));
    return out;
  };

  AffineSolution sol;
  sol.particular = apply_q(y);
  for (std::size_t i = 0; i < rank; ++i) {
    if (pivot_val[i] == 0) continue;
    std::vector<u64> e(cols, 0);
    e[i] = R.prime_power(R.m() - pivot_val[i]);
    sol.kernel_basis.push_back(apply_q(e));
  }
  for (std::size_t j = rank; j < cols; ++j) {
    std::vector<u64> e(cols, 0);
    e[j] = 1;
    sol.kernel_basis.push_back(apply_q(e));
  }
  return sol;
}

/// Row rank over F_p; entries are reduced mod p first.
inline std::size_t fp_rank(std::vector<std::vector<u64>> rows, u64 p) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  for (auto& r : rows) {
    if (r.size() != cols) throw std::invalid_argument("fp_rank: ragged matrix");
    for (u64& x : r) x %= p;
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    u64 inv = powmod(rows[rank][c], p - 2, p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == rank || rows[i][c] == 0) continue;
      u64 f = mulmod(rows[i][c], inv, p);
      for (std::size_t j = c; j < cols; ++j) rows[i][j] = (rows[i][j] + p - mulmod(f, rows[rank][j], p)) % p;
    }
    ++rank;
  }
  return rank;
}

}  // namespace ppg
