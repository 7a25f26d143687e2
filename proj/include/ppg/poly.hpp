// Univariate polynomials over Z, Q and F_l.
//
// Coefficient vectors are stored lowest degree first and kept trimmed (no
// trailing zeros); the zero polynomial is the empty vector.
#pragma once

#include "ppg/ring.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ppg {

using ZPoly = std::vector<mpz_class>;
using QPoly = std::vector<mpq_class>;
using FpPoly = std::vector<u64>;

template <typename Poly>
void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

template <typename Poly>
long degree(const Poly& f) {
  return static_cast<long>(f.size()) - 1;
}

// ---------------------------------------------------------------- parsing

/// Parses "x^8-32*x^6+344*x^4-512*x^2+1936" (variable x, integer
/// coefficients, '*' optional).
inline ZPoly parse_poly(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw std::invalid_argument("parse_poly: empty input");
  ZPoly f;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) { throw std::invalid_argument("parse_poly: " + why + " in '" + text + "'"); };
  while (i < s.size()) {
    int sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    } else if (i != 0) {
      fail("expected + or -");
    }
    mpz_class coeff = 1;
    bool have_coeff = false;
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      coeff = mpz_class(s.substr(i, j - i));
      have_coeff = true;
      i = j;
    }
    unsigned long exp = 0;
    if (i < s.size() && s[i] == '*') {
      if (!have_coeff) fail("dangling '*'");
      ++i;
      if (i >= s.size() || s[i] != 'x') fail("expected x after '*'");
    }
    if (i < s.size() && s[i] == 'x') {
      ++i;
      exp = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        std::size_t k = i;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
        if (k == i) fail("missing exponent");
        exp = std::stoul(s.substr(i, k - i));
        i = k;
      }
    } else if (!have_coeff) {
      fail("empty term");
    }
    if (exp > 4096) fail("degree too large");
    if (f.size() <= exp) f.resize(exp + 1, 0);
    f[exp] += sign * coeff;
  }
  trim(f);
  if (f.empty()) throw std::invalid_argument("parse_poly: zero polynomial");
  return f;
}

/// Coefficients listed from the leading one down to the constant.
inline ZPoly poly_from_coeffs_desc(const std::vector<mpz_class>& desc) {
  ZPoly f(desc.rbegin(), desc.rend());
  trim(f);
  if (f.empty()) throw std::invalid_argument("poly_from_coeffs_desc: zero polynomial");
  return f;
}

inline std::string poly_to_string(const ZPoly& f) {
  std::string out;
  for (long k = degree(f); k >= 0; --k) {
    const mpz_class& c = f[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    mpz_class a = abs(c);
    out += c < 0 ? "-" : (out.empty() ? "" : "+");
    if (k == 0 || a != 1) out += a.get_str() + (k > 0 ? "*" : "");
    if (k >= 1) out += "x";
    if (k >= 2) out += "^" + std::to_string(k);
  }
  return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------- over Z and Q

inline ZPoly derivative(const ZPoly& f) {
  ZPoly d;
  for (std::size_t k = 1; k < f.size(); ++k) d.push_back(f[k] * static_cast<unsigned long>(k));
  trim(d);
  return d;
}

inline QPoly to_q(const ZPoly& f) { return QPoly(f.begin(), f.end()); }

inline void qpoly_rem(QPoly& a, const QPoly& b) {
  if (b.empty()) throw std::domain_error("polynomial division by zero");
  while (!a.empty() && a.size() >= b.size()) {
    mpq_class c = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t k = 0; k < b.size(); ++k) a[shift + k] -= c * b[k];
    a.pop_back();
    trim(a);
  }
}

inline QPoly qpoly_gcd(QPoly a, QPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    qpoly_rem(a, b);
    std::swap(a, b);
  }
  return a;
}

inline bool is_squarefree(const ZPoly& f) { return degree(qpoly_gcd(to_q(f), to_q(derivative(f)))) == 0; }

/// Number of distinct real roots via the Sturm sequence.
inline unsigned sturm_real_roots(const ZPoly& f) {
  if (degree(f) < 1) return 0;
  std::vector<QPoly> seq{to_q(f), to_q(derivative(f))};
  while (!seq.back().empty()) {
    QPoly r = seq[seq.size() - 2];
    qpoly_rem(r, seq.back());
    for (auto& c : r) c = -c;
    if (r.empty()) break;
    seq.push_back(std::move(r));
  }
  auto variations = [&](bool at_plus_infinity) {
    int prev = 0;
    unsigned v = 0;
    for (const auto& g : seq) {
      if (g.empty()) continue;
      int s = sgn(g.back());
      if (!at_plus_infinity && (degree(g) % 2 == 1)) s = -s;
      if (prev != 0 && s != prev) ++v;
      prev = s;
    }
    return v;
  };
  return variations(false) - variations(true);
}

/// Determinant by fraction-free Bareiss elimination.
inline mpz_class bareiss_determinant(std::vector<std::vector<mpz_class>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  mpz_class prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && a[r][k] == 0) ++r;
      if (r == n) return 0;
      std::swap(a[r], a[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]);
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline mpz_class resultant(const ZPoly& f, const ZPoly& g) {
  const long m = degree(f);
  const long n = degree(g);
  if (m < 0 || n < 0) return 0;
  const std::size_t size = static_cast<std::size_t>(m + n);
  if (size == 0) return 1;
  std::vector<std::vector<mpz_class>> syl(size, std::vector<mpz_class>(size, 0));
  for (long r = 0; r < n; ++r)
    for (long k = 0; k <= m; ++k) syl[r][r + k] = f[static_cast<std::size_t>(m - k)];
  for (long r = 0; r < m; ++r)
    for (long k = 0; k <= n; ++k) syl[n + r][r + k] = g[static_cast<std::size_t>(n - k)];
  return bareiss_determinant(std::move(syl));
}

/// disc(f) = (-1)^{n(n-1)/2} Res(f, f') / lc(f).
inline mpz_class discriminant(const ZPoly& f) {
  const long n = degree(f);
  if (n < 1) throw std::invalid_argument("discriminant: degree must be >= 1");
  if (n == 1) return 1;
  mpz_class r = resultant(f, derivative(f));
  mpz_divexact(r.get_mpz_t(), r.get_mpz_t(), f.back().get_mpz_t());
  if ((n * (n - 1) / 2) % 2 == 1) r = -r;
  return r;
}

// ---------------------------------------------------------------- over F_l

inline FpPoly reduce_mod(const ZPoly& f, u64 l) {
  FpPoly g;
  g.reserve(f.size());
  const mpz_class L = to_mpz(l);
  for (const auto& c : f) {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), c.get_mpz_t(), L.get_mpz_t());
    g.push_back(mpz_to_u64(r));
  }
  trim(g);
  return g;
}

inline FpPoly fp_add(FpPoly a, const FpPoly& b, u64 l) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t k = 0; k < b.size(); ++k) a[k] = (a[k] + b[k]) % l;
  trim(a);
  return a;
}

inline FpPoly fp_sub(FpPoly a, const FpPoly& b, u64 l) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t k = 0; k < b.size(); ++k) a[k] = (a[k] + l - b[k]) % l;
  trim(a);
  return a;
}

inline FpPoly fp_mul(const FpPoly& a, const FpPoly& b, u64 l) {
  if (a.empty() || b.empty()) return {};
  FpPoly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + mulmod(a[i], b[j], l)) % l;
  }
  trim(c);
  return c;
}

inline FpPoly fp_scale(FpPoly a, u64 s, u64 l) {
  for (auto& c : a) c = mulmod(c, s, l);
  trim(a);
  return a;
}

inline u64 fp_inv(u64 a, u64 l) {
  if (a % l == 0) throw std::domain_error("fp_inv: zero is not invertible");
  return powmod(a, l - 2, l);
}

/// Quotient and remainder of a by b.
inline std::pair<FpPoly, FpPoly> fp_divmod(FpPoly a, const FpPoly& b, u64 l) {
  if (b.empty()) throw std::domain_error("fp_divmod: division by zero");
  trim(a);
  if (a.size() < b.size()) return {{}, a};
  FpPoly q(a.size() - b.size() + 1, 0);
  const u64 inv = fp_inv(b.back(), l);
  while (!a.empty() && a.size() >= b.size()) {
    const std::size_t shift = a.size() - b.size();
    const u64 c = mulmod(a.back(), inv, l);
    q[shift] = c;
    for (std::size_t k = 0; k < b.size(); ++k) a[shift + k] = (a[shift + k] + l - mulmod(c, b[k], l)) % l;
    trim(a);
  }
  trim(q);
  return {q, a};
}

inline FpPoly fp_rem(const FpPoly& a, const FpPoly& b, u64 l) { return fp_divmod(a, b, l).second; }

inline FpPoly fp_monic(FpPoly a, u64 l) {
  if (a.empty()) return a;
  return fp_scale(std::move(a), fp_inv(a.back(), l), l);
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b, u64 l) {
  while (!b.empty()) {
    FpPoly r = fp_rem(a, b, l);
    a = std::move(b);
    b = std::move(r);
  }
  return fp_monic(std::move(a), l);
}

/// Returns (g, s, t) with s a + t b = g monic.
inline std::tuple<FpPoly, FpPoly, FpPoly> fp_xgcd(FpPoly a, FpPoly b, u64 l) {
  FpPoly s0{1}, s1{}, t0{}, t1{1};
  while (!b.empty()) {
    auto [q, r] = fp_divmod(a, b, l);
    a = std::move(b);
    b = std::move(r);
    FpPoly s2 = fp_sub(s0, fp_mul(q, s1, l), l);
    FpPoly t2 = fp_sub(t0, fp_mul(q, t1, l), l);
    s0 = std::move(s1);
    s1 = std::move(s2);
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  const u64 inv = fp_inv(a.back(), l);
  return {fp_scale(a, inv, l), fp_scale(s0, inv, l), fp_scale(t0, inv, l)};
}

inline FpPoly fp_derivative(const FpPoly& f, u64 l) {
  FpPoly d;
  for (std::size_t k = 1; k < f.size(); ++k) d.push_back(mulmod(f[k], k % l, l));
  trim(d);
  return d;
}

/// base^e mod modulus.
inline FpPoly fp_powmod(FpPoly base, const mpz_class& e, const FpPoly& modulus, u64 l) {
  FpPoly result = fp_rem(FpPoly{1}, modulus, l);
  base = fp_rem(base, modulus, l);
  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (std::size_t b = bits; b-- > 0;) {
    result = fp_rem(fp_mul(result, result, l), modulus, l);
    if (mpz_tstbit(e.get_mpz_t(), b) != 0) result = fp_rem(fp_mul(result, base, l), modulus, l);
  }
  return result;
}

/// Squarefree decomposition of a monic f: pairs (g_i, i) with f = prod g_i^i.
inline std::vector<std::pair<FpPoly, unsigned>> fp_squarefree_decomposition(const FpPoly& f, u64 l) {
  std::vector<std::pair<FpPoly, unsigned>> out;
  if (degree(f) < 1) return out;
  FpPoly df = fp_derivative(f, l);
  if (df.empty()) {
    // f is an l-th power: f(x) = g(x^l) = g(x)^l over F_l.
    FpPoly g;
    for (std::size_t k = 0; k < f.size(); k += static_cast<std::size_t>(l)) g.push_back(f[k]);
    for (auto [h, mult] : fp_squarefree_decomposition(g, l)) out.emplace_back(h, mult * static_cast<unsigned>(l));
    return out;
  }
  FpPoly c = fp_gcd(f, df, l);
  FpPoly w = fp_divmod(f, c, l).first;
  unsigned i = 1;
  while (degree(w) > 0) {
    FpPoly y = fp_gcd(w, c, l);
    FpPoly z = fp_divmod(w, y, l).first;
    if (degree(z) > 0) out.emplace_back(fp_monic(z, l), i);
    w = y;
    c = fp_divmod(c, y, l).first;
    ++i;
  }
  if (degree(c) > 0) {
    // remaining factor is an l-th power
    FpPoly g;
    for (std::size_t k = 0; k < c.size(); k += static_cast<std::size_t>(l)) g.push_back(c[k]);
    for (auto [h, mult] : fp_squarefree_decomposition(g, l)) out.emplace_back(h, mult * static_cast<unsigned>(l));
  }
  return out;
}

/// Distinct-degree factorization of a squarefree monic f: (product of all
/// irreducible factors of degree d, d).
inline std::vector<std::pair<FpPoly, unsigned>> fp_distinct_degree(FpPoly f, u64 l) {
  std::vector<std::pair<FpPoly, unsigned>> out;
  const FpPoly x{0, 1};
  FpPoly h = fp_rem(x, f, l);
  const mpz_class L = to_mpz(l);
  unsigned d = 1;
  while (degree(f) >= 2 * static_cast<long>(d)) {
    h = fp_powmod(h, L, f, l);
    FpPoly g = fp_gcd(f, fp_sub(h, x, l), l);
    if (degree(g) > 0) {
      out.emplace_back(g, d);
      f = fp_divmod(f, g, l).first;
      h = fp_rem(h, f, l);
    }
    ++d;
  }
  if (degree(f) > 0) out.emplace_back(fp_monic(f, l), static_cast<unsigned>(degree(f)));
  return out;
}

/// Equal-degree splitting (Cantor-Zassenhaus; trace map for l = 2).
inline std::vector<FpPoly> fp_equal_degree(const FpPoly& f, unsigned d, u64 l, std::mt19937_64& rng) {
  if (static_cast<unsigned long>(degree(f)) == d) return {fp_monic(f, l)};
  std::uniform_int_distribution<u64> coeff(0, l - 1);
  while (true) {
    FpPoly a(static_cast<std::size_t>(degree(f)), 0);
    for (auto& c : a) c = coeff(rng);
    trim(a);
    if (degree(a) < 1) continue;
    FpPoly b;
    if (l == 2) {
      FpPoly term = a;
      b = a;
      for (unsigned k = 1; k < d; ++k) {
        term = fp_rem(fp_mul(term, term, l), f, l);
        b = fp_add(b, term, l);
      }
    } else {
      mpz_class e;
      mpz_ui_pow_ui(e.get_mpz_t(), static_cast<unsigned long>(l), d);
      e = (e - 1) / 2;
      b = fp_sub(fp_powmod(a, e, f, l), FpPoly{1}, l);
    }
    FpPoly g = fp_gcd(f, b, l);
    if (degree(g) > 0 && degree(g) < degree(f)) {
      auto left = fp_equal_degree(g, d, l, rng);
      auto right = fp_equal_degree(fp_divmod(f, g, l).first, d, l, rng);
      left.insert(left.end(), right.begin(), right.end());
      return left;
    }
  }
}

/// Complete factorization of f mod l into monic irreducibles with
/// multiplicity; deterministic for a fixed seed.
inline std::vector<std::pair<FpPoly, unsigned>> fp_factor(const FpPoly& f, u64 l, u64 seed = 1) {
  std::vector<std::pair<FpPoly, unsigned>> out;
  std::mt19937_64 rng(seed);
  for (const auto& [sf, mult] : fp_squarefree_decomposition(fp_monic(f, l), l))
    for (const auto& [part, d] : fp_distinct_degree(sf, l))
      for (auto& irr : fp_equal_degree(part, d, l, rng)) out.emplace_back(std::move(irr), mult);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return std::lexicographical_compare(a.first.rbegin(), a.first.rend(), b.first.rbegin(), b.first.rend());
  });
  return out;
}

// ---------------------------------------------------------------- irreducibility over Z

namespace detail {

inline ZPoly zmul(const ZPoly& a, const ZPoly& b) {
  if (a.empty() || b.empty()) return {};
  ZPoly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  trim(c);
  return c;
}

inline ZPoly zmod(ZPoly a, const mpz_class& M) {
  for (auto& c : a) mpz_fdiv_r(c.get_mpz_t(), c.get_mpz_t(), M.get_mpz_t());
  trim(a);
  return a;
}

inline ZPoly from_fp(const FpPoly& f) { return ZPoly(f.begin(), f.end()); }

/// Exact division of monic-divisor polynomials over Z; nullopt if not exact.
inline std::optional<ZPoly> zdiv_exact(ZPoly a, const ZPoly& b) {
  if (b.empty() || b.back() == 0) return std::nullopt;
  trim(a);
  if (a.size() < b.size()) return a.empty() ? std::optional<ZPoly>(ZPoly{}) : std::nullopt;
  ZPoly q(a.size() - b.size() + 1, 0);
  while (!a.empty() && a.size() >= b.size()) {
    const std::size_t shift = a.size() - b.size();
    if (mpz_divisible_p(a.back().get_mpz_t(), b.back().get_mpz_t()) == 0) return std::nullopt;
    mpz_class c = a.back() / b.back();
    q[shift] = c;
    for (std::size_t k = 0; k < b.size(); ++k) a[shift + k] -= c * b[k];
    trim(a);
  }
  if (!a.empty()) return std::nullopt;
  trim(q);
  return q;
}

/// Lifts f = g h (mod l), g and h monic and coprime mod l, to mod l^k.
inline std::pair<ZPoly, ZPoly> hensel_lift(const ZPoly& f, ZPoly g, ZPoly h, u64 l, unsigned k) {
  auto [one, s, t] = fp_xgcd(reduce_mod(g, l), reduce_mod(h, l), l);
  const mpz_class L = to_mpz(l);
  mpz_class lj = L;
  for (unsigned j = 1; j < k; ++j) {
    ZPoly diff = f;
    ZPoly gh = zmul(g, h);
    if (diff.size() < gh.size()) diff.resize(gh.size(), 0);
    for (std::size_t i = 0; i < gh.size(); ++i) diff[i] -= gh[i];
    trim(diff);
    for (auto& c : diff) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), lj.get_mpz_t());
    FpPoly e = reduce_mod(diff, l);
    auto [q, dg] = fp_divmod(fp_mul(e, t, l), reduce_mod(g, l), l);
    FpPoly dh = fp_add(fp_mul(e, s, l), fp_mul(q, reduce_mod(h, l), l), l);
    ZPoly DG = from_fp(dg);
    ZPoly DH = from_fp(dh);
    if (g.size() < DG.size()) g.resize(DG.size(), 0);
    for (std::size_t i = 0; i < DG.size(); ++i) g[i] += lj * DG[i];
    if (h.size() < DH.size()) h.resize(DH.size(), 0);
    for (std::size_t i = 0; i < DH.size(); ++i) h[i] += lj * DH[i];
    lj *= L;
    g = zmod(g, lj);
    h = zmod(h, lj);
  }
  return {g, h};
}

}  // namespace detail

/// Exact irreducibility test for a monic f over Z: factor mod a good prime,
/// Hensel-lift past the Mignotte bound, and try every recombination.
inline bool is_irreducible_monic(const ZPoly& f) {
  const long n = degree(f);
  if (n < 1) throw std::invalid_argument("is_irreducible_monic: degree must be >= 1");
  if (f.back() != 1) throw std::invalid_argument("is_irreducible_monic: polynomial must be monic");
  if (n == 1) return true;
  if (!is_squarefree(f)) return false;
  const mpz_class disc = discriminant(f);

  // Pick the good prime with the fewest factors among a handful.
  u64 best_l = 0;
  std::vector<std::pair<FpPoly, unsigned>> best;
  unsigned tried = 0;
  for (u64 l = 3; tried < 12 && l < 100000; l += 2) {
    if (!is_prime_u64(l)) continue;
    if (mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(l)) != 0) continue;
    ++tried;
    auto fac = fp_factor(reduce_mod(f, l), l);
    if (fac.size() == 1) return true;
    if (best_l == 0 || fac.size() < best.size()) {
      best_l = l;
      best = std::move(fac);
    }
  }
  if (best_l == 0) throw std::runtime_error("is_irreducible_monic: no good prime found");

  // Mignotte: coefficients of any factor are bounded by 2^n ||f||_2.
  mpz_class norm2 = 0;
  for (const auto& c : f) norm2 += c * c;
  mpz_class bound = sqrt(norm2) + 1;
  bound <<= static_cast<mp_bitcnt_t>(n);
  const mpz_class L = to_mpz(best_l);
  unsigned k = 1;
  mpz_class M = L;
  while (M <= 2 * bound) {
    M *= L;
    ++k;
  }

  // Multifactor lift by peeling one factor at a time.
  std::vector<ZPoly> lifted;
  ZPoly rest = f;
  for (std::size_t i = 0; i + 1 < best.size(); ++i) {
    FpPoly others{1};
    for (std::size_t j = i + 1; j < best.size(); ++j) others = fp_mul(others, best[j].first, best_l);
    auto [g, h] = detail::hensel_lift(rest, detail::from_fp(best[i].first), detail::from_fp(others), best_l, k);
    lifted.push_back(g);
    rest = h;
  }
  lifted.push_back(rest);

  const std::size_t r = lifted.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << r); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) > r / 2) continue;
    ZPoly g{1};
    for (std::size_t i = 0; i < r; ++i)
      if ((mask >> i) & 1U) g = detail::zmod(detail::zmul(g, lifted[i]), M);
    for (auto& c : g)
      if (c > M / 2) c -= M;
    if (degree(g) >= 1 && detail::zdiv_exact(f, g)) return false;
  }
  return true;
}

}  // namespace ppg
