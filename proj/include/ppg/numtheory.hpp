// Arithmetic of the base field: signatures, splitting of rational primes,
// tame levels, Z_p-rank bookkeeping and ray-class shadows over Q.
#pragma once

#include "ppg/poly.hpp"
#include "ppg/ring.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ppg {

class NotSquarefree : public std::invalid_argument {
 public:
  NotSquarefree() : std::invalid_argument("polynomial is not squarefree") {}
};

class NumberField {
 public:
  explicit NumberField(ZPoly f) : f_(std::move(f)) {
    trim(f_);
    if (ppg::degree(f_) < 1) throw std::invalid_argument("NumberField: degree must be >= 1");
    if (f_.back() != 1) throw std::invalid_argument("NumberField: defining polynomial must be monic");
    if (!is_irreducible_monic(f_)) throw std::invalid_argument("NumberField: " + poly_to_string(f_) + " is reducible");
    disc_ = ppg::discriminant(f_);
  }

  const ZPoly& poly() const { return f_; }
  unsigned degree() const { return static_cast<unsigned>(ppg::degree(f_)); }
  const mpz_class& discriminant() const { return disc_; }

 private:
  ZPoly f_;
  mpz_class disc_;
};

struct Signature {
  unsigned r1 = 0;
  unsigned r2 = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature(const ZPoly& f) {
  if (degree(f) < 1) throw std::invalid_argument("signature: degree must be >= 1");
  if (!is_squarefree(f)) throw NotSquarefree();
  const unsigned r1 = sturm_real_roots(f);
  return {r1, (static_cast<unsigned>(degree(f)) - r1) / 2};
}

inline Signature signature(const NumberField& k) { return signature(k.poly()); }

struct ResidueReport {
  u64 ell = 0;
  std::vector<unsigned> degrees;  // sorted, one entry per irreducible factor counted with multiplicity
  std::vector<std::pair<FpPoly, unsigned>> factors;
  bool squarefree = true;
  bool untrusted = false;  // ell divides disc(f)
};

inline ResidueReport residue_degrees(const ZPoly& f, u64 ell) {
  if (!is_prime_u64(ell)) throw std::invalid_argument("residue_degrees: ell is not prime");
  ResidueReport rep;
  rep.ell = ell;
  const FpPoly g = reduce_mod(f, ell);
  if (degree(g) < 1) throw std::invalid_argument("residue_degrees: f is constant mod ell");
  rep.factors = fp_factor(g, ell);
  for (const auto& [h, mult] : rep.factors) {
    if (mult > 1) rep.squarefree = false;
    for (unsigned k = 0; k < mult; ++k) rep.degrees.push_back(static_cast<unsigned>(degree(h)));
  }
  std::sort(rep.degrees.begin(), rep.degrees.end());
  const mpz_class d = discriminant(f);
  rep.untrusted = mpz_divisible_ui_p(d.get_mpz_t(), static_cast<unsigned long>(ell)) != 0;
  return rep;
}

/// v_p(ell^fdeg - 1).
inline unsigned tame_level(u64 ell, unsigned fdeg, u64 p) {
  if (ell == p) throw std::invalid_argument("tame_level: ell equals p");
  if (ell < 2 || fdeg < 1) throw std::invalid_argument("tame_level: need ell >= 2 and fdeg >= 1");
  mpz_class n;
  mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(ell), fdeg);
  n -= 1;
  return valuation(n, p);
}

struct TamePrimeReport {
  u64 ell = 0;
  std::vector<unsigned> degrees;
  std::vector<mpz_class> norms;
  std::vector<unsigned> levels;
  bool divides_disc = false;
  bool ramified = false;  // f mod ell has a repeated factor

  unsigned max_level() const { return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end()); }
};

inline std::vector<u64> primes_up_to(u64 bound) {
  std::vector<u64> out;
  if (bound < 2) return out;
  std::vector<bool> composite(bound + 1, false);
  for (u64 i = 2; i <= bound; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j <= bound; j += i) composite[j] = true;
  }
  return out;
}

/// Splitting data at one rational prime; only the distinct-degree pass is run.
inline TamePrimeReport tame_report(const ZPoly& f, const mpz_class& disc, u64 ell, u64 p) {
  TamePrimeReport rep;
  rep.ell = ell;
  rep.divides_disc = mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(ell)) != 0;
  const FpPoly g = fp_monic(reduce_mod(f, ell), ell);
  for (const auto& [sf, mult] : fp_squarefree_decomposition(g, ell)) {
    if (mult > 1) rep.ramified = true;
    for (const auto& [part, d] : fp_distinct_degree(sf, ell)) {
      const auto count = static_cast<std::size_t>(degree(part)) / d;
      for (std::size_t c = 0; c < count * mult; ++c) rep.degrees.push_back(d);
    }
  }
  std::sort(rep.degrees.begin(), rep.degrees.end());
  for (unsigned d : rep.degrees) {
    mpz_class n;
    mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(ell), d);
    rep.norms.push_back(n);
    rep.levels.push_back(tame_level(ell, d, p));
  }
  return rep;
}

/// Worker count: hardware concurrency capped by PPG_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PPG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs job(i) for i in [0, count) over contiguous index ranges; results are
/// written by index so ordering never depends on the thread count.
template <typename T>
std::vector<T> parallel_map(std::size_t count, unsigned threads, const std::function<T(std::size_t)>& job) {
  std::vector<T> out(count);
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = job(i);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) out[i] = job(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

/// All ell <= bound with ell not dividing p*disc(f) having a prime above
/// ell of tame level >= m, ascending.
inline std::vector<TamePrimeReport> scan_tame(const ZPoly& f, u64 p, unsigned m, u64 bound, unsigned threads = 0) {
  if (bound < 2) throw std::invalid_argument("scan_tame: bound must be >= 2");
  if (!is_prime_u64(p)) throw std::invalid_argument("scan_tame: p is not prime");
  if (degree(f) < 1) throw std::invalid_argument("scan_tame: degree must be >= 1");
  const mpz_class disc = discriminant(f);
  std::vector<u64> ells;
  for (u64 ell : primes_up_to(bound))
    if (ell != p && mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(ell)) == 0) ells.push_back(ell);
  if (threads == 0) threads = worker_count();
  auto reports = parallel_map<TamePrimeReport>(ells.size(), threads, [&](std::size_t i) { return tame_report(f, disc, ells[i], p); });
  std::vector<TamePrimeReport> out;
  for (auto& r : reports)
    if (r.max_level() >= m) out.push_back(std::move(r));
  return out;
}

enum class SMode { AllOfSp, SubsetViaFactorization };

struct RankReport {
  u64 p = 0;
  unsigned delta = 0;
  unsigned t_size = 0;
  long rank = 0;
  long unipotent_size = 0;
  Signature sig;
};

/// r = delta_S - (r1 + r2 - 1 + |T|). In subset mode, `chosen` indexes the
/// primes above p (factors of f mod p, in residue_degrees order).
inline RankReport rank_report(const ZPoly& f, u64 p, SMode mode, unsigned t_size,
                              const std::vector<std::size_t>& chosen = {}) {
  if (!is_prime_u64(p)) throw std::invalid_argument("rank_report: p is not prime");
  RankReport rep;
  rep.p = p;
  rep.t_size = t_size;
  rep.sig = signature(f);
  if (mode == SMode::AllOfSp) {
    rep.delta = static_cast<unsigned>(degree(f));
  } else {
    const mpz_class disc = discriminant(f);
    if (mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(p)) != 0)
      throw std::invalid_argument("rank_report: p divides disc(f); subset mode needs p unramified in Z[theta]");
    const ResidueReport res = residue_degrees(f, p);
    for (std::size_t i : chosen) {
      if (i >= res.factors.size()) throw std::invalid_argument("rank_report: no prime above p with index " + std::to_string(i));
      rep.delta += static_cast<unsigned>(degree(res.factors[i].first));
    }
  }
  rep.rank = static_cast<long>(rep.delta) - (static_cast<long>(rep.sig.r1) + rep.sig.r2 - 1 + t_size);
  rep.unipotent_size = 2 * rep.rank + 1;
  return rep;
}

// ---------------------------------------------------------------- over Q

namespace detail {

/// Invariant factors (as exponents) of the p-part of a finite abelian group,
/// given c[j] = #{x : x^{p^j} = 1} for j = 0, 1, ... until stable.
inline std::vector<unsigned> exponents_from_counts(const std::vector<u64>& c, u64 p) {
  std::vector<unsigned> rank_at;  // number of cyclic factors of exponent >= j+1
  for (std::size_t j = 1; j < c.size(); ++j) {
    u64 ratio = c[j] / c[j - 1];
    unsigned r = 0;
    while (ratio > 1) {
      ratio /= p;
      ++r;
    }
    rank_at.push_back(r);
  }
  std::vector<unsigned> out;
  for (std::size_t j = 0; j < rank_at.size(); ++j) {
    const unsigned next = j + 1 < rank_at.size() ? rank_at[j + 1] : 0;
    for (unsigned k = 0; k < rank_at[j] - next; ++k) out.push_back(static_cast<unsigned>(j + 1));
  }
  return out;
}

/// Exponents of the p-part of (Z/N)^x by counting p-power torsion.
inline std::vector<unsigned> unit_group_p_exponents(u64 n, u64 p) {
  std::vector<u64> counts{1};
  u64 pj = 1;
  while (true) {
    pj *= p;
    u64 c = 0;
    for (u64 x = 1; x < n; ++x)
      if (std::gcd(x, n) == 1 && powmod(x, pj, n) == 1) ++c;
    if (c == counts.back()) break;
    counts.push_back(c);
  }
  return exponents_from_counts(counts, p);
}

}  // namespace detail

struct QRayStructure {
  u64 p = 0;
  std::vector<u64> ells;
  std::vector<unsigned> exponents;  // n_i = v_p(ell_i - 1)
  unsigned B = 0;
  std::vector<u64> computed;   // sorted cyclic orders
  std::vector<u64> predicted;  // sorted cyclic orders
  bool match = false;
};

inline QRayStructure q_ray_structure(u64 p, const std::vector<u64>& ells, unsigned B) {
  if (p == 2 || !is_prime_u64(p)) throw std::invalid_argument("q_ray_structure: p must be an odd prime");
  if (B < 1) throw std::invalid_argument("q_ray_structure: B must be >= 1");
  QRayStructure out;
  out.p = p;
  out.ells = ells;
  out.B = B;
  std::vector<u64> seen;
  for (u64 ell : ells) {
    if (!is_prime_u64(ell) || ell == p) throw std::invalid_argument("q_ray_structure: tame primes must be primes other than p");
    if (ell % p != 1) throw std::invalid_argument("q_ray_structure: " + std::to_string(ell) + " is not 1 mod p");
    if (std::find(seen.begin(), seen.end(), ell) != seen.end()) throw std::invalid_argument("q_ray_structure: repeated prime");
    seen.push_back(ell);
    out.exponents.push_back(valuation(to_mpz(ell - 1), p));
  }
  mpz_class pB;
  mpz_ui_pow_ui(pB.get_mpz_t(), static_cast<unsigned long>(p), B);
  if (pB > mpz_class(1UL << 24)) throw std::invalid_argument("q_ray_structure: p^B too large for enumeration");

  // CRT: the p-part splits over the coprime components p^B and each ell.
  auto push_orders = [&](const std::vector<unsigned>& exps) {
    for (unsigned e : exps) out.computed.push_back(ipow(p, e));
  };
  push_orders(detail::unit_group_p_exponents(mpz_to_u64(pB), p));
  for (u64 ell : ells) push_orders(detail::unit_group_p_exponents(ell, p));

  if (B >= 2) out.predicted.push_back(ipow(p, B - 1));
  for (unsigned n : out.exponents) out.predicted.push_back(ipow(p, n));
  std::sort(out.computed.begin(), out.computed.end());
  std::sort(out.predicted.begin(), out.predicted.end());
  out.match = out.computed == out.predicted;
  return out;
}

inline int legendre(const mpz_class& a, u64 ell) {
  mpz_class r;
  mpz_fdiv_r_ui(r.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(ell));
  const u64 x = mpz_to_u64(r);
  if (x == 0) return 0;
  return powmod(x, (ell - 1) / 2, ell) == 1 ? 1 : -1;
}

struct MultiquadraticDegree {
  unsigned f = 1;
  bool ramified = false;
};

/// Residue degree of ell in Q(sqrt d_1, ..., sqrt d_k): 2 exactly when some
/// product of the d_i that is an ell-unit is a non-residue.
inline MultiquadraticDegree multiquadratic_residue_degree(const std::vector<mpz_class>& ds, u64 ell) {
  if (ell == 2) throw std::invalid_argument("multiquadratic_residue_degree: ell = 2 unsupported");
  if (!is_prime_u64(ell)) throw std::invalid_argument("multiquadratic_residue_degree: ell is not prime");
  if (ds.size() > 20) throw std::invalid_argument("multiquadratic_residue_degree: too many generators");
  MultiquadraticDegree out;
  const unsigned long L = static_cast<unsigned long>(ell);
  for (const auto& d : ds) {
    if (d == 0 || d == 1) throw std::invalid_argument("multiquadratic_residue_degree: d must be a non-square");
    if (mpz_divisible_ui_p(d.get_mpz_t(), L) != 0) out.ramified = true;
  }
  for (std::size_t mask = 1; mask < (std::size_t{1} << ds.size()); ++mask) {
    mpz_class prod = 1;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if ((mask >> i) & 1U) prod *= ds[i];
    unsigned v = 0;
    while (prod != 0 && mpz_divisible_ui_p(prod.get_mpz_t(), L) != 0) {
      mpz_divexact_ui(prod.get_mpz_t(), prod.get_mpz_t(), L);
      ++v;
    }
    if (v % 2 == 1) continue;
    if (legendre(prod, ell) == -1) {
      out.f = 2;
      break;
    }
  }
  return out;
}

/// ell^{p-1} == 1 (mod p^2).
inline bool wieferich_test(u64 ell, u64 p) {
  if (ell < 2) throw std::invalid_argument("wieferich_test: need ell >= 2");
  if (!is_prime_u64(p)) throw std::invalid_argument("wieferich_test: p is not prime");
  if (ell % p == 0) throw std::invalid_argument("wieferich_test: p divides ell");
  if (p > 3037000499ULL) throw std::invalid_argument("wieferich_test: p^2 exceeds 64 bits");
  const u64 p2 = p * p;
  return powmod(ell % p2, p - 1, p2) == 1;
}

inline std::vector<u64> wieferich_scan(u64 ell, u64 bound, unsigned threads = 0) {
  if (ell < 2) throw std::invalid_argument("wieferich_scan: need ell >= 2");
  std::vector<u64> ps;
  for (u64 p : primes_up_to(bound))
    if (ell % p != 0) ps.push_back(p);
  if (threads == 0) threads = worker_count();
  auto hits = parallel_map<char>(ps.size(), threads, [&](std::size_t i) { return static_cast<char>(wieferich_test(ell, ps[i])); });
  std::vector<u64> out;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (hits[i] != 0) out.push_back(ps[i]);
  return out;
}

}  // namespace ppg
