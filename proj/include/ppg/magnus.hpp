// Truncated Magnus expansion into F_p<<X_1..X_d>>, leading monomials,
// quadratic mildness certificates and the cup pairing on relators.
#pragma once

#include "ppg/presentation.hpp"
#include "ppg/ring.hpp"
#include "ppg/word.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ppg {

inline constexpr unsigned kMaxTruncation = 6;
inline constexpr unsigned kDefaultMildTruncation = 3;

/// Noncommutative monomial X_{w_0} X_{w_1} ... (0-based generator indices).
using Monomial = std::vector<std::uint16_t>;

inline std::string monomial_to_string(const Monomial& m) {
  if (m.empty()) return "1";
  std::string s;
  std::size_t i = 0;
  while (i < m.size()) {
    std::size_t j = i;
    while (j < m.size() && m[j] == m[i]) ++j;
    s += "X" + std::to_string(m[i] + 1);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

/// C(e, k) mod p for any integer e, via Lucas on e mod p^D (D >= k suffices
/// since p^D > k).
inline u64 binomial_mod_p(const mpz_class& e, unsigned k, u64 p, unsigned D) {
  if (k == 0) return 1 % p;
  mpz_class period;
  mpz_ui_pow_ui(period.get_mpz_t(), static_cast<unsigned long>(p), std::max(D, k));
  mpz_class x;
  mpz_fdiv_r(x.get_mpz_t(), e.get_mpz_t(), period.get_mpz_t());
  const mpz_class P = to_mpz(p);
  u64 result = 1 % p;
  unsigned kk = k;
  while (kk > 0) {
    mpz_class digit_z;
    mpz_fdiv_qr(x.get_mpz_t(), digit_z.get_mpz_t(), x.get_mpz_t(), P.get_mpz_t());
    const u64 a = mpz_to_u64(digit_z);
    const u64 b = kk % p;
    kk = static_cast<unsigned>(kk / p);
    if (b > a) return 0;
    u64 num = 1 % p;
    u64 den = 1 % p;
    for (u64 i = 0; i < b; ++i) {
      num = mulmod(num, (a - i) % p, p);
      den = mulmod(den, (i + 1) % p, p);
    }
    result = mulmod(result, mulmod(num, powmod(den, p - 2, p), p), p);
  }
  return result;
}

/// Element of F_p<<X_1..X_d>> modulo terms of degree > D. Zero
/// coefficients are never stored.
class TruncSeries {
 public:
  TruncSeries(u64 p, std::size_t d, unsigned D) : p_(p), d_(d), D_(D) {
    if (D < 1 || D > kMaxTruncation) throw std::invalid_argument("TruncSeries: truncation degree must be in [1, 6]");
    if (!is_prime_u64(p)) throw std::invalid_argument("TruncSeries: p must be prime");
  }

  static TruncSeries one(u64 p, std::size_t d, unsigned D) {
    TruncSeries s(p, d, D);
    s.terms_[Monomial{}] = 1 % p;
    return s;
  }

  /// (1 + X_g)^e = sum_k C(e, k) X_g^k.
  static TruncSeries letter(u64 p, std::size_t d, unsigned D, std::size_t g, const mpz_class& e) {
    if (g >= d) throw std::invalid_argument("TruncSeries: generator index out of range");
    TruncSeries s(p, d, D);
    for (unsigned k = 0; k <= D; ++k) {
      u64 c = binomial_mod_p(e, k, p, D);
      if (c != 0) s.terms_[Monomial(k, static_cast<std::uint16_t>(g))] = c;
    }
    return s;
  }

  [[nodiscard]] u64 p() const noexcept { return p_; }
  [[nodiscard]] std::size_t num_vars() const noexcept { return d_; }
  [[nodiscard]] unsigned truncation() const noexcept { return D_; }
  [[nodiscard]] const std::map<Monomial, u64>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

  [[nodiscard]] u64 coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0 : it->second;
  }

  void add_term(const Monomial& m, u64 c) {
    if (m.size() > D_) return;
    c %= p_;
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second = (it->second + c) % p_;
      if (it->second == 0) terms_.erase(it);
    }
  }

  friend TruncSeries operator+(TruncSeries a, const TruncSeries& b) {
    a.check_compatible(b);
    for (const auto& [m, c] : b.terms_) a.add_term(m, c);
    return a;
  }
  friend TruncSeries operator-(TruncSeries a, const TruncSeries& b) {
    a.check_compatible(b);
    for (const auto& [m, c] : b.terms_) a.add_term(m, a.p_ - c);
    return a;
  }
  friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
    a.check_compatible(b);
    TruncSeries out(a.p_, a.d_, a.D_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        if (ma.size() + mb.size() > a.D_) continue;
        Monomial m = ma;
        m.insert(m.end(), mb.begin(), mb.end());
        out.add_term(m, mulmod(ca, cb, a.p_));
      }
    }
    return out;
  }
  friend bool operator==(const TruncSeries& a, const TruncSeries& b) {
    return a.p_ == b.p_ && a.d_ == b.d_ && a.D_ == b.D_ && a.terms_ == b.terms_;
  }

 private:
  void check_compatible(const TruncSeries& b) const {
    if (p_ != b.p_ || d_ != b.d_ || D_ != b.D_) throw std::invalid_argument("TruncSeries: incompatible operands");
  }

  u64 p_;
  std::size_t d_;
  unsigned D_;
  std::map<Monomial, u64> terms_;
};

/// Image of a word under x_i -> 1 + X_i, truncated beyond degree D.
inline TruncSeries magnus_expand(const Word& word, std::size_t d, unsigned D, u64 p) {
  TruncSeries s = TruncSeries::one(p, d, D);
  for (const auto& l : word) s = s * TruncSeries::letter(p, d, D, l.gen, l.exp);
  return s;
}

/// Order on monomials: total degree first, then left-lexicographic by the
/// letter order. rank[g] larger means X_g is greater.
class MonomialOrder {
 public:
  /// X_d > X_{d-1} > ... > X_1.
  static MonomialOrder standard(std::size_t d) {
    std::vector<std::size_t> r(d);
    std::iota(r.begin(), r.end(), 0);
    return MonomialOrder(std::move(r));
  }

  explicit MonomialOrder(std::vector<std::size_t> ranks) : rank_(std::move(ranks)) {
    std::vector<std::size_t> sorted = rank_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i) throw std::invalid_argument("MonomialOrder: ranks must be a permutation");
  }

  [[nodiscard]] std::size_t size() const noexcept { return rank_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& ranks() const noexcept { return rank_; }
  [[nodiscard]] bool letter_greater(std::size_t a, std::size_t b) const { return rank_.at(a) > rank_.at(b); }

  /// Left-lex comparison of monomials of equal degree.
  [[nodiscard]] bool lex_greater(const Monomial& a, const Monomial& b) const {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
      if (a[i] != b[i]) return letter_greater(a[i], b[i]);
    return a.size() > b.size();
  }

  /// The leading term dominates: lower degree first, then lex-greater.
  [[nodiscard]] bool dominates(const Monomial& a, const Monomial& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return lex_greater(a, b);
  }

 private:
  std::vector<std::size_t> rank_;
};

struct LeadingTerm {
  Monomial monomial;
  u64 coefficient = 0;
};

inline LeadingTerm leading_term(const TruncSeries& s, const MonomialOrder& order) {
  if (s.is_zero()) throw std::invalid_argument("leading_term: zero series");
  if (order.size() != s.num_vars()) throw std::invalid_argument("leading_term: order size mismatch");
  const Monomial* best = nullptr;
  u64 coeff = 0;
  for (const auto& [m, c] : s.terms()) {
    if (best == nullptr || order.dominates(m, *best)) {
      best = &m;
      coeff = c;
    }
  }
  return {*best, coeff};
}

struct MildCertificate {
  std::vector<Monomial> leading;   // per relator, X_head X_tail
  std::vector<std::size_t> heads;  // sorted generator indices
  std::vector<std::size_t> tails;
  std::vector<std::size_t> order_ranks;
  unsigned truncation = kDefaultMildTruncation;
  bool p2_convention = false;      // squares contribute diagonal terms when p = 2
};

enum class MildFailure { InconclusiveAtTruncation, LinearLeadingTerm, NotQuadratic, WrongShape, HeadTailOverlap };

inline const char* to_string(MildFailure f) {
  switch (f) {
    case MildFailure::InconclusiveAtTruncation: return "inconclusive_at_truncation";
    case MildFailure::LinearLeadingTerm: return "linear_leading_term";
    case MildFailure::NotQuadratic: return "not_quadratic";
    case MildFailure::WrongShape: return "wrong_shape";
    case MildFailure::HeadTailOverlap: return "head_tail_overlap";
  }
  return "unknown";
}

struct MildRejection {
  std::size_t relator = 0;
  MildFailure reason = MildFailure::NotQuadratic;
  Monomial leading;  // empty when inconclusive
  u64 coefficient = 0;
};

using MildResult = std::variant<MildCertificate, MildRejection>;

/// Quadratic mildness: every leading monomial is X_a X_b with X_a > X_b and
/// no head letter X_a occurs as a tail letter X_b of any relator.
inline MildResult check_mild(const Presentation& pres, const MonomialOrder& order,
                             unsigned D = kDefaultMildTruncation) {
  const std::size_t d = pres.num_generators();
  if (order.size() != d) throw std::invalid_argument("check_mild: order size mismatch");
  MildCertificate cert;
  cert.order_ranks = order.ranks();
  cert.truncation = D;
  cert.p2_convention = pres.p == 2;
  std::set<std::size_t> heads;
  std::set<std::size_t> tails;
  for (std::size_t i = 0; i < pres.relators.size(); ++i) {
    if (pres.relators[i].empty()) throw std::invalid_argument("check_mild: empty relator");
    TruncSeries s = magnus_expand(pres.relators[i], d, D, pres.p) - TruncSeries::one(pres.p, d, D);
    if (s.is_zero()) return MildRejection{i, MildFailure::InconclusiveAtTruncation, {}, 0};
    LeadingTerm lt = leading_term(s, order);
    if (lt.monomial.size() == 1) return MildRejection{i, MildFailure::LinearLeadingTerm, lt.monomial, lt.coefficient};
    if (lt.monomial.size() != 2) return MildRejection{i, MildFailure::NotQuadratic, lt.monomial, lt.coefficient};
    if (!order.letter_greater(lt.monomial[0], lt.monomial[1]))
      return MildRejection{i, MildFailure::WrongShape, lt.monomial, lt.coefficient};
    cert.leading.push_back(lt.monomial);
  }
  for (const auto& m : cert.leading) {
    heads.insert(m[0]);
    tails.insert(m[1]);
  }
  for (std::size_t i = 0; i < cert.leading.size(); ++i) {
    const Monomial& m = cert.leading[i];
    if (tails.count(m[0]) != 0 || heads.count(m[1]) != 0)
      return MildRejection{i, MildFailure::HeadTailOverlap, m, 1};
  }
  cert.heads.assign(heads.begin(), heads.end());
  cert.tails.assign(tails.begin(), tails.end());
  return cert;
}

inline MildResult check_mild(const Presentation& pres, unsigned D = kDefaultMildTruncation) {
  return check_mild(pres, MonomialOrder::standard(pres.num_generators()), D);
}

class NonFrattiniRelator : public std::domain_error {
 public:
  explicit NonFrattiniRelator(std::size_t gen)
      : std::domain_error("relator has nonzero linear Magnus term at X" + std::to_string(gen + 1) +
                          "; presentation is not minimal"),
        generator(gen) {}
  std::size_t generator;
};

using QuadraticForm = std::vector<std::vector<u64>>;

/// eps[i][j] = coefficient of X_i X_j in the Magnus image of the relator.
inline QuadraticForm quadratic_coeffs(const Word& relator, std::size_t d, u64 p) {
  TruncSeries s = magnus_expand(relator, d, 2, p);
  QuadraticForm eps(d, std::vector<u64>(d, 0));
  for (const auto& [m, c] : s.terms()) {
    if (m.size() == 1) throw NonFrattiniRelator(m[0]);
    if (m.size() == 2) eps[m[0]][m[1]] = c;
  }
  return eps;
}

inline std::vector<QuadraticForm> cup_forms(const Presentation& pres) {
  std::vector<QuadraticForm> forms;
  forms.reserve(pres.relators.size());
  for (const auto& r : pres.relators) forms.push_back(quadratic_coeffs(r, pres.num_generators(), pres.p));
  return forms;
}

/// Component k is sum_{i,j} eps_k[i][j] a(x_i) b(x_j). The cup product is
/// zero iff every component vanishes.
inline std::vector<u64> cup_value(const std::vector<QuadraticForm>& forms, const std::vector<u64>& chi_a,
                                  const std::vector<u64>& chi_b, u64 p) {
  std::vector<u64> out;
  out.reserve(forms.size());
  for (const auto& eps : forms) {
    const std::size_t d = eps.size();
    if (chi_a.size() != d || chi_b.size() != d) throw std::invalid_argument("cup_value: character length mismatch");
    u64 acc = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (chi_a[i] % p == 0) continue;
      for (std::size_t j = 0; j < d; ++j)
        if (eps[i][j] != 0) acc = (acc + mulmod(eps[i][j], mulmod(chi_a[i] % p, chi_b[j] % p, p), p)) % p;
    }
    out.push_back(acc);
  }
  return out;
}

inline std::vector<u64> cup_value(const std::vector<u64>& chi_a, const std::vector<u64>& chi_b,
                                  const Presentation& pres) {
  return cup_value(cup_forms(pres), chi_a, chi_b, pres.p);
}

inline bool is_zero_vector(const std::vector<u64>& v) {
  return std::all_of(v.begin(), v.end(), [](u64 x) { return x == 0; });
}

}  // namespace ppg
