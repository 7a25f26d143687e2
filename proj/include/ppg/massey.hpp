// Massey products through unipotent lifts.
//
// A character tuple chi = (chi_1..chi_n) on the generators determines the
// superdiagonal of each generator image modulo p. Lifting to U_{n+1}(Z/p^m)
// is done one central layer at a time: after offsets < k are correct, the
// offset-k part of every relator is an affine function of the offset-(k-1)
// and offset-k entries of the generator images. We read that function off by
// finite differences, solve it over Z/p^m, and backtrack over the solution
// coset when a deeper layer gets stuck.
#pragma once

#include "ppg/groups.hpp"
#include "ppg/magnus.hpp"
#include "ppg/presentation.hpp"
#include "ppg/ring.hpp"
#include "ppg/unipotent.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ppg {

inline constexpr std::size_t kDefaultBudget = 512;

struct SolverOptions {
  std::size_t budget = kDefaultBudget;  // candidates per layer, over the whole search
  u64 seed = 0;                         // 0: lexicographic candidate order
  bool exhaustive_fallback = false;     // brute force U_3 cases with p^m <= 9
};

struct SolverStats {
  std::size_t candidates = 0;
  std::size_t backtracks = 0;
};

/// Values chi_u(x_g), indexed [u][g].
struct CharacterTuple {
  std::vector<std::vector<u64>> chis;

  [[nodiscard]] std::size_t n() const noexcept { return chis.size(); }
  [[nodiscard]] std::vector<u64> restricted_to(std::size_t gen) const {
    std::vector<u64> v;
    v.reserve(chis.size());
    for (const auto& c : chis) v.push_back(c.at(gen));
    return v;
  }
};

/// Dual basis character of generator g on d generators.
inline std::vector<u64> dual_character(std::size_t d, std::size_t g) {
  std::vector<u64> v(d, 0);
  v.at(g) = 1;
  return v;
}

/// Concrete failure of the layered solver.
struct Obstruction {
  std::size_t level = 0;         // diagonal offset that could not be solved
  std::size_t factor = 0;        // factor index within the presentation
  std::vector<u64> defect;       // offset-`level` entries of each relator value, relator-major
  std::size_t equations = 0;
  std::size_t unknowns = 0;
  std::string cokernel;          // description of the inconsistent linear system
  std::size_t budget_used = 0;   // candidates tried over all layers
  bool exhaustive = false;       // true when no lift with these residues exists at all
};

class MasseyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RankTooLarge : public MasseyError {
 public:
  RankTooLarge(std::size_t n, std::size_t h1)
      : MasseyError("n = " + std::to_string(n) + " exceeds the generator rank h1 = " + std::to_string(h1)) {}
};

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> offset_positions(std::size_t N, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> pos;
  for (std::size_t i = 1; i + k <= N; ++i) pos.emplace_back(i, i + k);
  return pos;
}

/// Canonical lift: superdiagonal entries are least nonnegative residues of
/// the targets, all deeper entries zero.
inline std::vector<UniMatrix> base_lift(const std::vector<std::vector<u64>>& targets, const UniShape& shape) {
  std::vector<UniMatrix> images;
  images.reserve(targets.size());
  const u64 p = shape.ring().p();
  for (const auto& t : targets) {
    if (t.size() != shape.n()) throw std::invalid_argument("lift: target length differs from n");
    UniMatrix a(shape);
    for (std::size_t u = 1; u <= shape.n(); ++u) a.set(u, u + 1, t[u - 1] % p);
    images.push_back(std::move(a));
  }
  return images;
}

class LayeredLifter {
 public:
  LayeredLifter(std::vector<Word> relators, const std::vector<std::vector<u64>>& targets, const UniShape& shape,
                std::size_t top_offset, const SolverOptions& options)
      : relators_(std::move(relators)),
        shape_(shape),
        top_(top_offset),
        options_(options),
        images_(base_lift(targets, shape)),
        per_level_(top_offset + 2, 0) {}

  bool run() {
    if (top_ == 0) return true;
    return descend(1);
  }

  [[nodiscard]] const std::vector<UniMatrix>& images() const noexcept { return images_; }
  [[nodiscard]] const SolverStats& stats() const noexcept { return stats_; }
  [[nodiscard]] Obstruction obstruction() const {
    Obstruction o = failure_.value_or(Obstruction{});
    o.budget_used = stats_.candidates;
    return o;
  }

 private:
  struct Var {
    std::size_t gen;
    std::size_t i;
    std::size_t j;
    u64 scale;
  };
  struct Layer {
    std::vector<Var> vars;
    std::vector<std::pair<std::size_t, std::size_t>> eq_pos;  // positions checked per relator
  };

  [[nodiscard]] Layer make_layer(std::size_t k) const {
    const PrimePower& R = shape_.ring();
    const std::size_t N = shape_.size();
    Layer layer;
    auto add_vars = [&](std::size_t off) {
      const u64 scale = off == 1 ? R.p() % R.modulus() : 1;
      if (scale == 0) return;  // superdiagonal is pinned mod p; nothing to vary over F_p
      for (std::size_t g = 0; g < images_.size(); ++g)
        for (auto [i, j] : offset_positions(N, off)) layer.vars.push_back({g, i, j, scale});
    };
    if (k >= 2) add_vars(k - 1);
    add_vars(k);
    if (k >= 2)
      for (auto pos : offset_positions(N, k - 1)) layer.eq_pos.push_back(pos);
    for (auto pos : offset_positions(N, k)) layer.eq_pos.push_back(pos);
    return layer;
  }

  [[nodiscard]] std::vector<u64> relator_entries(const Layer& layer) const {
    std::vector<u64> out;
    out.reserve(relators_.size() * layer.eq_pos.size());
    for (const auto& r : relators_) {
      UniMatrix v = eval_word(images_, shape_, r);
      for (auto [i, j] : layer.eq_pos) out.push_back(v.at(i, j));
    }
    return out;
  }

  /// Exact linearization by unit finite differences.
  [[nodiscard]] LinSystem linearize(const Layer& layer, const std::vector<u64>& base) {
    const PrimePower& R = shape_.ring();
    LinSystem sys(R, base.size(), layer.vars.size());
    for (std::size_t e = 0; e < base.size(); ++e) sys.rhs[e] = R.neg(base[e]);
    for (std::size_t v = 0; v < layer.vars.size(); ++v) {
      const Var& var = layer.vars[v];
      images_[var.gen].add_to(var.i, var.j, var.scale);
      std::vector<u64> moved = relator_entries(layer);
      images_[var.gen].add_to(var.i, var.j, R.neg(var.scale));
      for (std::size_t e = 0; e < base.size(); ++e) sys.at(e, v) = R.sub(moved[e], base[e]);
    }
    return sys;
  }

  void apply(const Layer& layer, const std::vector<u64>& t) {
    const PrimePower& R = shape_.ring();
    for (std::size_t v = 0; v < layer.vars.size(); ++v)
      if (t[v] != 0) images_[layer.vars[v].gen].add_to(layer.vars[v].i, layer.vars[v].j, R.mul(t[v], layer.vars[v].scale));
  }

  [[nodiscard]] bool layers_clear(std::size_t k) const {
    for (const auto& r : relators_)
      if (!eval_word(images_, shape_, r).vanishes_below_offset(k + 1)) return false;
    return true;
  }

  /// Re-linearize at the current point; only needed when p^2 != 0 makes the
  /// offset-1 corrections interact quadratically.
  bool refine(const Layer& layer, std::size_t k) {
    for (unsigned iter = 0; iter <= shape_.ring().m(); ++iter) {
      if (layers_clear(k)) return true;
      std::vector<u64> base = relator_entries(layer);
      auto sol = solve_affine(linearize(layer, base));
      if (!sol) return false;
      apply(layer, sol->particular);
    }
    return layers_clear(k);
  }

  void record_failure(std::size_t k, const Layer& layer, const std::vector<u64>& base, const LinSystem& sys) {
    if (failure_ && failure_->level >= k) return;
    Obstruction o;
    o.level = k;
    const std::size_t per_rel = layer.eq_pos.size();
    const std::size_t skip = per_rel - offset_positions(shape_.size(), k).size();
    for (std::size_t r = 0; r < relators_.size(); ++r)
      for (std::size_t e = skip; e < per_rel; ++e) o.defect.push_back(base[r * per_rel + e]);
    o.equations = sys.rows;
    o.unknowns = sys.cols;
    std::ostringstream os;
    os << "offset-" << k << " system with " << sys.rows << " equations in " << sys.cols
       << " unknowns over Z/" << shape_.ring().modulus() << " is inconsistent; rhs outside the image";
    o.cokernel = os.str();
    o.exhaustive = k == 1 || (k == 2 && shape_.ring().m() <= 2);
    failure_ = std::move(o);
  }

  /// Kernel coefficient tuples in mixed radix, last coordinate fastest.
  class CandidateCursor {
   public:
    CandidateCursor(const PrimePower& R, const AffineSolution& sol, u64 seed) : sol_(sol), rng_(seed), seeded_(seed != 0) {
      for (const auto& k : sol.kernel_basis) orders_.push_back(additive_order(R, k));
      coeffs_.assign(orders_.size(), 0);
    }

    /// First call yields the particular solution.
    bool next(const PrimePower& R, std::vector<u64>& out) {
      if (first_) {
        first_ = false;
        out = sol_.particular;
        return true;
      }
      if (seeded_) {
        if (orders_.empty()) return false;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = std::uniform_int_distribution<u64>(0, orders_[i] - 1)(rng_);
      } else {
        std::size_t i = coeffs_.size();
        while (i > 0) {
          --i;
          if (++coeffs_[i] < orders_[i]) break;
          coeffs_[i] = 0;
          if (i == 0) return false;
        }
        if (coeffs_.empty()) return false;
      }
      out = sol_.particular;
      for (std::size_t g = 0; g < coeffs_.size(); ++g) {
        if (coeffs_[g] == 0) continue;
        for (std::size_t v = 0; v < out.size(); ++v) out[v] = R.add(out[v], R.mul(coeffs_[g], sol_.kernel_basis[g][v]));
      }
      return true;
    }

   private:
    const AffineSolution& sol_;
    std::vector<u64> orders_;
    std::vector<u64> coeffs_;
    std::mt19937_64 rng_;
    bool seeded_;
    bool first_ = true;
  };

  bool descend(std::size_t k) {
    if (k > top_) return true;
    const PrimePower& R = shape_.ring();
    Layer layer = make_layer(k);
    std::vector<u64> base = relator_entries(layer);
    LinSystem sys = linearize(layer, base);
    auto sol = solve_affine(sys);
    if (!sol) {
      record_failure(k, layer, base, sys);
      return false;
    }
    CandidateCursor cursor(R, *sol, options_.seed);
    std::vector<u64> t;
    const std::vector<UniMatrix> saved = images_;
    while (per_level_[k] < options_.budget && cursor.next(R, t)) {
      ++per_level_[k];
      ++stats_.candidates;
      apply(layer, t);
      if (refine(layer, k) && descend(k + 1)) return true;
      images_ = saved;
      ++stats_.backtracks;
    }
    if (!failure_ || failure_->level < k) {
      // Every candidate here failed deeper without a recorded obstruction.
      record_failure(k, layer, base, sys);
      failure_->cokernel = "offset-" + std::to_string(k) + " candidates exhausted within budget";
      failure_->exhaustive = false;
    }
    return false;
  }

  std::vector<Word> relators_;
  UniShape shape_;
  std::size_t top_;
  SolverOptions options_;
  std::vector<UniMatrix> images_;
  std::vector<std::size_t> per_level_;
  SolverStats stats_;
  std::optional<Obstruction> failure_;
};

/// All residues congruent to `target` mod p in Z/p^m.
inline std::vector<u64> residue_class(const PrimePower& R, u64 target) {
  std::vector<u64> out;
  for (u64 x = target % R.p(); x < R.modulus(); x += R.p()) out.push_back(x);
  return out;
}

}  // namespace detail

/// Brute force over every lift of the targets in U_3(Z/p^m), p^m <= 9.
inline std::optional<std::vector<UniMatrix>> exhaustive_lift(const Presentation& factor,
                                                             const std::vector<std::vector<u64>>& targets,
                                                             const UniShape& shape) {
  const PrimePower& R = shape.ring();
  if (shape.n() > 2 || R.modulus() > 9) throw std::invalid_argument("exhaustive_lift: only U_3(Z/p^m) with p^m <= 9");
  const std::size_t g = factor.num_generators();
  std::vector<std::vector<UniMatrix>> choices(g);
  for (std::size_t gen = 0; gen < g; ++gen) {
    const auto& t = targets.at(gen);
    std::vector<std::vector<u64>> entry_options;
    for (std::size_t u = 1; u <= shape.n(); ++u) entry_options.push_back(detail::residue_class(R, t[u - 1]));
    // corner entries (offset >= 2) are unconstrained
    for (std::size_t e = shape.n(); e < shape.num_entries(); ++e) {
      std::vector<u64> all(R.modulus());
      for (u64 x = 0; x < R.modulus(); ++x) all[x] = x;
      entry_options.push_back(std::move(all));
    }
    std::vector<std::size_t> idx(entry_options.size(), 0);
    while (true) {
      UniMatrix a(shape);
      std::size_t e = 0;
      for (std::size_t u = 1; u <= shape.n(); ++u, ++e) a.set(u, u + 1, entry_options[e][idx[e]]);
      for (std::size_t off = 2; off <= shape.n(); ++off)
        for (auto [i, j] : detail::offset_positions(shape.size(), off)) a.set(i, j, entry_options[e][idx[e]]), ++e;
      choices[gen].push_back(std::move(a));
      std::size_t c = idx.size();
      bool done = true;
      while (c > 0) {
        --c;
        if (++idx[c] < entry_options[c].size()) {
          done = false;
          break;
        }
        idx[c] = 0;
      }
      if (done) break;
    }
  }
  std::vector<std::size_t> pick(g, 0);
  std::vector<UniMatrix> images;
  while (true) {
    images.clear();
    for (std::size_t gen = 0; gen < g; ++gen) images.push_back(choices[gen][pick[gen]]);
    bool ok = true;
    for (const auto& r : factor.relators)
      if (!eval_word(images, shape, r).is_identity()) {
        ok = false;
        break;
      }
    if (ok) return images;
    std::size_t c = g;
    bool done = true;
    while (c > 0) {
      --c;
      if (++pick[c] < choices[c].size()) {
        done = false;
        break;
      }
      pick[c] = 0;
    }
    if (done) return std::nullopt;
  }
}

struct FactorLift {
  std::variant<Hom, Obstruction> result;
  SolverStats stats;
};

/// Lifts one factor block. Free blocks take the canonical lift; blocks with
/// relators go through the layered solver.
inline FactorLift lift_factor(const Presentation& factor, const std::vector<std::vector<u64>>& superdiag_targets,
                              const UniShape& shape, const SolverOptions& options = {}) {
  if (superdiag_targets.size() != factor.num_generators())
    throw std::invalid_argument("lift_factor: one target per generator required");
  if (factor.p != shape.ring().p()) throw std::invalid_argument("lift_factor: prime mismatch");
  if (factor.relators.empty()) return {Hom(factor, shape, detail::base_lift(superdiag_targets, shape)), {}};

  detail::LayeredLifter lifter(factor.relators, superdiag_targets, shape, shape.n(), options);
  if (lifter.run()) return {Hom(factor, shape, lifter.images()), lifter.stats()};

  Obstruction obs = lifter.obstruction();
  if (options.exhaustive_fallback && !obs.exhaustive && shape.n() <= 2 && shape.ring().modulus() <= 9) {
    if (auto found = exhaustive_lift(factor, superdiag_targets, shape)) return {Hom(factor, shape, std::move(*found)), lifter.stats()};
    obs.exhaustive = true;
  }
  return {std::move(obs), lifter.stats()};
}

struct CupChainResult {
  bool ok = true;
  std::optional<std::size_t> first_failure;  // 1-based u with chi_u cup chi_{u+1} != 0
};

inline CupChainResult cup_chain_ok(const Presentation& pres, const CharacterTuple& chi) {
  const auto forms = cup_forms(pres);
  for (std::size_t u = 0; u + 1 < chi.n(); ++u) {
    if (!is_zero_vector(cup_value(forms, chi.chis[u], chi.chis[u + 1], pres.p))) return {false, u + 1};
  }
  return {};
}

/// Universal property of the coproduct: images are taken factorwise.
inline Hom assemble(const Presentation& coprod, const std::vector<Hom>& factor_homs) {
  if (factor_homs.size() != coprod.factors.size()) throw std::invalid_argument("assemble: one Hom per factor required");
  if (factor_homs.empty()) throw std::invalid_argument("assemble: no factors");
  const UniShape shape = factor_homs.front().target;
  std::vector<UniMatrix> images;
  images.reserve(coprod.num_generators());
  for (std::size_t k = 0; k < factor_homs.size(); ++k) {
    const Hom& h = factor_homs[k];
    if (!(h.target == shape)) throw std::invalid_argument("assemble: target shapes differ");
    if (h.images.size() != coprod.factors[k].num_generators) throw std::invalid_argument("assemble: factor size mismatch");
    images.insert(images.end(), h.images.begin(), h.images.end());
  }
  return Hom(coprod, shape, std::move(images));
}

struct WitnessTranscript {
  std::vector<bool> relators_ok;
  std::vector<bool> congruences_ok;  // per u: rho_{u,u+1} = chi_u mod p on every generator
  std::size_t frattini_rank = 0;
  bool surjective = false;

  [[nodiscard]] bool all_pass(bool require_surjective) const {
    auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
    return all(relators_ok) && all(congruences_ok) && (!require_surjective || surjective);
  }
  friend bool operator==(const WitnessTranscript&, const WitnessTranscript&) = default;
};

struct SolverMeta {
  std::size_t budget = kDefaultBudget;
  std::size_t backtracks = 0;
  std::size_t candidates = 0;
  u64 seed = 0;
};

struct MasseyWitness {
  Presentation presentation;
  CharacterTuple chis;
  unsigned m = 1;
  Hom images;
  WitnessTranscript transcript;
  SolverMeta solver;
  bool claims_surjective = false;

  [[nodiscard]] std::size_t n() const noexcept { return chis.n(); }
};

inline WitnessTranscript compute_transcript(const Hom& h, const CharacterTuple& chi) {
  WitnessTranscript t;
  HomReport rep = is_hom(h);
  t.relators_ok = rep.relator_ok;
  const u64 p = h.target.ring().p();
  for (std::size_t u = 1; u <= chi.n(); ++u) {
    bool ok = true;
    for (std::size_t g = 0; g < h.images.size(); ++g)
      ok = ok && h.images[g].at(u, u + 1) % p == chi.chis[u - 1].at(g) % p;
    t.congruences_ok.push_back(ok);
  }
  t.frattini_rank = frattini_rank(h.images);
  t.surjective = t.frattini_rank == h.target.n();
  return t;
}

struct CheckLine {
  std::string name;
  bool pass = false;
};

struct VerificationReport {
  WitnessTranscript transcript;
  std::vector<CheckLine> checks;
  bool matches_recorded = false;
  bool all_pass = false;
};

/// Re-evaluates every relator, every superdiagonal congruence and the
/// Frattini rank from the images alone.
inline VerificationReport verify_witness(const MasseyWitness& w) {
  VerificationReport r;
  const UniShape& shape = w.images.target;
  bool shape_ok = shape.n() == w.n() && shape.ring().m() == w.m && shape.ring().p() == w.presentation.p &&
                  w.images.images.size() == w.presentation.num_generators();
  for (const auto& c : w.chis.chis) shape_ok = shape_ok && c.size() == w.presentation.num_generators();
  r.checks.push_back({"shape", shape_ok});
  if (!shape_ok) return r;
  r.transcript = compute_transcript(w.images, w.chis);
  for (std::size_t i = 0; i < r.transcript.relators_ok.size(); ++i)
    r.checks.push_back({"relator " + std::to_string(i + 1), r.transcript.relators_ok[i]});
  for (std::size_t u = 0; u < r.transcript.congruences_ok.size(); ++u)
    r.checks.push_back({"congruence u=" + std::to_string(u + 1), r.transcript.congruences_ok[u]});
  if (w.claims_surjective)
    r.checks.push_back({"frattini rank " + std::to_string(r.transcript.frattini_rank) + " = " + std::to_string(shape.n()),
                        r.transcript.surjective});
  r.matches_recorded = r.transcript == w.transcript;
  r.checks.push_back({"transcript reproduced", r.matches_recorded});
  r.all_pass = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckLine& c) { return c.pass; });
  return r;
}

using LiftOutcome = std::variant<MasseyWitness, Obstruction>;

/// m-strong Massey lift for a coproduct of tagged factors: chi is split
/// factorwise, each factor is lifted on its own and the images assembled.
inline LiftOutcome strong_massey_lift(const Presentation& pres, const CharacterTuple& chi, unsigned m,
                                      const SolverOptions& options = {}) {
  pres.validate();
  if (!pres.is_tagged()) throw MasseyError("strong_massey_lift: presentation has no factor tags");
  if (chi.n() < 1) throw MasseyError("strong_massey_lift: empty character tuple");
  for (const auto& c : chi.chis)
    if (c.size() != pres.num_generators()) throw MasseyError("strong_massey_lift: character length mismatch");
  auto chain = cup_chain_ok(pres, chi);
  if (!chain.ok) throw MasseyError("PreconditionCup: chi_" + std::to_string(*chain.first_failure) + " cup chi_" +
                                   std::to_string(*chain.first_failure + 1) + " is nonzero");

  const UniShape shape(chi.n(), PrimePower(pres.p, m));
  SolverMeta meta;
  meta.budget = options.budget;
  meta.seed = options.seed;
  std::vector<Hom> homs;
  for (std::size_t k = 0; k < pres.factors.size(); ++k) {
    const FactorTag& f = pres.factors[k];
    std::vector<std::vector<u64>> targets;
    for (std::size_t g = f.first_generator; g < f.first_generator + f.num_generators; ++g)
      targets.push_back(chi.restricted_to(g));
    FactorLift fl = lift_factor(factor_presentation(pres, k), targets, shape, options);
    meta.backtracks += fl.stats.backtracks;
    meta.candidates += fl.stats.candidates;
    if (auto* obs = std::get_if<Obstruction>(&fl.result)) {
      obs->factor = k;
      obs->budget_used = meta.candidates;
      return *obs;
    }
    homs.push_back(std::get<Hom>(std::move(fl.result)));
  }
  Hom h = assemble(pres, homs);
  MasseyWitness w{pres, chi, m, h, compute_transcript(h, chi), meta, false};
  return w;
}

struct NoSurjectiveTuple {
  bool exhaustive = false;
  std::size_t tuples_examined = 0;
};

using SurjectionOutcome = std::variant<MasseyWitness, Obstruction, NoSurjectiveTuple>;

inline constexpr std::size_t kTupleSearchLimit = std::size_t{1} << 20;

/// Characters chi_1..chi_n taking the first basis element of every factor,
/// then the second, and so on, truncated to length n.
inline CharacterTuple round_robin_tuple(const Presentation& pres, std::size_t n) {
  CharacterTuple chi;
  const std::size_t d = pres.num_generators();
  std::size_t round = 0;
  while (chi.n() < n) {
    bool any = false;
    for (const auto& f : pres.factors) {
      if (round >= f.num_generators) continue;
      any = true;
      // Demushkin bases start with the sigma-dual (x2), then tau (x1).
      std::size_t g = f.first_generator + round;
      if (f.kind == FactorKind::Demushkin) g = f.first_generator + (round == 0 ? 1 : 0);
      chi.chis.push_back(dual_character(d, g));
      if (chi.n() == n) break;
    }
    if (!any) break;
    ++round;
  }
  return chi;
}

/// Surjection onto U_{n+1}(Z/p^m) for n <= h1.
inline SurjectionOutcome full_rank_surjection(const Presentation& pres, std::size_t n, unsigned m,
                                              const SolverOptions& options = {}) {
  pres.validate();
  if (!pres.is_tagged()) throw MasseyError("full_rank_surjection: presentation has no factor tags");
  if (n < 2) throw MasseyError("full_rank_surjection: n must be >= 2");
  if (n > pres.h1()) throw RankTooLarge(n, pres.h1());

  auto finish = [&](const CharacterTuple& chi) -> SurjectionOutcome {
    LiftOutcome out = strong_massey_lift(pres, chi, m, options);
    if (auto* obs = std::get_if<Obstruction>(&out)) return *obs;
    MasseyWitness w = std::get<MasseyWitness>(std::move(out));
    w.claims_surjective = true;
    if (!is_generating(w.images.images)) throw std::logic_error("full_rank_surjection: lift is not surjective");
    return w;
  };

  CharacterTuple canonical = round_robin_tuple(pres, n);
  if (cup_chain_ok(pres, canonical).ok) return finish(canonical);

  // Exhaustive search over tuples with theta surjective and a vanishing cup chain.
  const std::size_t d = pres.num_generators();
  const u64 p = pres.p;
  double space = 1;
  for (std::size_t i = 0; i < d * n; ++i) space *= static_cast<double>(p);
  if (space > static_cast<double>(kTupleSearchLimit)) return NoSurjectiveTuple{false, 0};
  const auto forms = cup_forms(pres);
  std::vector<u64> flat(d * n, 0);
  std::size_t examined = 0;
  while (true) {
    ++examined;
    CharacterTuple chi;
    for (std::size_t u = 0; u < n; ++u) chi.chis.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(u * d),
                                                              flat.begin() + static_cast<std::ptrdiff_t>((u + 1) * d));
    if (fp_rank(chi.chis, p) == n) {
      bool chain = true;
      for (std::size_t u = 0; u + 1 < n && chain; ++u) chain = is_zero_vector(cup_value(forms, chi.chis[u], chi.chis[u + 1], p));
      if (chain) return finish(chi);
    }
    std::size_t c = flat.size();
    bool done = true;
    while (c > 0) {
      --c;
      if (++flat[c] < p) {
        done = false;
        break;
      }
      flat[c] = 0;
    }
    if (done) break;
  }
  return NoSurjectiveTuple{true, examined};
}

/// Generator images into U_{n+1}(F_p)/Z_{n+1}.
struct QuotientHom {
  Presentation source;
  UniShape target;
  std::vector<QuotientUniMatrix> images;
};

using DefinedOutcome = std::variant<QuotientHom, Obstruction>;

/// The Massey product <chi_1..chi_n> is defined iff theta_chi lifts to the
/// quotient by the corner; solved like a lift with the corner layer dropped.
inline DefinedOutcome defining_system(const Presentation& pres, const CharacterTuple& chi,
                                      const SolverOptions& options = {}) {
  pres.validate();
  if (chi.n() < 3) throw MasseyError("defining_system: n must be >= 3");
  for (const auto& c : chi.chis)
    if (c.size() != pres.num_generators()) throw MasseyError("defining_system: character length mismatch");
  const UniShape shape(chi.n(), PrimePower(pres.p, 1));

  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // (first gen, count)
  std::vector<std::vector<Word>> block_relators;
  if (pres.is_tagged()) {
    for (std::size_t k = 0; k < pres.factors.size(); ++k) {
      const Presentation fp = factor_presentation(pres, k);
      blocks.emplace_back(pres.factors[k].first_generator, pres.factors[k].num_generators);
      block_relators.push_back(fp.relators);
    }
  } else {
    blocks.emplace_back(0, pres.num_generators());
    block_relators.push_back(pres.relators);
  }

  std::vector<QuotientUniMatrix> images;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<std::vector<u64>> targets;
    for (std::size_t g = blocks[b].first; g < blocks[b].first + blocks[b].second; ++g) targets.push_back(chi.restricted_to(g));
    detail::LayeredLifter lifter(block_relators[b], targets, shape, shape.n() - 1, options);
    if (!lifter.run()) {
      Obstruction o = lifter.obstruction();
      o.factor = b;
      return o;
    }
    for (const auto& img : lifter.images()) images.push_back(project_quotient(img));
  }
  return QuotientHom{pres, shape, std::move(images)};
}

}  // namespace ppg
