#include "ppg/groups.hpp"
#include "ppg/massey.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ppg;

namespace {

// Generator order inside a Demushkin block is (x1, x2) = (tau, sigma).
constexpr std::size_t kTau = 0;
constexpr std::size_t kSigma = 1;

CharacterTuple tuple(std::vector<std::vector<u64>> chis) { return CharacterTuple{std::move(chis)}; }

std::vector<u64> plus(std::vector<u64> a, const std::vector<u64>& b, u64 p) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] + b[i]) % p;
  return a;
}

oracle::Mat dense(const UniMatrix& a) {
  return oracle::from_upper(a.shape().size(), static_cast<oracle::i64>(a.shape().ring().modulus()), a.literal());
}

// Independent re-check of a Hom and its superdiagonal congruences.
bool oracle_accepts(const MasseyWitness& w) {
  std::vector<oracle::Mat> imgs;
  for (const auto& m : w.images.images) imgs.push_back(dense(m));
  for (const auto& r : w.presentation.relators) {
    std::vector<std::pair<std::size_t, mpz_class>> word;
    for (const auto& l : r) word.emplace_back(l.gen, l.exp);
    if (!oracle::is_identity(oracle::eval(imgs, word))) return false;
  }
  const auto p = static_cast<oracle::i64>(w.presentation.p);
  for (std::size_t u = 0; u < w.chis.n(); ++u)
    for (std::size_t g = 0; g < imgs.size(); ++g)
      if (oracle::mod(imgs[g](u, u + 1) - static_cast<oracle::i64>(w.chis.chis[u][g]), p) != 0) return false;
  return true;
}

Presentation random_demushkin_coproduct(u64 p, unsigned level, std::size_t factors, std::mt19937_64& rng) {
  std::vector<Presentation> parts;
  u64 pl = 1;
  for (unsigned i = 0; i < level; ++i) pl *= p;
  for (std::size_t k = 0; k < factors; ++k) {
    if (rng() % 4 == 0) {
      parts.push_back(free_group(1 + rng() % 2, p));
    } else {
      parts.push_back(demushkin(static_cast<i64>(1 + pl * (1 + rng() % 40)), p));
    }
  }
  return coproduct(parts);
}

}  // namespace

TEST(CupChain, SpecExamples) {
  const auto g = coproduct({demushkin(19, 3), demushkin(37, 3)});
  EXPECT_TRUE(cup_chain_ok(g, tuple({dual_character(4, 1), dual_character(4, 3)})).ok);
  const auto d = demushkin(19, 3);
  const auto bad = cup_chain_ok(d, tuple({dual_character(2, kSigma), dual_character(2, kTau)}));
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.first_failure, std::optional<std::size_t>(1));
  EXPECT_TRUE(cup_chain_ok(d, tuple({dual_character(2, kSigma), dual_character(2, kSigma)})).ok);
}

TEST(LiftFactor, SpecExamples) {
  const UniShape s(2, PrimePower(3, 2));
  {
    // sigma -> (1,1), tau -> (0,0)
    const auto d = demushkin(19, 3);
    auto out = lift_factor(d, {{0, 0}, {1, 1}}, s);
    ASSERT_TRUE(std::holds_alternative<Hom>(out.result));
    const Hom& h = std::get<Hom>(out.result);
    EXPECT_TRUE(is_hom(h).ok);
    EXPECT_EQ(h.images[kSigma].at(1, 2) % 3, 1U);
    EXPECT_EQ(h.images[kSigma].at(2, 3) % 3, 1U);
    EXPECT_EQ(h.images[kTau].at(1, 2) % 3, 0U);
    // the hand-built lift is also valid
    EXPECT_TRUE(is_hom(Hom(d, s, {UniMatrix::identity(s), UniMatrix::from_literal(s, {1, 0, 1})})).ok);
  }
  {
    const auto d = demushkin(10, 3);
    auto out = lift_factor(d, {{1, 1}, {1, 1}}, s);
    ASSERT_TRUE(std::holds_alternative<Hom>(out.result));
    EXPECT_TRUE(is_hom(std::get<Hom>(out.result)).ok);
  }
  {
    const auto d = demushkin(4, 3);
    SolverOptions opts;
    opts.exhaustive_fallback = true;
    auto out = lift_factor(d, {{1, 1}, {1, 1}}, s, opts);
    ASSERT_TRUE(std::holds_alternative<Obstruction>(out.result));
    const auto& obs = std::get<Obstruction>(out.result);
    EXPECT_EQ(obs.level, 1U);
    EXPECT_EQ(obs.defect, (std::vector<u64>{6, 6}));
    EXPECT_TRUE(obs.exhaustive);
    EXPECT_FALSE(oracle::demushkin_u3_lift_exists(3, 9, 4, {1, 1}, {1, 1}));
  }
  {
    // free blocks take the canonical lift
    const UniShape big(3, PrimePower(5, 2));
    auto out = lift_factor(free_group(2, 5), {{7, 3, 0}, {0, 0, 9}}, big);
    ASSERT_TRUE(std::holds_alternative<Hom>(out.result));
    const Hom& h = std::get<Hom>(out.result);
    EXPECT_EQ(h.images[0].literal(), (std::vector<u64>{2, 0, 0, 3, 0, 0}));
    EXPECT_EQ(h.images[1].literal(), (std::vector<u64>{0, 0, 0, 0, 0, 4}));
  }
  EXPECT_THROW(lift_factor(demushkin(19, 3), {{1, 1}}, s), std::invalid_argument);
}

TEST(Assemble, SpecExamples) {
  const UniShape s(2, PrimePower(3, 1));
  const auto d1 = demushkin(19, 3);
  const auto d2 = demushkin(37, 3);
  const auto g = coproduct({d1, d2});
  const auto I = UniMatrix::identity(s);
  Hom r1(d1, s, {I, UniMatrix::elementary(s, 1, 2)});
  Hom r2(d2, s, {I, UniMatrix::elementary(s, 2, 3)});
  ASSERT_TRUE(is_hom(r1).ok);
  ASSERT_TRUE(is_hom(r2).ok);
  const Hom h = assemble(g, {r1, r2});
  EXPECT_TRUE(is_generating(h.images));
  EXPECT_TRUE(is_hom(h).ok);
  EXPECT_EQ(h.images[1], r1.images[1]);
  EXPECT_EQ(h.images[3], r2.images[1]);

  const Hom trivial = assemble(g, {Hom(d1, s), Hom(d2, s)});
  for (const auto& m : trivial.images) EXPECT_TRUE(m.is_identity());
  EXPECT_THROW(assemble(g, {r1}), std::invalid_argument);
}

TEST(StrongMasseyLift, SpecExamples) {
  {
    const auto g = coproduct({demushkin(19, 3), demushkin(37, 3)});
    auto out = strong_massey_lift(g, tuple({dual_character(4, 1), dual_character(4, 3)}), 2);
    ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out));
    const auto& w = std::get<MasseyWitness>(out);
    EXPECT_TRUE(is_generating(w.images.images));
    EXPECT_TRUE(w.transcript.all_pass(false));
    EXPECT_TRUE(verify_witness(w).all_pass);
  }
  {
    const auto g = coproduct({demushkin(19, 3), demushkin(37, 3), demushkin(73, 3), demushkin(109, 3)});
    auto out = strong_massey_lift(g, round_robin_tuple(g, 8), 2);
    ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out));
    const auto& w = std::get<MasseyWitness>(out);
    EXPECT_TRUE(is_generating(w.images.images));
    EXPECT_EQ(w.images.target.size(), 9U);
    EXPECT_TRUE(verify_witness(w).all_pass);
  }
  {
    const auto d = demushkin(4, 3);
    const auto c = plus(dual_character(2, kSigma), dual_character(2, kTau), 3);
    auto out = strong_massey_lift(d, tuple({c, c}), 2);
    ASSERT_TRUE(std::holds_alternative<Obstruction>(out));
    EXPECT_EQ(std::get<Obstruction>(out).level, 1U);
  }
  const auto d = demushkin(19, 3);
  EXPECT_THROW(strong_massey_lift(d, tuple({dual_character(2, kSigma), dual_character(2, kTau)}), 2), MasseyError);
}

TEST(RoundRobin, SigmaDualsThenTauDuals) {
  const auto g = coproduct({demushkin(19, 3), demushkin(37, 3)});
  const auto chi = round_robin_tuple(g, 4);
  EXPECT_EQ(chi.chis, (std::vector<std::vector<u64>>{dual_character(4, 1), dual_character(4, 3), dual_character(4, 0),
                                                      dual_character(4, 2)}));
}

TEST(FullRankSurjection, SpecExamples) {
  {
    const auto g = coproduct({demushkin(19, 3), demushkin(37, 3), demushkin(73, 3), demushkin(109, 3)});
    auto out = full_rank_surjection(g, 8, 2);
    ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out));
    const auto& w = std::get<MasseyWitness>(out);
    EXPECT_EQ(w.images.target.size(), 9U);
    EXPECT_EQ(w.images.target.ring().modulus(), 9U);
    const auto rep = verify_witness(w);
    EXPECT_TRUE(rep.all_pass);
    EXPECT_EQ(rep.transcript.frattini_rank, 8U);
    EXPECT_THROW(full_rank_surjection(g, 9, 2), RankTooLarge);
  }
  {
    auto out = full_rank_surjection(demushkin(19, 3), 2, 1);
    ASSERT_TRUE(std::holds_alternative<NoSurjectiveTuple>(out));
    EXPECT_TRUE(std::get<NoSurjectiveTuple>(out).exhaustive);
  }
  for (unsigned m : {1U, 2U, 3U}) {
    const auto g = coproduct({free_group(1, 3), free_group(1, 3), free_group(1, 3)});
    auto out = full_rank_surjection(g, 3, m);
    ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out));
    EXPECT_EQ(std::get<MasseyWitness>(out).images.target.size(), 4U);
    EXPECT_TRUE(verify_witness(std::get<MasseyWitness>(out)).all_pass);
  }
}

TEST(DefiningSystem, SpecExamples) {
  {
    const auto f = free_group(3, 3);
    auto out = defining_system(f, tuple({dual_character(3, 0), dual_character(3, 1), dual_character(3, 2)}));
    EXPECT_TRUE(std::holds_alternative<QuotientHom>(out));
  }
  {
    const auto g = coproduct({demushkin(19, 3), demushkin(37, 3)});
    auto out = defining_system(g, tuple({dual_character(4, 1), dual_character(4, 3), dual_character(4, 0)}));
    EXPECT_TRUE(std::holds_alternative<QuotientHom>(out));
  }
  {
    const auto d = demushkin(19, 3);
    auto out = defining_system(d, tuple({dual_character(2, kSigma), dual_character(2, kTau), dual_character(2, kTau)}));
    ASSERT_TRUE(std::holds_alternative<Obstruction>(out));
    EXPECT_EQ(std::get<Obstruction>(out).level, 2U);
  }
  EXPECT_THROW(defining_system(free_group(2, 3), tuple({dual_character(2, 0), dual_character(2, 1)})), MasseyError);
}

TEST(VerifyWitness, HandBuilt) {
  const UniShape s(2, PrimePower(3, 2));
  const auto d = demushkin(19, 3);
  const auto chi = tuple({dual_character(2, kSigma), dual_character(2, kSigma)});
  Hom h(d, s, {UniMatrix::identity(s), UniMatrix::from_literal(s, {1, 0, 1})});
  MasseyWitness w{d, chi, 2, h, compute_transcript(h, chi), {}, false};
  const auto rep = verify_witness(w);
  EXPECT_TRUE(rep.all_pass);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name;
}

// Brute force over U_3(Z/p^m)^2 for every superdiagonal class, q <= 100.
TEST(StrongMasseyLift, OracleEquivalenceOnU3) {
  std::size_t successes = 0;
  std::size_t failures = 0;
  for (u64 p : {2ULL, 3ULL}) {
    for (unsigned m : {1U, 2U}) {
      const UniShape s(2, PrimePower(p, m));
      const auto M = static_cast<oracle::i64>(s.ring().modulus());
      for (i64 q = 2; q <= 100; ++q) {
        if ((q - 1) % static_cast<i64>(p) != 0) continue;
        const auto d = demushkin(q, p);
        for (u64 a = 0; a < p * p; ++a)
          for (u64 b = 0; b < p * p; ++b) {
            const std::vector<u64> t1{a % p, a / p};
            const std::vector<u64> t2{b % p, b / p};
            const bool truth = oracle::demushkin_u3_lift_exists(static_cast<oracle::i64>(p), M, q,
                                                                {static_cast<oracle::i64>(t1[0]), static_cast<oracle::i64>(t1[1])},
                                                                {static_cast<oracle::i64>(t2[0]), static_cast<oracle::i64>(t2[1])});
            auto out = lift_factor(d, {t1, t2}, s);
            const bool solved = std::holds_alternative<Hom>(out.result);
            EXPECT_EQ(solved, truth) << "p=" << p << " m=" << m << " q=" << q << " class " << a << "," << b;
            if (solved) {
              ++successes;
              const auto& h = std::get<Hom>(out.result);
              EXPECT_TRUE(oracle::demushkin_holds(dense(h.images[0]), dense(h.images[1]), q));
              for (std::size_t u = 1; u <= 2; ++u) {
                EXPECT_EQ(h.images[0].at(u, u + 1) % p, t1[u - 1]);
                EXPECT_EQ(h.images[1].at(u, u + 1) % p, t2[u - 1]);
              }
            } else {
              ++failures;
            }
          }
      }
    }
  }
  EXPECT_GT(successes, 0U);
  EXPECT_GT(failures, 0U);
}

// Level >= m and a vanishing cup chain always give a witness; every witness
// is sound.
TEST(StrongMasseyLift, GuaranteeAndSoundness) {
  std::mt19937_64 rng(61);
  std::size_t lifted = 0;
  for (u64 p : {3ULL, 5ULL}) {
    for (unsigned m : {1U, 2U}) {
      for (int t = 0; t < 150; ++t) {
        const auto g = random_demushkin_coproduct(p, m, 1 + rng() % 3, rng);
        const std::size_t d = g.num_generators();
        const std::size_t n = 2 + rng() % 4;
        CharacterTuple chi;
        for (std::size_t u = 0; u < n; ++u) {
          std::vector<u64> c(d, 0);
          for (auto& x : c)
            if (rng() % 3 == 0) x = rng() % p;
          chi.chis.push_back(std::move(c));
        }
        if (!cup_chain_ok(g, chi).ok) continue;
        auto out = strong_massey_lift(g, chi, m);
        ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out)) << "p=" << p << " m=" << m << " t=" << t;
        const auto& w = std::get<MasseyWitness>(out);
        EXPECT_TRUE(is_hom(w.images).ok);
        EXPECT_TRUE(w.transcript.all_pass(false));
        EXPECT_TRUE(verify_witness(w).all_pass);
        EXPECT_TRUE(oracle_accepts(w));
        ++lifted;
        // vanishing implies defined
        if (n >= 3) EXPECT_TRUE(std::holds_alternative<QuotientHom>(defining_system(g, chi)));
      }
    }
  }
  EXPECT_GT(lifted, 100U);
}

// Solvability at offset 2 is the consecutive cup criterion.
TEST(DefiningSystem, LevelTwoMatchesCupChain) {
  std::mt19937_64 rng(67);
  std::size_t failing = 0;
  for (u64 p : {3ULL, 5ULL}) {
    for (int t = 0; t < 200; ++t) {
      Presentation g;
      if (rng() % 2 == 0) {
        g = random_demushkin_coproduct(p, 1, 1 + rng() % 3, rng);
      } else {
        const std::size_t d = 2 + rng() % 3;
        g = free_group(d, p);
        g.factors.clear();
        for (std::size_t k = 0, r = 1 + rng() % 2; k < r; ++k) {
          const std::size_t a = rng() % d;
          const std::size_t b = (a + 1 + rng() % (d - 1)) % d;
          g.relators.push_back(commutator_word(Word{{a, 1}}, Word{{b, 1}}));
        }
      }
      const std::size_t d = g.num_generators();
      const std::size_t n = 3 + rng() % 2;
      CharacterTuple chi;
      for (std::size_t u = 0; u < n; ++u) {
        std::vector<u64> c(d, 0);
        for (auto& x : c)
          if (rng() % 2 == 0) x = rng() % p;
        chi.chis.push_back(std::move(c));
      }
      const bool cups = cup_chain_ok(g, chi).ok;
      auto out = defining_system(g, chi);
      const bool level2_fail = std::holds_alternative<Obstruction>(out) && std::get<Obstruction>(out).level <= 2;
      EXPECT_EQ(level2_fail, !cups) << "p=" << p << " t=" << t;
      failing += cups ? 0 : 1;
    }
  }
  EXPECT_GT(failing, 20U);
}

// Superdiagonal +1 perturbations always break a congruence; for arbitrary
// single-entry perturbations verify_witness agrees with an independent check.
TEST(VerifyWitness, Perturbations) {
  const auto g = coproduct({demushkin(19, 3), demushkin(37, 3), free_group(1, 3)});
  auto out = full_rank_surjection(g, 4, 2);
  ASSERT_TRUE(std::holds_alternative<MasseyWitness>(out));
  const auto base = std::get<MasseyWitness>(out);
  ASSERT_TRUE(verify_witness(base).all_pass);
  std::mt19937_64 rng(71);
  const UniShape& s = base.images.target;
  std::size_t rejected = 0;
  for (int t = 0; t < 100; ++t) {
    MasseyWitness w = base;
    const std::size_t gen = rng() % w.images.images.size();
    auto lit = w.images.images[gen].literal();
    const std::size_t u = 1 + rng() % s.n();
    // literal index of (u, u+1) in row-major strictly-upper order
    std::size_t idx = 0;
    for (std::size_t i = 1; i < u; ++i) idx += s.size() - i;
    lit[idx] = (lit[idx] + 1) % s.ring().modulus();
    w.images.images[gen] = UniMatrix::from_literal(s, lit);
    const auto rep = verify_witness(w);
    EXPECT_FALSE(rep.all_pass);
    EXPECT_FALSE(rep.transcript.congruences_ok[u - 1]);
    rejected += rep.all_pass ? 0 : 1;
  }
  EXPECT_EQ(rejected, 100U);
  for (int t = 0; t < 100; ++t) {
    MasseyWitness w = base;
    const std::size_t gen = rng() % w.images.images.size();
    auto lit = w.images.images[gen].literal();
    const std::size_t i = rng() % lit.size();
    lit[i] = (lit[i] + 1) % s.ring().modulus();
    w.images.images[gen] = UniMatrix::from_literal(s, lit);
    const bool dense_ok = oracle_accepts(w);
    auto rep = verify_witness(w);
    bool pass = true;
    for (const auto& c : rep.checks)
      if (c.name != "transcript reproduced") pass = pass && c.pass;
    EXPECT_EQ(pass, dense_ok);
  }
}
