#include "ppg/groups.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ppg;

namespace {

UniMatrix e(const UniShape& s, std::size_t i, std::size_t j) { return UniMatrix::elementary(s, i, j); }

std::vector<std::pair<std::size_t, mpz_class>> flat(const Word& w) {
  std::vector<std::pair<std::size_t, mpz_class>> out;
  for (const auto& l : w) out.emplace_back(l.gen, l.exp);
  return out;
}

}  // namespace

TEST(Demushkin, Levels) {
  EXPECT_EQ(demushkin(19, 3).factors[0].level, 2U);
  EXPECT_EQ(demushkin(4, 3).factors[0].level, 1U);
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), 3, 33);
  EXPECT_EQ(demushkin(big * 2 + 1, 3).factors[0].level, 33U);
  EXPECT_THROW(demushkin(5, 3), NotTame);
  EXPECT_THROW(demushkin(1, 3), std::invalid_argument);
  EXPECT_NO_THROW(demushkin(19, 3).validate());
}

TEST(FreeGroup, Basics) {
  EXPECT_EQ(free_group(1, 3).h1(), 1U);
  const auto f4 = free_group(4, 3);
  EXPECT_EQ(f4.h1(), 4U);
  EXPECT_TRUE(f4.relators.empty());
  EXPECT_THROW(free_group(0, 3), std::invalid_argument);
  EXPECT_THROW(free_group(2, 9), std::invalid_argument);
}

TEST(Coproduct, Counts) {
  const auto g = coproduct({demushkin(19, 3), demushkin(37, 3)});
  EXPECT_EQ(g.num_generators(), 4U);
  EXPECT_EQ(g.relators.size(), 2U);
  EXPECT_EQ(g.h1(), 4U);
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(coproduct({demushkin(7, 3), free_group(1, 3)}).h1(), 3U);
  for (std::size_t k1 = 0; k1 <= 3; ++k1)
    for (std::size_t k2 = 0; k2 <= 3; ++k2) {
      if (k1 + k2 == 0) continue;
      std::vector<Presentation> parts;
      for (std::size_t i = 0; i < k1; ++i) parts.push_back(demushkin(19, 3));
      for (std::size_t i = 0; i < k2; ++i) parts.push_back(free_group(1, 3));
      EXPECT_EQ(coproduct(parts).h1(), 2 * k1 + k2);
    }
  EXPECT_THROW(coproduct({demushkin(19, 3), free_group(1, 5)}), std::invalid_argument);
  EXPECT_THROW(coproduct({}), std::invalid_argument);
}

TEST(Coproduct, AssociativeUpToRelabelling) {
  std::mt19937_64 rng(53);
  auto random_factor = [&]() {
    return rng() % 2 == 0 ? demushkin(1 + 3 * static_cast<i64>(1 + rng() % 50), 3) : free_group(1 + rng() % 3, 3);
  };
  for (int t = 0; t < 50; ++t) {
    const auto a = random_factor();
    const auto b = random_factor();
    const auto c = random_factor();
    const auto left = coproduct({coproduct({a, b}), c});
    const auto right = coproduct({a, coproduct({b, c})});
    EXPECT_EQ(left.h1(), right.h1());
    EXPECT_EQ(left.relators, right.relators);
    ASSERT_EQ(left.factors.size(), right.factors.size());
    for (std::size_t k = 0; k < left.factors.size(); ++k) {
      EXPECT_EQ(left.factors[k].kind, right.factors[k].kind);
      EXPECT_EQ(left.factors[k].first_generator, right.factors[k].first_generator);
      EXPECT_EQ(left.factors[k].num_generators, right.factors[k].num_generators);
      EXPECT_EQ(left.factors[k].relators, right.factors[k].relators);
      EXPECT_EQ(left.factors[k].q, right.factors[k].q);
      EXPECT_EQ(left.factors[k].level, right.factors[k].level);
    }
  }
}

TEST(Presentation, ValidateRejectsMalformedTags) {
  auto g = demushkin(19, 3);
  g.relators[0][3].exp = -10;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  auto f = free_group(2, 3);
  f.relators.push_back(Word{{0, 3}});
  f.factors[0].relators = {0};
  EXPECT_THROW(f.validate(), std::invalid_argument);
  auto h = free_group(2, 3);
  h.relators.push_back(Word{{2, 1}});
  EXPECT_THROW(h.validate(), std::invalid_argument);
}

TEST(EvalWord, SpecExamples) {
  const UniShape s(2, PrimePower(3, 2));
  const auto d19 = demushkin(19, 3);
  EXPECT_TRUE(eval_word(Hom(d19, s), Word{}).is_identity());

  // x1 = A = I+E12, x2 = B = I
  Hom h19(d19, s, {e(s, 1, 2), UniMatrix::identity(s)});
  EXPECT_TRUE(eval_word(h19, d19.relators[0]).is_identity());
  EXPECT_TRUE(is_hom(h19).ok);

  // the relator reads x2 x1 x2^-1 x1^-q; with x1 = I+E12, x2 = I+E23 and
  // x1^-10 = x1^-1 in Z/9 the value is the commutator [x2, x1]
  const auto d10 = demushkin(10, 3);
  Hom h10(d10, s, {e(s, 1, 2), e(s, 2, 3)});
  const auto v = eval_word(h10, d10.relators[0]);
  EXPECT_EQ(v, commutator(e(s, 2, 3), e(s, 1, 2)));
  const auto rep = is_hom(h10);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.relator_values[0], v);
  EXPECT_FALSE(v.is_identity());
  EXPECT_EQ(v.at(1, 2), 0U);
  EXPECT_EQ(v.at(2, 3), 0U);

  // A = I+E12, B = I+E23 in the spec orientation: A B A^-1 B^-10 = I+E13
  EXPECT_EQ(eval_word(std::vector<UniMatrix>{e(s, 1, 2), e(s, 2, 3)}, s, Word{{0, 1}, {1, 1}, {0, -1}, {1, -10}}),
            e(s, 1, 3));
  EXPECT_THROW(eval_word(h10, Word{{2, 1}}), std::invalid_argument);
}

TEST(IsHom, TrivialTarget) {
  const UniShape s(1, PrimePower(3, 1));
  const auto g = coproduct({demushkin(19, 3), free_group(2, 3)});
  EXPECT_TRUE(is_hom(Hom(g, s)).ok);
}

TEST(EvalWord, MultiplicativeAndMatchesDense) {
  std::mt19937_64 rng(59);
  for (auto [n, p, m] : {std::tuple<unsigned, u64, unsigned>{2, 3, 2}, {3, 2, 3}, {4, 5, 1}}) {
    const UniShape s(n, PrimePower(p, m));
    const auto M = static_cast<oracle::i64>(s.ring().modulus());
    for (int t = 0; t < 40; ++t) {
      std::vector<UniMatrix> imgs;
      std::vector<oracle::Mat> dense;
      for (int g = 0; g < 3; ++g) {
        std::vector<u64> lit(s.num_entries());
        for (auto& x : lit) x = rng() % s.ring().modulus();
        imgs.push_back(UniMatrix::from_literal(s, lit));
        dense.push_back(oracle::from_upper(s.size(), M, lit));
      }
      auto word = [&]() {
        Word w;
        for (std::size_t i = 0, len = rng() % 6; i < len; ++i)
          w.push_back({rng() % 3, static_cast<i64>(rng() % 41) - 20});
        return w;
      };
      const Word w1 = word();
      const Word w2 = word();
      EXPECT_EQ(eval_word(imgs, s, concat(w1, w2)), compose(eval_word(imgs, s, w1), eval_word(imgs, s, w2)));
      EXPECT_EQ(eval_word(imgs, s, w1).literal(), oracle::to_upper(oracle::eval(dense, flat(w1))));
    }
  }
}
