// Pro-p group models: free factors, tame Demushkin factors, coproducts, and
// homomorphisms into unipotent groups.
#pragma once

#include "ppg/presentation.hpp"
#include "ppg/ring.hpp"
#include "ppg/unipotent.hpp"
#include "ppg/word.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg {

class NotTame : public std::invalid_argument {
 public:
  explicit NotTame(const std::string& q) : std::invalid_argument("q = " + q + " is not congruent to 1 mod p") {}
};

/// Rank-2 Demushkin group <x1, x2 | x2 x1 x2^-1 x1^-q>, modelling the pro-p
/// local group at a tame prime of norm q. Generator x1 is tau, x2 is sigma.
inline Presentation demushkin(const mpz_class& q, u64 p) {
  if (!is_prime_u64(p)) throw std::invalid_argument("demushkin: p is not prime");
  if (q < 2) throw std::invalid_argument("demushkin: q must be >= 2");
  mpz_class qm1 = q - 1;
  if (mpz_divisible_ui_p(qm1.get_mpz_t(), static_cast<unsigned long>(p)) == 0) throw NotTame(q.get_str());
  Presentation pres;
  pres.p = p;
  pres.generators = {"x1", "x2"};
  pres.relators = {Word{{1, 1}, {0, 1}, {1, -1}, {0, -q}}};
  FactorTag tag;
  tag.kind = FactorKind::Demushkin;
  tag.first_generator = 0;
  tag.num_generators = 2;
  tag.relators = {0};
  tag.q = q;
  tag.level = valuation(qm1, p);
  pres.factors = {tag};
  return pres;
}

inline Presentation demushkin(i64 q, u64 p) { return demushkin(to_mpz(q), p); }

/// Free pro-p group of rank d.
inline Presentation free_group(std::size_t d, u64 p) {
  if (!is_prime_u64(p)) throw std::invalid_argument("free_group: p is not prime");
  if (d < 1) throw std::invalid_argument("free_group: rank must be >= 1");
  Presentation pres;
  pres.p = p;
  for (std::size_t i = 1; i <= d; ++i) pres.generators.push_back("x" + std::to_string(i));
  FactorTag tag;
  tag.kind = FactorKind::Free;
  tag.first_generator = 0;
  tag.num_generators = d;
  pres.factors = {tag};
  return pres;
}

/// Free pro-p product. Generators are relabelled x<k>_<j> (factor k,
/// position j); factor tags are flattened. If any input is untagged the
/// result is untagged.
inline Presentation coproduct(const std::vector<Presentation>& parts) {
  if (parts.empty()) throw std::invalid_argument("coproduct: need at least one factor");
  const u64 p = parts.front().p;
  bool all_tagged = true;
  for (const auto& part : parts) {
    if (part.p != p) throw std::invalid_argument("coproduct: prime mismatch");
    all_tagged = all_tagged && part.is_tagged();
  }

  Presentation out;
  out.p = p;
  std::size_t block = 0;
  for (const auto& part : parts) {
    const std::size_t gen_offset = out.generators.size();
    const std::size_t rel_offset = out.relators.size();
    for (const auto& r : part.relators) {
      Word w = r;
      for (auto& l : w) l.gen += gen_offset;
      out.relators.push_back(std::move(w));
    }
    if (all_tagged) {
      for (const auto& f : part.factors) {
        ++block;
        FactorTag t = f;
        t.first_generator += gen_offset;
        for (auto& r : t.relators) r += rel_offset;
        for (std::size_t j = 1; j <= f.num_generators; ++j)
          out.generators.push_back("x" + std::to_string(block) + "_" + std::to_string(j));
        out.factors.push_back(std::move(t));
      }
    } else {
      ++block;
      for (std::size_t j = 1; j <= part.num_generators(); ++j)
        out.generators.push_back("x" + std::to_string(block) + "_" + std::to_string(j));
    }
  }
  return out;
}

/// The presentation of factor k alone, generators and relators reindexed.
inline Presentation factor_presentation(const Presentation& pres, std::size_t k) {
  const FactorTag& f = pres.factors.at(k);
  Presentation out;
  out.p = pres.p;
  for (std::size_t g = 0; g < f.num_generators; ++g) out.generators.push_back(pres.generators[f.first_generator + g]);
  FactorTag t = f;
  t.first_generator = 0;
  t.relators.clear();
  for (std::size_t r : f.relators) {
    Word w = pres.relators[r];
    for (auto& l : w) l.gen -= f.first_generator;
    t.relators.push_back(out.relators.size());
    out.relators.push_back(std::move(w));
  }
  out.factors = {t};
  return out;
}

/// A generator assignment into U_{n+1}(Z/p^m).
struct Hom {
  Presentation source;
  UniShape target;
  std::vector<UniMatrix> images;

  Hom(Presentation src, const UniShape& shape) : source(std::move(src)), target(shape) {
    images.assign(source.num_generators(), UniMatrix::identity(shape));
  }
  Hom(Presentation src, const UniShape& shape, std::vector<UniMatrix> imgs)
      : source(std::move(src)), target(shape), images(std::move(imgs)) {
    if (images.size() != source.num_generators()) throw std::invalid_argument("Hom: one image per generator required");
    for (const auto& m : images)
      if (!(m.shape() == target)) throw std::invalid_argument("Hom: image shape mismatch");
  }
};

inline UniMatrix eval_word(const std::vector<UniMatrix>& images, const UniShape& shape, const Word& w) {
  UniMatrix acc = UniMatrix::identity(shape);
  for (const auto& l : w) {
    if (l.gen >= images.size()) throw std::invalid_argument("eval_word: unknown generator");
    if (l.exp == 1) {
      acc = compose(acc, images[l.gen]);
    } else if (l.exp == -1) {
      acc = compose(acc, invert(images[l.gen]));
    } else {
      acc = compose(acc, power(images[l.gen], l.exp));
    }
  }
  return acc;
}

inline UniMatrix eval_word(const Hom& h, const Word& w) { return eval_word(h.images, h.target, w); }

struct HomReport {
  bool ok = true;
  std::vector<bool> relator_ok;
  std::vector<UniMatrix> relator_values;  // the defect when not the identity
};

inline HomReport is_hom(const Hom& h) {
  HomReport report;
  for (const auto& r : h.source.relators) {
    UniMatrix v = eval_word(h, r);
    const bool ok = v.is_identity();
    report.ok = report.ok && ok;
    report.relator_ok.push_back(ok);
    report.relator_values.push_back(std::move(v));
  }
  return report;
}

}  // namespace ppg
