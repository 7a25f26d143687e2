// Group words over generators x_0 .. x_{d-1} with arbitrary integer exponents.
#pragma once

#include "ppg/ring.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace ppg {

struct Letter {
  std::size_t gen = 0;
  mpz_class exp = 1;

  friend bool operator==(const Letter& a, const Letter& b) { return a.gen == b.gen && a.exp == b.exp; }
};

using Word = std::vector<Letter>;

inline Word concat(const Word& a, const Word& b) {
  Word w = a;
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

inline Word inverse_word(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back({it->gen, -it->exp});
  return out;
}

/// [a, b] = a b a^-1 b^-1 as words.
inline Word commutator_word(const Word& a, const Word& b) {
  return concat(concat(a, b), concat(inverse_word(a), inverse_word(b)));
}

/// Total exponent of generator g in w.
inline mpz_class exponent_sum(const Word& w, std::size_t g) {
  mpz_class s = 0;
  for (const auto& l : w)
    if (l.gen == g) s += l.exp;
  return s;
}

inline std::size_t max_generator(const Word& w) {
  std::size_t m = 0;
  for (const auto& l : w) m = std::max(m, l.gen + 1);
  return m;
}

}  // namespace ppg
