// Finite presentations <x_1..x_d | l_1..l_r> with optional factor tags.
#pragma once

#include "ppg/ring.hpp"
#include "ppg/word.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg {

enum class FactorKind { Free, Demushkin };

/// A block of consecutive generators forming one free factor.
/// Demushkin blocks hold (x1, x2) = (tau, sigma) and one relator
/// x2 x1 x2^-1 x1^-q.
struct FactorTag {
  FactorKind kind = FactorKind::Free;
  std::size_t first_generator = 0;
  std::size_t num_generators = 0;
  std::vector<std::size_t> relators;
  mpz_class q = 0;      // Demushkin only
  unsigned level = 0;   // v_p(q - 1), Demushkin only

  [[nodiscard]] bool contains(std::size_t gen) const noexcept {
    return gen >= first_generator && gen < first_generator + num_generators;
  }
};

struct Presentation {
  u64 p = 2;
  std::vector<std::string> generators;
  std::vector<Word> relators;
  std::vector<FactorTag> factors;  // empty for untagged presentations

  [[nodiscard]] std::size_t num_generators() const noexcept { return generators.size(); }
  /// Generator rank of a minimal presentation.
  [[nodiscard]] std::size_t h1() const noexcept { return generators.size(); }
  [[nodiscard]] bool is_tagged() const noexcept { return !factors.empty(); }

  [[nodiscard]] std::optional<std::size_t> generator_index(const std::string& label) const {
    for (std::size_t i = 0; i < generators.size(); ++i)
      if (generators[i] == label) return i;
    return std::nullopt;
  }

  /// Throws std::invalid_argument when a relator or tag is out of range.
  void validate() const {
    if (!is_prime_u64(p)) throw std::invalid_argument("presentation: p is not prime");
    for (std::size_t i = 0; i < generators.size(); ++i)
      for (std::size_t j = i + 1; j < generators.size(); ++j)
        if (generators[i] == generators[j]) throw std::invalid_argument("presentation: duplicate generator " + generators[i]);
    for (const auto& r : relators)
      for (const auto& l : r)
        if (l.gen >= generators.size()) throw std::invalid_argument("presentation: relator uses unknown generator");
    if (factors.empty()) return;
    std::size_t next_gen = 0;
    std::vector<int> relator_owner(relators.size(), 0);
    for (const auto& f : factors) {
      if (f.first_generator != next_gen) throw std::invalid_argument("presentation: factor blocks must tile the generators");
      if (f.num_generators == 0) throw std::invalid_argument("presentation: empty factor");
      next_gen += f.num_generators;
      for (std::size_t r : f.relators) {
        if (r >= relators.size()) throw std::invalid_argument("presentation: factor relator out of range");
        ++relator_owner[r];
        for (const auto& l : relators[r])
          if (!f.contains(l.gen)) throw std::invalid_argument("presentation: relator leaves its factor");
      }
      if (f.kind == FactorKind::Free && !f.relators.empty()) throw std::invalid_argument("presentation: free factor with relators");
      if (f.kind == FactorKind::Demushkin) {
        if (f.num_generators != 2 || f.relators.size() != 1) throw std::invalid_argument("presentation: malformed Demushkin factor");
        const Word& w = relators[f.relators.front()];
        const std::size_t x1 = f.first_generator;
        const std::size_t x2 = x1 + 1;
        const bool shape_ok = w.size() == 4 && w[0].gen == x2 && w[0].exp == 1 && w[1].gen == x1 && w[1].exp == 1 &&
                              w[2].gen == x2 && w[2].exp == -1 && w[3].gen == x1 && w[3].exp == -f.q;
        if (!shape_ok) throw std::invalid_argument("presentation: Demushkin relator must be x2 x1 x2^-1 x1^-q");
        if (f.level < 1) throw std::invalid_argument("presentation: Demushkin level must be >= 1");
      }
    }
    if (next_gen != generators.size()) throw std::invalid_argument("presentation: factor blocks must tile the generators");
    for (int owners : relator_owner)
      if (owners != 1) throw std::invalid_argument("presentation: every relator must belong to exactly one factor");
  }
};

}  // namespace ppg
