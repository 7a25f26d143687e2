// JSON forms of presentations, witnesses and reports. Integers that do not
// fit in 53 bits are written as decimal strings; readers accept either.
#pragma once

#include "ppg/groups.hpp"
#include "ppg/magnus.hpp"
#include "ppg/massey.hpp"
#include "ppg/numtheory.hpp"

#include <nlohmann/json.hpp>

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg {

using json = nlohmann::ordered_json;

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr u64 kMaxSafeJsonInteger = (u64{1} << 53) - 1;

inline json int_json(const mpz_class& v) {
  if (abs(v) <= mpz_class(static_cast<unsigned long>(kMaxSafeJsonInteger))) return v.get_si();
  return v.get_str();
}

inline json int_json(u64 v) {
  if (v <= kMaxSafeJsonInteger) return v;
  return std::to_string(v);
}

inline mpz_class json_mpz(const json& j) {
  if (j.is_number_integer()) return j.is_number_unsigned() ? to_mpz(j.get<u64>()) : to_mpz(j.get<i64>());
  if (j.is_string()) {
    mpz_class v;
    if (v.set_str(j.get<std::string>(), 10) != 0) throw FormatError("not an integer: " + j.get<std::string>());
    return v;
  }
  throw FormatError("expected an integer, got " + j.dump());
}

inline u64 json_u64(const json& j) {
  mpz_class v = json_mpz(j);
  if (v < 0) throw FormatError("expected a nonnegative integer, got " + v.get_str());
  return mpz_to_u64(v);
}

template <typename T>
T require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

inline const json& require_field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

// ---------------------------------------------------------------- presentations

inline json presentation_to_json(const Presentation& pres) {
  json j;
  j["p"] = int_json(pres.p);
  j["generators"] = pres.generators;
  json rels = json::array();
  for (const auto& w : pres.relators) {
    json word = json::array();
    for (const auto& l : w) word.push_back(json::array({pres.generators.at(l.gen), int_json(l.exp)}));
    rels.push_back(std::move(word));
  }
  j["relators"] = std::move(rels);
  if (pres.is_tagged()) {
    json fs = json::array();
    for (const auto& f : pres.factors) {
      if (f.kind == FactorKind::Demushkin)
        fs.push_back({{"kind", "demushkin"}, {"q", f.q.get_str()}});
      else
        fs.push_back({{"kind", "free"}, {"rank", f.num_generators}});
    }
    j["factors"] = std::move(fs);
  }
  return j;
}

/// Factor entries consume generators in order; a Demushkin entry also
/// consumes the next relator.
inline Presentation presentation_from_json(const json& j) {
  Presentation pres;
  pres.p = json_u64(require_field(j, "p"));
  pres.generators = require<std::vector<std::string>>(j, "generators");
  const json& rels = require_field(j, "relators");
  if (!rels.is_array()) throw FormatError("'relators' must be an array");
  for (const auto& word : rels) {
    if (!word.is_array()) throw FormatError("relator must be an array of [generator, exponent] pairs");
    Word w;
    for (const auto& letter : word) {
      if (!letter.is_array() || letter.size() != 2 || !letter[0].is_string())
        throw FormatError("letter must be [generator, exponent], got " + letter.dump());
      auto idx = pres.generator_index(letter[0].get<std::string>());
      if (!idx) throw FormatError("unknown generator '" + letter[0].get<std::string>() + "'");
      w.push_back({*idx, json_mpz(letter[1])});
    }
    pres.relators.push_back(std::move(w));
  }
  if (j.contains("factors")) {
    std::size_t gen = 0;
    std::size_t rel = 0;
    for (const auto& f : j.at("factors")) {
      const auto kind = require<std::string>(f, "kind");
      FactorTag tag;
      tag.first_generator = gen;
      if (kind == "demushkin") {
        tag.kind = FactorKind::Demushkin;
        tag.num_generators = 2;
        tag.q = json_mpz(require_field(f, "q"));
        if (tag.q < 2) throw FormatError("demushkin q must be >= 2");
        if (is_prime_u64(pres.p)) {
          mpz_class qm1 = tag.q - 1;
          if (mpz_divisible_ui_p(qm1.get_mpz_t(), static_cast<unsigned long>(pres.p)) == 0) throw NotTame(tag.q.get_str());
          tag.level = valuation(qm1, pres.p);
        }
        tag.relators = {rel++};
      } else if (kind == "free") {
        tag.kind = FactorKind::Free;
        tag.num_generators = require<std::size_t>(f, "rank");
      } else {
        throw FormatError("unknown factor kind '" + kind + "'");
      }
      gen += tag.num_generators;
      pres.factors.push_back(std::move(tag));
    }
    if (gen != pres.num_generators()) throw FormatError("factors do not cover the generators");
    if (rel != pres.relators.size()) throw FormatError("factors do not account for every relator");
  }
  pres.validate();
  return pres;
}

// ---------------------------------------------------------------- witnesses

inline json matrix_literal_json(const UniMatrix& a) {
  json row = json::array();
  for (u64 x : a.literal()) row.push_back(int_json(x));
  return row;
}

inline json transcript_to_json(const WitnessTranscript& t) {
  return {{"relators_ok", t.relators_ok},
          {"congruences_ok", t.congruences_ok},
          {"frattini_rank", t.frattini_rank},
          {"surjective", t.surjective}};
}

inline WitnessTranscript transcript_from_json(const json& j) {
  WitnessTranscript t;
  t.relators_ok = require<std::vector<bool>>(j, "relators_ok");
  t.congruences_ok = require<std::vector<bool>>(j, "congruences_ok");
  t.frattini_rank = require<std::size_t>(j, "frattini_rank");
  t.surjective = require<bool>(j, "surjective");
  return t;
}

inline json chis_to_json(const CharacterTuple& chi) {
  json out = json::array();
  for (const auto& c : chi.chis) {
    json row = json::array();
    for (u64 v : c) row.push_back(int_json(v));
    out.push_back(std::move(row));
  }
  return out;
}

inline CharacterTuple chis_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("'chis' must be an array");
  CharacterTuple chi;
  for (const auto& row : j) {
    if (!row.is_array()) throw FormatError("each character must be an array");
    std::vector<u64> c;
    for (const auto& v : row) c.push_back(json_u64(v));
    chi.chis.push_back(std::move(c));
  }
  return chi;
}

inline json witness_to_json(const MasseyWitness& w) {
  json j;
  j["format"] = "ppg-witness/1";
  j["problem"] = {{"presentation", presentation_to_json(w.presentation)},
                  {"p", int_json(w.presentation.p)},
                  {"m", w.m},
                  {"n", w.n()},
                  {"chis", chis_to_json(w.chis)},
                  {"surjective", w.claims_surjective}};
  json imgs = json::array();
  for (const auto& a : w.images.images) imgs.push_back(matrix_literal_json(a));
  j["images"] = std::move(imgs);
  json t = transcript_to_json(w.transcript);
  json checks = json::array();
  for (const auto& c : verify_witness(w).checks) checks.push_back({{"check", c.name}, {"pass", c.pass}});
  t["checks"] = std::move(checks);
  j["transcript"] = std::move(t);
  j["solver"] = {{"budget", w.solver.budget},
                 {"backtracks", w.solver.backtracks},
                 {"candidates", w.solver.candidates},
                 {"seed", int_json(w.solver.seed)}};
  return j;
}

inline MasseyWitness witness_from_json(const json& j) {
  const json& prob = require_field(j, "problem");
  Presentation pres = presentation_from_json(require_field(prob, "presentation"));
  const u64 p = json_u64(require_field(prob, "p"));
  if (p != pres.p) throw FormatError("problem.p differs from the presentation prime");
  const auto m = require<unsigned>(prob, "m");
  const auto n = require<std::size_t>(prob, "n");
  CharacterTuple chi = chis_from_json(require_field(prob, "chis"));
  if (chi.n() != n) throw FormatError("problem.n differs from the number of characters");
  if (m < 1) throw FormatError("m must be >= 1");
  const UniShape shape(n, PrimePower(p, m));
  const json& imgs = require_field(j, "images");
  if (!imgs.is_array()) throw FormatError("'images' must be an array");
  std::vector<UniMatrix> images;
  for (const auto& lit : imgs) {
    if (!lit.is_array()) throw FormatError("image must be an array of entries");
    std::vector<u64> entries;
    for (const auto& v : lit) entries.push_back(json_u64(v));
    images.push_back(UniMatrix::from_literal(shape, entries));
  }
  if (images.size() != pres.num_generators()) throw FormatError("one image per generator required");
  Hom h(pres, shape, std::move(images));
  WitnessTranscript t = transcript_from_json(require_field(j, "transcript"));
  SolverMeta meta;
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    meta.budget = require<std::size_t>(s, "budget");
    meta.backtracks = require<std::size_t>(s, "backtracks");
    meta.candidates = s.value("candidates", std::size_t{0});
    meta.seed = s.contains("seed") ? json_u64(s.at("seed")) : 0;
  }
  const bool surj = prob.value("surjective", false);
  return MasseyWitness{std::move(pres), std::move(chi), m, std::move(h), std::move(t), meta, surj};
}

// ---------------------------------------------------------------- reports

inline json obstruction_to_json(const Obstruction& o) {
  json defect = json::array();
  for (u64 v : o.defect) defect.push_back(int_json(v));
  return {{"result", "obstruction"},
          {"level", o.level},
          {"factor", o.factor},
          {"defect", std::move(defect)},
          {"equations", o.equations},
          {"unknowns", o.unknowns},
          {"cokernel", o.cokernel},
          {"budget_used", o.budget_used},
          {"exhaustive", o.exhaustive}};
}

inline json mild_to_json(const MildResult& r, const Presentation& pres) {
  auto letters = [&](const std::vector<std::size_t>& gens) {
    json out = json::array();
    for (std::size_t g : gens) out.push_back(pres.generators.at(g));
    return out;
  };
  if (const auto* c = std::get_if<MildCertificate>(&r)) {
    json leading = json::array();
    for (const auto& m : c->leading) leading.push_back(monomial_to_string(m));
    return {{"result", "mild"},
            {"leading", std::move(leading)},
            {"heads", letters(c->heads)},
            {"tails", letters(c->tails)},
            {"order", c->order_ranks},
            {"truncation", c->truncation},
            {"p2_convention", c->p2_convention}};
  }
  const auto& rej = std::get<MildRejection>(r);
  json out = {{"result", "rejected"}, {"relator", rej.relator}, {"reason", to_string(rej.reason)}};
  if (!rej.leading.empty()) {
    out["leading"] = monomial_to_string(rej.leading);
    out["coefficient"] = int_json(rej.coefficient);
  }
  return out;
}

inline json tame_report_to_json(const TamePrimeReport& r) {
  json norms = json::array();
  for (const auto& n : r.norms) norms.push_back(int_json(n));
  return {{"ell", int_json(r.ell)},
          {"degrees", r.degrees},
          {"norms", std::move(norms)},
          {"levels", r.levels},
          {"divides_disc", r.divides_disc},
          {"ramified", r.ramified}};
}

inline json rank_report_to_json(const RankReport& r) {
  return {{"p", int_json(r.p)},
          {"r1", r.sig.r1},
          {"r2", r.sig.r2},
          {"delta", r.delta},
          {"t_size", r.t_size},
          {"rank", r.rank},
          {"unipotent_size", r.unipotent_size}};
}

inline json q_ray_to_json(const QRayStructure& q) {
  json ells = json::array();
  for (u64 l : q.ells) ells.push_back(int_json(l));
  json comp = json::array();
  for (u64 c : q.computed) comp.push_back(int_json(c));
  json pred = json::array();
  for (u64 c : q.predicted) pred.push_back(int_json(c));
  return {{"p", int_json(q.p)},
          {"ells", std::move(ells)},
          {"exponents", q.exponents},
          {"B", q.B},
          {"computed", std::move(comp)},
          {"predicted", std::move(pred)},
          {"match", q.match}};
}

}  // namespace ppg
