// Command-line front end. run() never throws: exit 0 on success, 1 on a
// well-posed negative answer, 2 on bad usage or malformed input.
#pragma once

#include "ppg/ppg.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ppg::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kNegative = 1, kUsage = 2 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct JobConfig {
  std::string command;
  u64 p = 0;
  unsigned m = 1;
  std::size_t n = 0;
  u64 bound = 0;
  unsigned B = 0;
  std::size_t budget = kDefaultBudget;
  u64 seed = 0;
  std::string poly;
  std::string coeffs;
  std::string factors;
  std::string chis;
  std::string input;
  std::string output;
  std::string ells;
  std::string mode = "all";
  std::string subset;
  u64 base = 0;
  u64 test_p = 0;
  unsigned t_size = 0;
  unsigned threads = 0;
  unsigned truncation = kDefaultMildTruncation;
  bool exhaustive = false;

  /// Everything that determines the artifact; paths and thread counts excluded.
  json to_json() const {
    return {{"command", command}, {"p", p},          {"m", m},           {"n", n},           {"bound", bound},
            {"B", B},             {"budget", budget}, {"seed", seed},     {"poly", poly},     {"coeffs", coeffs},
            {"factors", factors}, {"chis", chis},     {"ells", ells},     {"mode", mode},     {"subset", subset},
            {"base", base},       {"test_p", test_p}, {"t_size", t_size}, {"truncation", truncation},
            {"exhaustive", exhaustive}};
  }
};

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline u64 parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + s + "' is not a nonnegative integer");
  }
}

/// "q=19,q=37,free=1" -> coproduct of Demushkin and free factors.
inline Presentation presentation_from_factors(const std::string& spec, u64 p) {
  if (!is_prime_u64(p)) throw UsageError("--p must be a prime");
  std::vector<Presentation> parts;
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--factors: expected q=<int> or free=<rank>, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (key == "q") {
      mpz_class q;
      if (val.empty() || q.set_str(val, 10) != 0) throw UsageError("--factors: bad q '" + val + "'");
      parts.push_back(demushkin(q, p));
    } else if (key == "free") {
      parts.push_back(free_group(parse_u64(val, "--factors free"), p));
    } else {
      throw UsageError("--factors: unknown factor kind '" + key + "'");
    }
  }
  if (parts.empty()) throw UsageError("--factors: no factors given");
  return parts.size() == 1 ? parts.front() : coproduct(parts);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline Presentation load_presentation(const JobConfig& cfg) {
  if (!cfg.input.empty() && !cfg.factors.empty()) throw UsageError("give either -i or --factors, not both");
  if (!cfg.input.empty()) {
    json j = read_json_file(cfg.input);
    if (j.contains("problem")) j = j.at("problem").at("presentation");
    return presentation_from_json(j);
  }
  if (!cfg.factors.empty()) return presentation_from_factors(cfg.factors, cfg.p);
  throw UsageError("a presentation is required (-i FILE or --factors SPEC)");
}

/// Characters separated by ';'. Each is either a comma list of values per
/// generator or '+'-joined generator labels (sum of dual characters).
inline CharacterTuple parse_chis(const std::string& spec, const Presentation& pres) {
  CharacterTuple chi;
  const std::size_t d = pres.num_generators();
  for (const auto& item : split(spec, ';')) {
    std::vector<u64> c(d, 0);
    const bool labels = item.find_first_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ") != std::string::npos;
    if (labels) {
      for (const auto& label : split(item, '+')) {
        auto g = pres.generator_index(label);
        if (!g) throw UsageError("--chis: unknown generator '" + label + "'");
        c[*g] = (c[*g] + 1) % pres.p;
      }
    } else {
      const auto vals = split(item, ',');
      if (vals.size() != d) throw UsageError("--chis: each character needs " + std::to_string(d) + " values");
      for (std::size_t g = 0; g < d; ++g) c[g] = parse_u64(vals[g], "--chis") % pres.p;
    }
    chi.chis.push_back(std::move(c));
  }
  if (chi.chis.empty()) throw UsageError("--chis: no characters given");
  return chi;
}

inline ZPoly load_poly(const JobConfig& cfg) {
  if (!cfg.poly.empty() && !cfg.coeffs.empty()) throw UsageError("give either --poly or --coeffs, not both");
  if (!cfg.poly.empty()) return parse_poly(cfg.poly);
  if (!cfg.coeffs.empty()) {
    std::vector<mpz_class> desc;
    for (const auto& c : split(cfg.coeffs, ',')) {
      mpz_class v;
      if (v.set_str(c, 10) != 0) throw UsageError("--coeffs: bad coefficient '" + c + "'");
      desc.push_back(v);
    }
    return poly_from_coeffs_desc(desc);
  }
  throw UsageError("a polynomial is required (--poly or --coeffs)");
}

inline void require_prime(u64 p, const char* flag) {
  if (!is_prime_u64(p)) throw UsageError(std::string(flag) + " must be a prime");
}

struct Output {
  std::vector<json> lines;  // artifact, one JSON value per line
  int code = kOk;
};

inline SolverOptions solver_options(const JobConfig& cfg) {
  SolverOptions o;
  o.budget = cfg.budget;
  o.seed = cfg.seed;
  o.exhaustive_fallback = cfg.exhaustive;
  return o;
}

inline Output execute(const JobConfig& cfg) {
  Output out;
  const std::string& c = cfg.command;
  if (c == "mild") {
    Presentation pres = load_presentation(cfg);
    if (cfg.truncation < 2 || cfg.truncation > kMaxTruncation) throw UsageError("--truncation must be in [2, 6]");
    MildResult r = check_mild(pres, cfg.truncation);
    out.lines.push_back(mild_to_json(r, pres));
    out.code = std::holds_alternative<MildCertificate>(r) ? kOk : kNegative;
  } else if (c == "cup") {
    Presentation pres = load_presentation(cfg);
    CharacterTuple chi = parse_chis(cfg.chis, pres);
    if (chi.n() < 2) throw UsageError("cup needs at least two characters");
    const auto forms = cup_forms(pres);
    json values = json::array();
    bool chain = true;
    for (std::size_t u = 0; u + 1 < chi.n(); ++u) {
      auto v = cup_value(forms, chi.chis[u], chi.chis[u + 1], pres.p);
      chain = chain && is_zero_vector(v);
      values.push_back({{"u", u + 1}, {"values", v}, {"zero", is_zero_vector(v)}});
    }
    out.lines.push_back({{"cups", std::move(values)}, {"chain_vanishes", chain}, {"p2_convention", pres.p == 2}});
  } else if (c == "lift") {
    Presentation pres = load_presentation(cfg);
    if (cfg.m < 1) throw UsageError("--m must be >= 1");
    if (cfg.chis.empty()) {
      if (cfg.n < 2) throw UsageError("lift needs --chis or --n >= 2");
      SurjectionOutcome r = full_rank_surjection(pres, cfg.n, cfg.m, solver_options(cfg));
      if (auto* w = std::get_if<MasseyWitness>(&r)) {
        out.lines.push_back(witness_to_json(*w));
      } else if (auto* o = std::get_if<Obstruction>(&r)) {
        out.lines.push_back(obstruction_to_json(*o));
        out.code = kNegative;
      } else {
        const auto& none = std::get<NoSurjectiveTuple>(r);
        out.lines.push_back({{"result", "no_surjective_tuple"}, {"exhaustive", none.exhaustive}, {"tuples_examined", none.tuples_examined}});
        out.code = kNegative;
      }
    } else {
      CharacterTuple chi = parse_chis(cfg.chis, pres);
      if (cfg.n != 0 && cfg.n != chi.n()) throw UsageError("--n disagrees with the number of characters");
      if (!cup_chain_ok(pres, chi).ok) {
        auto bad = *cup_chain_ok(pres, chi).first_failure;
        out.lines.push_back({{"result", "precondition_cup"}, {"u", bad}});
        out.code = kNegative;
        return out;
      }
      LiftOutcome r = strong_massey_lift(pres, chi, cfg.m, solver_options(cfg));
      if (auto* w = std::get_if<MasseyWitness>(&r)) {
        out.lines.push_back(witness_to_json(*w));
      } else {
        out.lines.push_back(obstruction_to_json(std::get<Obstruction>(r)));
        out.code = kNegative;
      }
    }
  } else if (c == "verify") {
    if (cfg.input.empty()) throw UsageError("verify needs -i WITNESS");
    MasseyWitness w = witness_from_json(read_json_file(cfg.input));
    VerificationReport rep = verify_witness(w);
    json checks = json::array();
    for (const auto& line : rep.checks) checks.push_back({{"check", line.name}, {"pass", line.pass}});
    out.lines.push_back({{"result", rep.all_pass ? "pass" : "fail"},
                         {"checks", std::move(checks)},
                         {"frattini_rank", rep.transcript.frattini_rank},
                         {"surjective", rep.transcript.surjective}});
    out.code = rep.all_pass ? kOk : kNegative;
  } else if (c == "defined") {
    Presentation pres = load_presentation(cfg);
    CharacterTuple chi = parse_chis(cfg.chis, pres);
    if (chi.n() < 3) throw UsageError("defined needs at least three characters");
    DefinedOutcome r = defining_system(pres, chi, solver_options(cfg));
    if (auto* q = std::get_if<QuotientHom>(&r)) {
      json imgs = json::array();
      for (const auto& a : q->images) imgs.push_back(matrix_literal_json(a.representative()));
      out.lines.push_back({{"result", "defined"}, {"n", chi.n()}, {"images", std::move(imgs)}, {"corner_dropped", true}});
    } else {
      out.lines.push_back(obstruction_to_json(std::get<Obstruction>(r)));
      out.code = kNegative;
    }
  } else if (c == "tame-scan") {
    ZPoly f = load_poly(cfg);
    require_prime(cfg.p, "--p");
    if (cfg.bound < 2) throw UsageError("--bound must be >= 2");
    for (const auto& r : scan_tame(f, cfg.p, cfg.m, cfg.bound, cfg.threads)) out.lines.push_back(tame_report_to_json(r));
  } else if (c == "signature") {
    ZPoly f = load_poly(cfg);
    Signature s = signature(f);
    out.lines.push_back({{"poly", poly_to_string(f)}, {"degree", degree(f)}, {"r1", s.r1}, {"r2", s.r2}});
  } else if (c == "rank") {
    ZPoly f = load_poly(cfg);
    require_prime(cfg.p, "--p");
    SMode mode;
    std::vector<std::size_t> chosen;
    if (cfg.mode == "all") {
      mode = SMode::AllOfSp;
    } else if (cfg.mode == "subset") {
      mode = SMode::SubsetViaFactorization;
      for (const auto& s : split(cfg.subset, ',')) chosen.push_back(parse_u64(s, "--subset"));
    } else {
      throw UsageError("--mode must be 'all' or 'subset'");
    }
    out.lines.push_back(rank_report_to_json(rank_report(f, cfg.p, mode, cfg.t_size, chosen)));
  } else if (c == "qray") {
    std::vector<u64> ells;
    for (const auto& s : split(cfg.ells, ',')) ells.push_back(parse_u64(s, "--ells"));
    if (cfg.B < 1) throw UsageError("--B must be >= 1");
    QRayStructure q = q_ray_structure(cfg.p, ells, cfg.B);
    out.lines.push_back(q_ray_to_json(q));
    out.code = q.match ? kOk : kNegative;
  } else if (c == "wieferich") {
    if (cfg.base < 2) throw UsageError("--base must be >= 2");
    if (cfg.test_p != 0) {
      const bool hit = wieferich_test(cfg.base, cfg.test_p);
      out.lines.push_back({{"base", int_json(cfg.base)}, {"p", int_json(cfg.test_p)}, {"wieferich", hit}});
    } else {
      if (cfg.bound < 2) throw UsageError("wieferich needs --p or --bound");
      json hits = json::array();
      for (u64 p : wieferich_scan(cfg.base, cfg.bound, cfg.threads)) hits.push_back(int_json(p));
      out.lines.push_back({{"base", int_json(cfg.base)}, {"bound", int_json(cfg.bound)}, {"primes", std::move(hits)}});
    }
  } else {
    throw UsageError("unknown command '" + c + "'");
  }
  return out;
}

/// Parses argv into a JobConfig, or the exit code when parsing ends the run
/// (help, version, usage error).
inline std::variant<JobConfig, int> parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  JobConfig cfg;
  CLI::App app{"Exact computations with pro-p groups, Massey products and unipotent lifts", "ppg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto presentation_opts = [&](CLI::App* s) {
    s->add_option("-i,--json-in", cfg.input, "presentation JSON file");
    s->add_option("--factors", cfg.factors, "coproduct spec, e.g. q=19,q=37,free=1");
    s->add_option("--p", cfg.p, "prime (with --factors)");
  };
  auto solver_opts = [&](CLI::App* s) {
    s->add_option("--budget", cfg.budget, "backtracking candidates per layer")->check(CLI::PositiveNumber);
    s->add_option("--seed", cfg.seed, "0 for lexicographic candidate order");
    s->add_flag("--exhaustive", cfg.exhaustive, "brute-force fallback for U_3 over rings of size <= 9");
  };
  auto poly_opts = [&](CLI::App* s) {
    s->add_option("--poly", cfg.poly, "polynomial such as x^8-32*x^6+...");
    s->add_option("--coeffs", cfg.coeffs, "coefficients from the leading one down, comma separated");
  };
  auto output_opt = [&](CLI::App* s) { s->add_option("-o,--output", cfg.output, "write the artifact here"); };

  CLI::App* mild = app.add_subcommand("mild", "certify mildness of a presentation");
  presentation_opts(mild);
  mild->add_option("--truncation", cfg.truncation, "Magnus truncation degree");
  output_opt(mild);

  CLI::App* cup = app.add_subcommand("cup", "consecutive cup products of characters");
  presentation_opts(cup);
  cup->add_option("--chis", cfg.chis, "characters separated by ';'")->required();
  output_opt(cup);

  CLI::App* lift = app.add_subcommand("lift", "m-strong Massey lift or full-rank surjection");
  presentation_opts(lift);
  lift->add_option("--m", cfg.m, "work over Z/p^m")->required();
  lift->add_option("--n", cfg.n, "tuple length; without --chis a full-rank surjection is built");
  lift->add_option("--chis", cfg.chis, "characters separated by ';'");
  solver_opts(lift);
  output_opt(lift);

  CLI::App* verify = app.add_subcommand("verify", "re-verify a witness file");
  verify->add_option("-i,--json-in", cfg.input, "witness JSON")->required();
  output_opt(verify);

  CLI::App* defined = app.add_subcommand("defined", "decide whether a Massey product is defined");
  presentation_opts(defined);
  defined->add_option("--chis", cfg.chis, "characters separated by ';'")->required();
  solver_opts(defined);
  output_opt(defined);

  CLI::App* scan = app.add_subcommand("tame-scan", "rational primes with a prime above of tame level >= m");
  poly_opts(scan);
  scan->add_option("--p", cfg.p)->required();
  scan->add_option("--m", cfg.m)->required();
  scan->add_option("--bound", cfg.bound)->required();
  scan->add_option("--threads", cfg.threads, "worker threads (capped by PPG_THREADS)");
  output_opt(scan);

  CLI::App* sig = app.add_subcommand("signature", "signature (r1, r2)");
  poly_opts(sig);
  output_opt(sig);

  CLI::App* rank = app.add_subcommand("rank", "Z_p-rank r = delta - (r1 + r2 - 1 + |T|)");
  poly_opts(rank);
  rank->add_option("--p", cfg.p)->required();
  rank->add_option("--t-size", cfg.t_size, "|T|");
  rank->add_option("--mode", cfg.mode, "all | subset");
  rank->add_option("--subset", cfg.subset, "indices of the chosen primes above p (subset mode)");
  output_opt(rank);

  CLI::App* qray = app.add_subcommand("qray", "p-part of (Z/p^B l_1...l_r)^x against the predicted structure");
  qray->add_option("--p", cfg.p)->required();
  qray->add_option("--ells", cfg.ells, "tame primes, comma separated")->required();
  qray->add_option("--B", cfg.B)->required();
  output_opt(qray);

  CLI::App* wief = app.add_subcommand("wieferich", "Wieferich test (--p) or scan (--bound)");
  wief->add_option("--base", cfg.base)->required();
  wief->add_option("--p", cfg.test_p, "test this prime");
  wief->add_option("--bound", cfg.bound, "scan primes up to this bound");
  wief->add_option("--threads", cfg.threads);
  output_opt(wief);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return cfg;
}

/// Config plus the bytes of the input file, if any.
inline std::string config_identity(const JobConfig& cfg) {
  std::string id = cfg.to_json().dump();
  if (!cfg.input.empty()) {
    std::ifstream in(cfg.input, std::ios::binary);
    id += '\n';
    id.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return id;
}

inline void write_lines(std::ostream& os, const std::vector<json>& lines) {
  for (const auto& j : lines) os << j.dump() << '\n';
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  auto parsed = parse_args(argc, argv, out, err);
  if (const int* code = std::get_if<int>(&parsed)) return *code;
  const JobConfig& cfg = std::get<JobConfig>(parsed);

  const json header = {{"ppg", kVersion},
                       {"command", cfg.command},
                       {"config_hash", fnv1a_hex(config_identity(cfg))},
                       {"seed", cfg.seed}};
  out << header.dump() << '\n';
  try {
    Output result = execute(cfg);
    if (!cfg.output.empty()) {
      std::ofstream f(cfg.output);
      if (!f) throw UsageError("cannot write '" + cfg.output + "'");
      if (result.lines.size() == 1 && cfg.command != "tame-scan")
        f << result.lines.front().dump(2) << '\n';
      else
        write_lines(f, result.lines);
      out << json{{"written", cfg.output}, {"exit", result.code}}.dump() << '\n';
    } else {
      write_lines(out, result.lines);
    }
    return result.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    out << json{{"error", e.what()}}.dump() << '\n';
    return kUsage;
  }
}

}  // namespace ppg::cli
