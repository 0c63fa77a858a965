#include "blockspec/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "blockspec/boundedness.hpp"
#include "blockspec/errors.hpp"
#include "blockspec/family_json.hpp"
#include "blockspec/fixtures.hpp"
#include "blockspec/kernel.hpp"
#include "blockspec/schatten.hpp"
#include "blockspec/spectrum.hpp"

namespace blockspec::cli {

namespace {

using nlohmann::json;
using Complex = std::complex<double>;

const char* kUsage = R"(blockspec - spectral analysis of block-diagonal operator families

Usage: blockspec <subcommand> [flags]

Subcommands:
  spectrum         union of block point spectra with provenance
  classify         classify a point: point/continuous/resolvent
  resolvent-sup    sup over blocks of the resolvent norm at a point
  minimal-support  minimal index set covering the point spectrum
  compact          compactness of the direct sum
  schatten         Schatten class C_p membership
  powerbound       power bounds M_w, per block and for the family
  polybound        polynomial bounds M_p, per block and for the family
  check            cross-validate block formulas against the assembled matrix
  fixtures         list the built-in fixture families

Input (all analysis subcommands):
  --family FILE    family description file (JSON), "-" for standard input
  --fixture NAME   built-in fixture: scalar_ones | nilpotent2 | volterra |
                   diag_accumulating | harmonic_diag
  --alpha LIST     fixture alpha sequence, comma-separated numbers
  --alpha-expr E   fixture alpha sequence as an expression in n, e.g. "n"
  --nq N           volterra grid size (even)

Flags:
  --truncate N     number of blocks to inspect (default 16; explicit
                   families clamp to their size)
  --tau re,im      probe point for classify / resolvent-sup
  --p REAL         Schatten exponent (>= 1)
  --exclude i,j    block indices excluded from the Schatten series
  --powers M       power horizon (default 10)
  --samples S      random trial polynomials per block (default 48)
  --seed S         seed for the trial draws (default 20240901)
  --tol REAL       eigenvalue-identity tolerance scale (default 1e-8)
  --pretty         human-readable table instead of JSON
  --timing         include wall time in the report (breaks byte determinism)
)";

struct Args {
  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::vector<std::string> echo;

  bool has(const std::string& name) const { return flags.count(name) > 0; }
  std::string get(const std::string& name, const std::string& fallback = "") const {
    auto it = flags.find(name);
    return it == flags.end() ? fallback : it->second;
  }
};

const std::set<std::string> kValueFlags = {
    "--family", "--fixture", "--alpha", "--alpha-expr", "--nq",   "--truncate", "--tau",
    "--p",      "--exclude", "--powers", "--samples",   "--seed", "--tol"};
const std::set<std::string> kBoolFlags = {"--pretty", "--timing"};

Args parse_args(int argc, const char* const* argv) {
  Args args;
  for (int i = 0; i < argc; ++i) args.echo.emplace_back(argv[i]);
  if (argc < 2) throw ParseError("missing subcommand");
  args.subcommand = argv[1];
  for (int i = 2; i < argc; ++i) {
    std::string flag = argv[i];
    if (kBoolFlags.count(flag)) {
      args.flags[flag] = "true";
    } else if (kValueFlags.count(flag)) {
      if (i + 1 >= argc) throw ParseError("flag " + flag + " needs a value");
      args.flags[flag] = argv[++i];
    } else {
      throw ParseError("unknown flag '" + flag + "'");
    }
  }
  return args;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(what + " must be a number, got '" + text + "'");
  }
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(what + " must be an integer, got '" + text + "'");
  }
}

Complex parse_complex(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    return {parse_double(text, "--tau real part"), 0.0};
  return {parse_double(text.substr(0, comma), "--tau real part"),
          parse_double(text.substr(comma + 1), "--tau imaginary part")};
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json complex_json(Complex v) { return json::array({v.real(), v.imag()}); }

json interval_json(const Interval& iv) {
  return json{{"lo", iv.lo}, {"hi", iv.hi}};
}

struct FamilyInput {
  BlockFamily family;
  std::string digest;
  bool is_explicit;
};

FamilyInput load_family(const Args& args, std::istream& in) {
  const bool has_file = args.has("--family");
  const bool has_fixture = args.has("--fixture");
  if (has_file == has_fixture)
    throw ParseError("provide exactly one of --family or --fixture");

  if (has_file) {
    const std::string path = args.get("--family");
    std::ostringstream buffer;
    if (path == "-") {
      buffer << in.rdbuf();
    } else {
      std::ifstream file(path);
      if (!file) throw ParseError("cannot open family file '" + path + "'");
      buffer << file.rdbuf();
    }
    std::string text = buffer.str();
    BlockFamily family = load_family_text(text);
    bool exp = family.is_explicit();
    return {std::move(family), hex64(fnv1a(text)), exp};
  }

  FixtureSpec spec;
  spec.name = FixtureSpec::parse_name(args.get("--fixture"));
  std::string canonical = "fixture:" + args.get("--fixture");
  if (args.has("--alpha")) {
    std::vector<Complex> alpha;
    for (const std::string& part : split_commas(args.get("--alpha")))
      alpha.push_back({parse_double(part, "--alpha entry"), 0.0});
    if (alpha.empty()) throw ParseError("--alpha must list at least one value");
    spec.alpha_list = std::move(alpha);
    canonical += ";alpha=" + args.get("--alpha");
  }
  if (args.has("--alpha-expr")) {
    spec.alpha_expr = args.get("--alpha-expr");
    canonical += ";alpha_expr=" + *spec.alpha_expr;
  }
  if (args.has("--nq")) {
    spec.nq = static_cast<int>(parse_int(args.get("--nq"), "--nq"));
    canonical += ";nq=" + args.get("--nq");
  }
  BlockFamily family = make_fixture(spec);
  bool exp = family.is_explicit();
  return {std::move(family), hex64(fnv1a(canonical)), exp};
}

std::int64_t truncation(const Args& args) {
  std::int64_t n = parse_int(args.get("--truncate", "16"), "--truncate");
  if (n < 1) throw ParseError("--truncate must be >= 1");
  return n;
}

// ---- verdict serialization ------------------------------------------------

json spectrum_json(const SpectrumReport& report) {
  json eigs = json::array();
  for (const auto& e : report.eigenvalues) {
    eigs.push_back({{"value", complex_json(e.value)},
                    {"blocks", e.blocks},
                    {"tolerance", e.tolerance}});
  }
  return json{{"eigenvalues", eigs},
              {"completeness", report.exact ? "exact" : "truncated"},
              {"truncation_level", report.truncation_level}};
}

json resolvent_json(const ResolventSup& sup) {
  json j{{"prefix_max", sup.prefix_max}, {"inspected", sup.inspected}};
  switch (sup.kind) {
    case ResolventSup::Kind::Finite:
      j["kind"] = "finite";
      j["bound"] = interval_json(sup.bound);
      break;
    case ResolventSup::Kind::Divergent:
      j["kind"] = "divergent";
      j["witness_indices"] = sup.witness_indices;
      j["witness_norms"] = sup.witness_norms;
      break;
    case ResolventSup::Kind::Unknown:
      j["kind"] = "unknown";
      break;
  }
  if (!sup.note.empty()) j["note"] = sup.note;
  return j;
}

json classify_json(const PointClass& pc) {
  json j;
  switch (pc.kind) {
    case PointClass::Kind::Point:
      j["kind"] = "point";
      j["witness_index"] = *pc.witness_index;
      j["witness_eigenvalue"] = complex_json(*pc.witness_eigenvalue);
      break;
    case PointClass::Kind::Continuous:
      j["kind"] = "continuous";
      j["witness_indices"] = pc.witness_indices;
      j["witness_norms"] = pc.witness_norms;
      break;
    case PointClass::Kind::Residual:
      j["kind"] = "residual";
      break;
    case PointClass::Kind::Resolvent:
      j["kind"] = "resolvent";
      j["sup_bound"] = interval_json(*pc.sup_bound);
      break;
    case PointClass::Kind::Unknown:
      j["kind"] = "unknown";
      j["prefix_max"] = pc.prefix_max;
      break;
  }
  if (!pc.note.empty()) j["note"] = pc.note;
  return j;
}

json compact_json(const CompactnessVerdict& v) {
  json j{{"evidence", v.evidence}};
  switch (v.kind) {
    case CompactnessVerdict::Kind::Compact: j["kind"] = "compact"; break;
    case CompactnessVerdict::Kind::NotCompact:
      j["kind"] = "not-compact";
      j["witness_indices"] = v.witness_indices;
      j["witness_norms"] = v.witness_norms;
      j["norm_lower_bound"] = v.norm_lower_bound;
      break;
    case CompactnessVerdict::Kind::Unknown:
      j["kind"] = "unknown";
      j["prefix_norms"] = v.prefix_norms;
      break;
  }
  return j;
}

json schatten_json(const SchattenDecision& d) {
  json j{{"p", d.p}, {"partial_sum", d.partial}};
  switch (d.kind) {
    case SchattenDecision::Kind::Member:
      j["kind"] = "member";
      j["series"] = interval_json(d.series);
      j["norm"] = interval_json(d.norm);
      break;
    case SchattenDecision::Kind::NotMember:
      j["kind"] = "not-member";
      j["witness_indices"] = d.witness_indices;
      j["witness_partials"] = d.witness_partials;
      break;
    case SchattenDecision::Kind::Unknown:
      j["kind"] = "unknown";
      break;
  }
  if (!d.note.empty()) j["note"] = d.note;
  return j;
}

json power_entry_json(const PowerBoundEntry& e) {
  json j;
  if (e.kind == PowerBoundEntry::Kind::Bounded) {
    j["kind"] = "bounded";
    j["mw"] = interval_json(e.mw);
    j["method"] = e.method;
  } else {
    j["kind"] = "unbounded";
    if (e.witness_eigenvalue) j["witness_eigenvalue"] = complex_json(*e.witness_eigenvalue);
    if (e.defective_unimodular) j["defective_unimodular"] = true;
    if (e.heuristic) j["heuristic"] = true;
    if (e.diverged_at) j["diverged_at"] = *e.diverged_at;
  }
  return j;
}

json power_report_json(const PowerBoundReport& r) {
  json blocks = json::object();
  for (const auto& [idx, entry] : r.per_block) blocks[std::to_string(idx)] = power_entry_json(entry);
  json j{{"per_block", blocks}};
  switch (r.family) {
    case PowerBoundReport::Kind::Bounded:
      j["family"] = "bounded";
      j["family_mw"] = interval_json(r.family_mw);
      break;
    case PowerBoundReport::Kind::Unbounded:
      j["family"] = "unbounded";
      j["witness_indices"] = r.witness_indices;
      if (!r.witness_bounds.empty()) j["witness_bounds"] = r.witness_bounds;
      break;
    case PowerBoundReport::Kind::Unknown:
      j["family"] = "unknown";
      j["family_mw"] = interval_json(r.family_mw);
      break;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json poly_entry_json(const PolyBoundEntry& e) {
  json j{{"seed", e.seed}};
  if (e.kind == PolyBoundEntry::Kind::Bounded) {
    j["kind"] = "bounded";
    j["lo"] = e.lo;
    if (e.hi) {
      j["hi"] = *e.hi;
      j["method"] = e.method;
    }
    j["witness"] = e.witness;
  } else {
    j["kind"] = "unbounded";
    if (e.witness_monomial) j["witness_monomial"] = *e.witness_monomial;
    if (e.heuristic) j["heuristic"] = true;
  }
  return j;
}

json poly_report_json(const PolyBoundReport& r) {
  json blocks = json::object();
  for (const auto& [idx, entry] : r.per_block) blocks[std::to_string(idx)] = poly_entry_json(entry);
  json j{{"per_block", blocks}};
  switch (r.family) {
    case PolyBoundReport::Kind::Bounded:
      j["family"] = "bounded";
      j["family_lo"] = r.family_lo;
      if (r.family_hi) j["family_hi"] = *r.family_hi;
      break;
    case PolyBoundReport::Kind::Unbounded:
      j["family"] = "unbounded";
      j["witness_indices"] = r.witness_indices;
      j["witness_polynomial"] = r.witness_polynomial;
      break;
    case PolyBoundReport::Kind::Unknown:
      j["family"] = "unknown";
      j["family_lo"] = r.family_lo;
      if (r.family_hi) j["family_hi"] = *r.family_hi;
      break;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json oracle_json(const OracleReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json cj{{"name", c.name},
            {"pass", c.pass},
            {"deviation", c.deviation},
            {"tolerance", c.tolerance}};
    if (!c.detail.empty()) cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  return json{{"checks", checks}, {"assembled_dim", r.assembled_dim}};
}

// ---- pretty rendering -------------------------------------------------------

void render_pretty(const json& report, std::ostream& out) {
  const json& verdict = report.at("verdict");
  out << "subcommand : " << report.at("subcommand").get<std::string>() << "\n";
  out << "digest     : " << report.at("input_digest").get<std::string>() << "\n";
  std::function<void(const json&, int)> walk = [&](const json& node, int depth) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    if (node.is_object()) {
      for (const auto& [key, value] : node.items()) {
        if (value.is_object() || value.is_array()) {
          out << pad << key << ":\n";
          walk(value, depth + 1);
        } else {
          out << pad << key << " = " << value.dump() << "\n";
        }
      }
    } else if (node.is_array()) {
      for (const auto& value : node) {
        if (value.is_object() || value.is_array()) {
          out << pad << "-\n";
          walk(value, depth + 1);
        } else {
          out << pad << "- " << value.dump() << "\n";
        }
      }
    }
  };
  walk(verdict, 1);
}

int finish(const Args& args, const std::string& digest, json verdict, bool failed,
           std::chrono::steady_clock::time_point started, std::ostream& out) {
  json report{{"subcommand", args.subcommand},
              {"command", args.echo},
              {"input_digest", digest},
              {"verdict", std::move(verdict)}};
  if (args.has("--timing")) {
    auto elapsed = std::chrono::steady_clock::now() - started;
    report["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  }
  if (args.has("--pretty")) {
    render_pretty(report, out);
  } else {
    out << report.dump(2) << "\n";
  }
  return failed ? 1 : 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::istream& in) {
  const auto started = std::chrono::steady_clock::now();
  Args args;
  try {
    args = parse_args(argc, argv);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  }

  try {
    const std::string& cmd = args.subcommand;

    if (cmd == "help" || cmd == "--help" || cmd == "-h") {
      out << kUsage;
      return 0;
    }

    if (cmd == "fixtures") {
      json fixtures = json::array();
      fixtures.push_back({{"name", "scalar_ones"},
                          {"params", json::array()},
                          {"description", "blocks [1]; compact coordinates, non-compact sum"}});
      fixtures.push_back({{"name", "nilpotent2"},
                          {"params", {"alpha | alpha_expr"}},
                          {"description", "2x2 blocks [[0,0],[a_n,0]], nilpotent of order 2"}});
      fixtures.push_back({{"name", "volterra"},
                          {"params", {"alpha | alpha_expr", "nq"}},
                          {"description",
                           "midpoint discretization of a_n int_{-x}^{x} f(t) dt on L2(-1,1)"}});
      fixtures.push_back({{"name", "diag_accumulating"},
                          {"params", json::array()},
                          {"description", "blocks [1 - 1/n]; eigenvalues accumulate at 1"}});
      fixtures.push_back({{"name", "harmonic_diag"},
                          {"params", json::array()},
                          {"description", "blocks [1/n]; norms vanish harmonically"}});
      return finish(args, hex64(fnv1a("fixtures")), json{{"fixtures", fixtures}}, false,
                    started, out);
    }

    static const std::set<std::string> kAnalysisCommands = {
        "spectrum",  "classify",   "resolvent-sup", "minimal-support", "compact",
        "schatten",  "powerbound", "polybound",     "check"};
    if (!kAnalysisCommands.count(cmd)) throw ParseError("unknown subcommand '" + cmd + "'");

    FamilyInput input = load_family(args, in);
    const std::int64_t n = truncation(args);
    const double tol = parse_double(args.get("--tol", "1e-8"), "--tol");

    if (cmd == "spectrum") {
      SpectrumReport report = point_spectrum(input.family, n, tol);
      return finish(args, input.digest, spectrum_json(report), false, started, out);
    }

    if (cmd == "classify" || cmd == "resolvent-sup") {
      if (!args.has("--tau")) throw ParseError(cmd + " needs --tau re,im");
      Complex tau = parse_complex(args.get("--tau"));
      if (cmd == "classify") {
        PointClass pc = classify_point(input.family, tau, n, tol);
        return finish(args, input.digest, classify_json(pc), false, started, out);
      }
      try {
        ResolventSup sup = resolvent_sup(input.family, tau, n, tol);
        return finish(args, input.digest, resolvent_json(sup), false, started, out);
      } catch (const PointSpectrumError& e) {
        json verdict{{"kind", "point-spectrum-error"},
                     {"message", e.what()},
                     {"block", e.block_index},
                     {"eigenvalue", complex_json(e.eigenvalue)}};
        return finish(args, input.digest, std::move(verdict), true, started, out);
      }
    }

    if (cmd == "minimal-support") {
      std::vector<std::int64_t> support = minimal_support(input.family, n, tol);
      SpectrumReport full = point_spectrum(input.family, n, tol);
      json verdict{{"indices", support},
                   {"covered_eigenvalues", full.eigenvalues.size()},
                   {"truncation_level", full.truncation_level}};
      return finish(args, input.digest, std::move(verdict), false, started, out);
    }

    if (cmd == "compact") {
      CompactnessVerdict v = compactness_verdict(input.family, n);
      return finish(args, input.digest, compact_json(v), false, started, out);
    }

    if (cmd == "schatten") {
      if (!args.has("--p")) throw ParseError("schatten needs --p REAL");
      double p = parse_double(args.get("--p"), "--p");
      std::set<std::int64_t> exclusions;
      if (args.has("--exclude"))
        for (const std::string& part : split_commas(args.get("--exclude")))
          exclusions.insert(parse_int(part, "--exclude entry"));
      SchattenDecision d = schatten_decision(input.family, p, n, exclusions);
      return finish(args, input.digest, schatten_json(d), false, started, out);
    }

    if (cmd == "powerbound") {
      std::int64_t powers = parse_int(args.get("--powers", "10"), "--powers");
      PowerBoundReport r = power_bound_family(input.family, n, powers);
      return finish(args, input.digest, power_report_json(r), false, started, out);
    }

    if (cmd == "polybound") {
      int samples = static_cast<int>(parse_int(args.get("--samples", "48"), "--samples"));
      std::uint64_t seed =
          static_cast<std::uint64_t>(parse_int(args.get("--seed", "20240901"), "--seed"));
      PolyBoundReport r = poly_bound_family(input.family, n, samples, seed);
      return finish(args, input.digest, poly_report_json(r), false, started, out);
    }

    if (cmd == "check") {
      std::int64_t powers = parse_int(args.get("--powers", "10"), "--powers");
      OracleReport r = oracle_check(input.family, n, powers);
      return finish(args, input.digest, oracle_json(r), !r.all_pass(), started, out);
    }

    throw ParseError("unreachable subcommand '" + cmd + "'");
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "internal failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace blockspec::cli
