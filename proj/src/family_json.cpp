#include "blockspec/family_json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "blockspec/errors.hpp"
#include "blockspec/fixtures.hpp"

namespace blockspec {

namespace {

using nlohmann::json;
using Complex = std::complex<double>;

Complex parse_entry(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ParseError("matrix entry must be a number or an [re,im] pair, got " + j.dump());
}

ComplexMatrix parse_matrix(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw ParseError("matrix must be a nonempty array of rows");
  const std::size_t dim = rows.size();
  ComplexMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.size() != dim)
      throw ParseError("row " + std::to_string(i) + " must have " + std::to_string(dim) +
                       " entries (square matrix)");
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = parse_entry(row[j]);
  }
  return m;
}

BlockMatrix parse_block(const json& j, std::size_t index) {
  try {
    if (j.is_object()) {
      if (!j.contains("entries")) throw ParseError("block object needs an \"entries\" field");
      BlockFlags flags;
      if (j.contains("normal")) flags.normal = j.at("normal").get<bool>();
      if (j.contains("nilpotency_order"))
        flags.nilpotency_order = j.at("nilpotency_order").get<int>();
      return BlockMatrix::make(parse_matrix(j.at("entries")), flags);
    }
    return BlockMatrix::make(parse_matrix(j));
  } catch (const Error& e) {
    throw ParseError("block at index " + std::to_string(index) + ": " + e.what());
  }
}

MeasureSpec parse_measure(const json& root) {
  if (!root.contains("measure")) return MeasureSpec::counting();
  const json& m = root.at("measure");
  if (m.is_string()) {
    if (m.get<std::string>() == "counting") return MeasureSpec::counting();
    throw ParseError("unknown measure '" + m.get<std::string>() + "'");
  }
  if (m.is_array()) {
    std::vector<double> w;
    for (const json& v : m) {
      if (!v.is_number()) throw ParseError("measure weights must be numbers");
      w.push_back(v.get<double>());
    }
    return MeasureSpec::weights(std::move(w));
  }
  throw ParseError("measure must be \"counting\" or an array of weights");
}

std::optional<TailCertificate> parse_tail(const json& root) {
  if (!root.contains("tail")) return std::nullopt;
  const json& t = root.at("tail");
  if (!t.is_object()) throw ParseError("tail must be an object");
  TailCertificate cert;
  if (t.contains("N0")) cert.start_index = t.at("N0").get<std::int64_t>();
  if (t.contains("upper")) cert.upper = Envelope::parse(t.at("upper").get<std::string>());
  if (t.contains("lower")) cert.lower = Envelope::parse(t.at("lower").get<std::string>());
  if (t.contains("singular")) {
    for (const json& s : t.at("singular"))
      cert.singular.push_back(Envelope::parse(s.get<std::string>()));
  }
  if (t.contains("dim_bound")) cert.dim_bound = t.at("dim_bound").get<int>();
  return cert;
}

BlockFamily parse_family(const json& root) {
  if (!root.is_object() || !root.contains("kind"))
    throw ParseError("family description needs a \"kind\" field");
  const std::string kind = root.at("kind").get<std::string>();

  if (kind == "explicit") {
    if (!root.contains("blocks") || !root.at("blocks").is_array() || root.at("blocks").empty())
      throw ParseError("explicit family needs a nonempty \"blocks\" array");
    std::vector<BlockMatrix> blocks;
    std::size_t index = 0;
    for (const json& b : root.at("blocks")) blocks.push_back(parse_block(b, index++));
    return make_explicit(std::move(blocks), parse_measure(root));
  }

  if (kind == "generator") {
    if (!root.contains("name")) throw ParseError("generator family needs a fixture \"name\"");
    FixtureSpec spec;
    spec.name = FixtureSpec::parse_name(root.at("name").get<std::string>());
    if (root.contains("params")) {
      const json& p = root.at("params");
      if (!p.is_object()) throw ParseError("params must be an object");
      if (p.contains("alpha")) {
        std::vector<Complex> alpha;
        for (const json& a : p.at("alpha")) alpha.push_back(parse_entry(a));
        spec.alpha_list = std::move(alpha);
      }
      if (p.contains("alpha_expr")) spec.alpha_expr = p.at("alpha_expr").get<std::string>();
      if (p.contains("nq")) spec.nq = p.at("nq").get<int>();
    }
    return make_fixture(spec, parse_tail(root));
  }

  throw ParseError("unknown family kind '" + kind + "' (expected explicit or generator)");
}

}  // namespace

BlockFamily load_family_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("family file is not valid JSON: ") + e.what());
  }
  try {
    return parse_family(root);
  } catch (const json::exception& e) {
    throw ParseError(std::string("family description malformed: ") + e.what());
  }
}

BlockFamily load_family_file(const std::string& path, std::istream& stdin_stream) {
  std::ostringstream buffer;
  if (path == "-") {
    buffer << stdin_stream.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open family file '" + path + "'");
    buffer << in.rdbuf();
  }
  return load_family_text(buffer.str());
}

}  // namespace blockspec
