#include "blockspec/envelope.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "blockspec/errors.hpp"

namespace blockspec {

namespace detail {

struct ExprNode {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Log };
  Op op;
  double value = 0.0;  // Const payload; Pow exponent
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

double eval_node(const ExprNode& e, double n) {
  using Op = ExprNode::Op;
  switch (e.op) {
    case Op::Const: return e.value;
    case Op::Var: return n;
    case Op::Add: return eval_node(*e.a, n) + eval_node(*e.b, n);
    case Op::Sub: return eval_node(*e.a, n) - eval_node(*e.b, n);
    case Op::Mul: return eval_node(*e.a, n) * eval_node(*e.b, n);
    case Op::Div: return eval_node(*e.a, n) / eval_node(*e.b, n);
    case Op::Pow: return std::pow(eval_node(*e.a, n), e.value);
    case Op::Log: return std::log(eval_node(*e.a, n));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---- parser -------------------------------------------------------------

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("envelope parse error at position " + std::to_string(pos) + ": " + what +
                     " in \"" + std::string(text) + "\"");
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  NodePtr make(ExprNode::Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto node = std::make_shared<ExprNode>();
    node->op = op;
    node->value = v;
    node->a = std::move(a);
    node->b = std::move(b);
    return node;
  }

  bool contains_var(const ExprNode& e) const {
    using Op = ExprNode::Op;
    if (e.op == Op::Var) return true;
    if (e.a && contains_var(*e.a)) return true;
    if (e.b && contains_var(*e.b)) return true;
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make(ExprNode::Op::Add, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make(ExprNode::Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      char c = peek();
      if (c == '*') {
        ++pos;
        lhs = make(ExprNode::Op::Mul, lhs, parse_unary());
      } else if (c == '/') {
        ++pos;
        lhs = make(ExprNode::Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) {
      NodePtr inner = parse_unary();
      return make(ExprNode::Op::Sub, make(ExprNode::Op::Const, nullptr, nullptr, 0.0), inner);
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) {
      NodePtr exp = parse_unary();  // right-associative
      if (contains_var(*exp)) fail("exponent must be constant");
      double v = eval_node(*exp, 0.0);
      if (!std::isfinite(v)) fail("exponent does not evaluate to a finite constant");
      return make(ExprNode::Op::Pow, base, nullptr, v);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (c == 'n' || c == 'N') {
      ++pos;
      return make(ExprNode::Op::Var);
    }
    if (text.compare(pos, 4, "log(") == 0) {
      pos += 4;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')' after log argument");
      return make(ExprNode::Op::Log, inner);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text.data() + pos;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("expected number");
      pos += static_cast<std::size_t>(end - begin);
      return make(ExprNode::Op::Const, nullptr, nullptr, v);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

// ---- power/log normal form ----------------------------------------------

// A term coeff * n^xpow * log(n)^logpow. Expressions that normalize to sums
// of these admit symbolic limits and integral-test tail bounds.
struct Monomial {
  double coeff;
  double xpow;
  int logpow;
};

using MonoSum = std::vector<Monomial>;

constexpr double kExpEps = 1e-12;

MonoSum combine(MonoSum terms) {
  std::map<std::pair<double, int>, double> acc;
  for (const Monomial& m : terms) acc[{m.xpow, m.logpow}] += m.coeff;
  MonoSum out;
  for (const auto& [key, coeff] : acc) {
    if (coeff != 0.0) out.push_back({coeff, key.first, key.second});
  }
  return out;
}

std::optional<MonoSum> normalize(const ExprNode& e);

std::optional<MonoSum> normalize_mul(const MonoSum& lhs, const MonoSum& rhs) {
  MonoSum out;
  for (const Monomial& a : lhs)
    for (const Monomial& b : rhs)
      out.push_back({a.coeff * b.coeff, a.xpow + b.xpow, a.logpow + b.logpow});
  return combine(std::move(out));
}

std::optional<MonoSum> normalize_pow(const MonoSum& base, double exponent) {
  if (base.empty()) return MonoSum{};
  if (base.size() == 1) {
    const Monomial& m = base.front();
    double lp = m.xpow == 0.0 && m.logpow == 0 ? 0.0 : exponent * m.logpow;
    double lp_rounded = std::round(lp);
    if (std::abs(lp - lp_rounded) > kExpEps) return std::nullopt;
    double c = std::pow(m.coeff, exponent);
    if (!std::isfinite(c)) return std::nullopt;
    return MonoSum{{c, exponent * m.xpow, static_cast<int>(lp_rounded)}};
  }
  double rounded = std::round(exponent);
  if (std::abs(exponent - rounded) > kExpEps || rounded < 0.0 || rounded > 8.0) return std::nullopt;
  int k = static_cast<int>(rounded);
  MonoSum acc{{1.0, 0.0, 0}};
  for (int i = 0; i < k; ++i) {
    auto next = normalize_mul(acc, base);
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc;
}

std::optional<MonoSum> normalize(const ExprNode& e) {
  using Op = ExprNode::Op;
  switch (e.op) {
    case Op::Const:
      return e.value == 0.0 ? MonoSum{} : MonoSum{{e.value, 0.0, 0}};
    case Op::Var:
      return MonoSum{{1.0, 1.0, 0}};
    case Op::Add: {
      auto a = normalize(*e.a), b = normalize(*e.b);
      if (!a || !b) return std::nullopt;
      a->insert(a->end(), b->begin(), b->end());
      return combine(std::move(*a));
    }
    case Op::Sub: {
      auto a = normalize(*e.a), b = normalize(*e.b);
      if (!a || !b) return std::nullopt;
      for (Monomial& m : *b) m.coeff = -m.coeff;
      a->insert(a->end(), b->begin(), b->end());
      return combine(std::move(*a));
    }
    case Op::Mul: {
      auto a = normalize(*e.a), b = normalize(*e.b);
      if (!a || !b) return std::nullopt;
      return normalize_mul(*a, *b);
    }
    case Op::Div: {
      auto a = normalize(*e.a), b = normalize(*e.b);
      if (!a || !b || b->size() != 1 || b->front().coeff == 0.0) return std::nullopt;
      const Monomial& d = b->front();
      MonoSum out;
      for (const Monomial& m : *a)
        out.push_back({m.coeff / d.coeff, m.xpow - d.xpow, m.logpow - d.logpow});
      return combine(std::move(out));
    }
    case Op::Pow: {
      auto a = normalize(*e.a);
      if (!a) return std::nullopt;
      return normalize_pow(*a, e.value);
    }
    case Op::Log: {
      auto a = normalize(*e.a);
      if (!a || a->size() != 1) return std::nullopt;
      const Monomial& m = a->front();
      if (m.logpow != 0 || m.coeff <= 0.0) return std::nullopt;
      MonoSum out;
      if (double lc = std::log(m.coeff); lc != 0.0) out.push_back({lc, 0.0, 0});
      if (m.xpow != 0.0) out.push_back({m.xpow, 0.0, 1});
      return combine(std::move(out));
    }
  }
  return std::nullopt;
}

// lexicographic dominance: larger power of n wins, then larger log power
bool dominates(const Monomial& a, const Monomial& b) {
  if (a.xpow > b.xpow + kExpEps) return true;
  if (a.xpow < b.xpow - kExpEps) return false;
  return a.logpow > b.logpow;
}

const Monomial* dominant(const MonoSum& terms) {
  const Monomial* best = nullptr;
  for (const Monomial& m : terms) {
    if (m.coeff == 0.0) continue;
    if (!best || dominates(m, *best)) best = &m;
  }
  return best;
}

// ---- integral machinery --------------------------------------------------

struct IntegralBracket {
  double lower;
  double upper;
  bool known;
};

bool integral_converges(double xpow, int logpow) {
  if (xpow < -1.0 - kExpEps) return true;
  if (std::abs(xpow + 1.0) <= kExpEps) return logpow <= -2;
  return false;
}

// exact int_M^inf x^a log(x)^b dx for a < -1, b >= 0 via integration by parts
double power_log_integral(double a, int b, double m) {
  double v = std::pow(m, a + 1.0) / (-(a + 1.0));
  for (int k = 1; k <= b; ++k) {
    // I(a,k) = M^{a+1} log^k M / -(a+1) + k/-(a+1) * I(a,k-1)
    v = std::pow(m, a + 1.0) * std::pow(std::log(m), k) / (-(a + 1.0)) + k / (-(a + 1.0)) * v;
  }
  return v;
}

IntegralBracket monomial_tail_integral(const Monomial& t, double m) {
  if (std::abs(t.xpow + 1.0) <= kExpEps) {
    if (t.logpow > -2) return {0.0, 0.0, false};
    // int_M^inf dx/(x log^|b| x) = log(M)^{b+1} / (-b-1)
    double v = t.coeff * std::pow(std::log(m), t.logpow + 1) / static_cast<double>(-t.logpow - 1);
    return {v, v, true};
  }
  if (t.xpow > -1.0) return {0.0, 0.0, false};
  if (t.logpow >= 0) {
    double v = t.coeff * power_log_integral(t.xpow, t.logpow, m);
    return {v, v, true};
  }
  // a < -1, b < 0: log(x)^b <= log(M)^b on [M, inf), no exact closed form
  double hi = t.coeff * std::pow(std::log(m), t.logpow) * power_log_integral(t.xpow, 0, m);
  if (t.coeff >= 0.0) return {0.0, hi, true};
  return {hi, 0.0, true};
}

IntegralBracket tail_integral(const MonoSum& terms, double m) {
  IntegralBracket total{0.0, 0.0, true};
  for (const Monomial& t : terms) {
    IntegralBracket part = monomial_tail_integral(t, m);
    if (!part.known) return {0.0, 0.0, false};
    total.lower += part.lower;
    total.upper += part.upper;
  }
  return total;
}

std::vector<std::int64_t> sample_ladder(std::int64_t n0) {
  std::vector<std::int64_t> samples;
  for (std::int64_t k = 0; k < 16; ++k) samples.push_back(n0 + k);
  std::int64_t n = n0 + 15;
  for (int k = 0; k < 26; ++k) {
    if (n > (std::int64_t{1} << 40)) break;
    n *= 2;
    samples.push_back(n);
  }
  return samples;
}

}  // namespace
}  // namespace detail

Envelope::Envelope(std::shared_ptr<const detail::ExprNode> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Envelope Envelope::parse(std::string_view text) {
  detail::Parser p{text};
  auto root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return Envelope(std::move(root), std::string(text));
}

Envelope Envelope::constant(double value) {
  auto node = std::make_shared<detail::ExprNode>();
  node->op = detail::ExprNode::Op::Const;
  node->value = value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return Envelope(std::move(node), buf);
}

double Envelope::eval(double n) const { return detail::eval_node(*root_, n); }

Envelope::Limit Envelope::limit() const {
  auto terms = detail::normalize(*root_);
  if (!terms) return {LimitKind::Indeterminate, 0.0};
  const detail::Monomial* top = detail::dominant(*terms);
  if (!top) return {LimitKind::Finite, 0.0};
  if (top->xpow > detail::kExpEps || (std::abs(top->xpow) <= detail::kExpEps && top->logpow > 0)) {
    return {top->coeff > 0.0 ? LimitKind::Infinity : LimitKind::MinusInfinity, 0.0};
  }
  if (std::abs(top->xpow) <= detail::kExpEps && top->logpow == 0) {
    return {LimitKind::Finite, top->coeff};
  }
  return {LimitKind::Finite, 0.0};
}

Envelope::TailSum Envelope::tail_sum(double p, std::int64_t from) const {
  TailSum out;
  if (from < 1) from = 1;

  // Explicit prefix keeps the bracket tight and pushes the integral test
  // past the first few indices, where it is weakest.
  constexpr std::int64_t kExplicit = 12;
  double prefix = 0.0;
  for (std::int64_t n = from; n < from + kExplicit; ++n) {
    double v = eval(static_cast<double>(n));
    if (!std::isfinite(v) || v < 0.0) return out;  // Unknown: not a valid envelope here
    prefix += std::pow(v, p);
  }
  if (!std::isfinite(prefix)) return out;
  const double m = static_cast<double>(from + kExplicit - 1);

  auto base = detail::normalize(*root_);
  std::optional<detail::MonoSum> powered;
  if (base) powered = detail::normalize_pow(*base, p);

  if (!powered) {
    // Even without the closed form, a positive limit certifies divergence.
    Limit lim = limit();
    if (lim.kind == LimitKind::Infinity ||
        (lim.kind == LimitKind::Finite && lim.value > 0.0)) {
      out.kind = SumKind::Diverges;
      out.lower = prefix;
      out.upper = std::numeric_limits<double>::infinity();
    }
    return out;
  }

  const detail::Monomial* top = detail::dominant(*powered);
  if (!top) {  // identically zero tail
    out.kind = SumKind::Converges;
    out.lower = out.upper = prefix;
    return out;
  }
  if (!detail::integral_converges(top->xpow, top->logpow)) {
    if (top->coeff > 0.0) {
      out.kind = SumKind::Diverges;
      out.lower = prefix;
      out.upper = std::numeric_limits<double>::infinity();
    }
    return out;  // negative dominant term: not a valid envelope, Unknown
  }

  detail::IntegralBracket hi = detail::tail_integral(*powered, m);
  detail::IntegralBracket lo = detail::tail_integral(*powered, m + 1.0);
  if (!hi.known || !lo.known || !std::isfinite(hi.upper) || !std::isfinite(lo.lower)) return out;

  out.kind = SumKind::Converges;
  out.lower = prefix + std::max(0.0, lo.lower);
  out.upper = prefix + std::max(0.0, hi.upper);
  return out;
}

std::optional<double> Envelope::tail_inf_monotone(std::int64_t from) const {
  Limit lim = limit();
  double at_from = eval(static_cast<double>(from));
  if (!std::isfinite(at_from)) return std::nullopt;
  if (lim.kind == LimitKind::Infinity) return at_from;
  if (lim.kind != LimitKind::Finite) return std::nullopt;
  return std::min(at_from, lim.value);
}

bool Envelope::nonincreasing_on(std::int64_t n0) const {
  auto samples = detail::sample_ladder(n0);
  double prev = eval(static_cast<double>(samples.front()));
  if (!std::isfinite(prev)) return false;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    double cur = eval(static_cast<double>(samples[i]));
    if (!std::isfinite(cur)) return false;
    if (cur > prev + 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

bool Envelope::nonnegative_on(std::int64_t n0) const {
  for (std::int64_t n : detail::sample_ladder(n0)) {
    double v = eval(static_cast<double>(n));
    if (!std::isfinite(v) || v < -1e-12) return false;
  }
  return true;
}

}  // namespace blockspec
