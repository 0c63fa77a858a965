#ifndef BLOCKSPEC_ENVELOPE_HPP
#define BLOCKSPEC_ENVELOPE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace blockspec {

namespace detail {
struct ExprNode;
}

/// A closed-form expression in the index variable n, built from constants,
/// n, +, -, *, /, ^ (constant exponent) and log(.).
///
/// Envelopes are the certificate language of the library: tail certificates
/// declare them as bounds on block norms and singular values, and the
/// analysis modules use the symbolic structure (limits, tail sums) to decide
/// suprema and series over the uninspected part of an infinite family.
class Envelope {
 public:
  /// Parses an expression such as "1/n", "3*n^2 - 1", "log(n)/n^2".
  /// Throws ParseError on malformed input.
  static Envelope parse(std::string_view text);

  static Envelope constant(double value);

  double eval(double n) const;
  double operator()(double n) const { return eval(n); }

  const std::string& text() const noexcept { return text_; }

  enum class LimitKind { Finite, Infinity, MinusInfinity, Indeterminate };
  struct Limit {
    LimitKind kind = LimitKind::Indeterminate;
    double value = 0.0;  // meaningful for Finite

    bool is_zero() const { return kind == LimitKind::Finite && value == 0.0; }
    bool is_finite() const { return kind == LimitKind::Finite; }
  };

  /// Symbolic limit as n -> infinity. Indeterminate when the expression is
  /// outside the fragment with computable power/log asymptotics.
  Limit limit() const;

  enum class SumKind { Converges, Diverges, Unknown };
  struct TailSum {
    SumKind kind = SumKind::Unknown;
    double lower = 0.0;  // certified bounds on sum_{n>=from} eval(n)^p
    double upper = 0.0;
  };

  /// Certified bracket of sum_{n=from}^inf eval(n)^p via a short explicit
  /// prefix plus the integral test on the closed form. Requires the envelope
  /// to be nonnegative and nonincreasing on [from, inf); callers validate
  /// that separately. Unknown when the form is outside the integrable
  /// fragment (then only evaluation is available).
  TailSum tail_sum(double p, std::int64_t from) const;

  /// Supremum over {n >= from} for an envelope validated nonincreasing.
  double tail_sup(std::int64_t from) const { return eval(static_cast<double>(from)); }

  /// Infimum over {n >= from} for an envelope validated monotone in either
  /// direction: min of the boundary value and the limit. nullopt when the
  /// limit is not computable.
  std::optional<double> tail_inf_monotone(std::int64_t from) const;

  /// Sampled monotonicity / sign checks on [n0, inf). These scan a fixed
  /// ladder of indices (consecutive and geometric); they are the decidable
  /// stand-in for true monotonicity of the restricted expression language.
  bool nonincreasing_on(std::int64_t n0) const;
  bool nonnegative_on(std::int64_t n0) const;

 private:
  Envelope(std::shared_ptr<const detail::ExprNode> root, std::string text);

  std::shared_ptr<const detail::ExprNode> root_;
  std::string text_;
};

}  // namespace blockspec

#endif
