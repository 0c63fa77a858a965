#ifndef BLOCKSPEC_BOUNDEDNESS_HPP
#define BLOCKSPEC_BOUNDEDNESS_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockspec/family.hpp"
#include "blockspec/polynomial.hpp"
#include "blockspec/spectrum.hpp"

namespace blockspec {

/// Power-bound analysis of one block: a two-sided bracket for
/// M_w = max(1, sup_m ||A^m||), or an unboundedness witness.
struct PowerBoundEntry {
  enum class Kind { Bounded, Unbounded };
  Kind kind = Kind::Bounded;
  Interval mw{1.0, 1.0};
  std::string method;  // nilpotent-exact | cycle-exact | power-dip | cauchy | kreiss
  std::optional<std::complex<double>> witness_eigenvalue;  // |lambda| > 1, or defective cluster
  bool defective_unimodular = false;
  bool heuristic = false;  // the defectiveness rank test is a numerical call
  std::vector<double> witness_norms;
  std::optional<std::int64_t> diverged_at;
};

PowerBoundEntry power_bound_block(const BlockMatrix& a, std::int64_t m_max);

struct PowerBoundReport {
  enum class Kind { Bounded, Unbounded, Unknown };
  std::map<std::int64_t, PowerBoundEntry> per_block;
  Kind family = Kind::Unknown;
  Interval family_mw{1.0, 1.0};
  std::vector<std::int64_t> witness_indices;  // Unbounded
  std::vector<double> witness_bounds;         // diverging per-block lower bounds
  std::string note;
};

PowerBoundReport power_bound_family(const BlockFamily& family, std::int64_t n,
                                    std::int64_t m_max);

/// Certified bracket of ||p||_inf = sup_{|z|<=1} |p(z)| sampled on the unit
/// circle. Polynomials with at most two nonzero coefficients are evaluated in
/// closed form; otherwise the upper end carries the Bernstein sampling slack.
Interval poly_sup_norm(const Polynomial& p, int grid);

/// Polynomial-bound analysis of one block: certified lower bound from trial
/// polynomials and an upper bound where one of the closed-form routes
/// applies (nilpotency of order two, von Neumann for contractions, Cauchy
/// integral for spectral radius < 1).
struct PolyBoundEntry {
  enum class Kind { Bounded, Unbounded };
  Kind kind = Kind::Bounded;
  double lo = 1.0;
  std::optional<double> hi;
  std::uint64_t seed = 0;  // replay seed for the random trial draws
  std::string method;      // provenance of hi
  std::string witness;     // best lower-bound polynomial
  std::optional<int> witness_monomial;  // Unbounded: degree of the monomial witness
  bool heuristic = false;
};

PolyBoundEntry poly_bound_block(const BlockMatrix& a, int samples, std::uint64_t seed);

struct PolyBoundReport {
  enum class Kind { Bounded, Unbounded, Unknown };
  std::map<std::int64_t, PolyBoundEntry> per_block;
  Kind family = Kind::Unknown;
  double family_lo = 1.0;
  std::optional<double> family_hi;
  std::vector<std::int64_t> witness_indices;
  std::string witness_polynomial;  // Unbounded: e.g. "z"
  std::string note;
};

PolyBoundReport poly_bound_family(const BlockFamily& family, std::int64_t n,
                                  int samples = 48, std::uint64_t seed = 20240901);

}  // namespace blockspec

#endif
