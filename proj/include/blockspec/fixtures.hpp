#ifndef BLOCKSPEC_FIXTURES_HPP
#define BLOCKSPEC_FIXTURES_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockspec/family.hpp"

namespace blockspec {

/// The paper-example families as constructible fixtures.
///
///   scalar_ones       blocks [1]: compact coordinates, non-compact sum
///   nilpotent2        2x2 blocks [[0,0],[a_n,0]], nilpotent of order two
///   volterra          midpoint-grid discretization of a_n * int_{-x}^{x} f
///   diag_accumulating blocks [1 - 1/n]: eigenvalues accumulate at 1
///   harmonic_diag     blocks [1/n]: norms vanish, harmonic singular values
///
/// The alpha sequence is either an explicit list (finite family) or a
/// closed-form expression in n (infinite generator family).
struct FixtureSpec {
  enum class Name { ScalarOnes, Nilpotent2, Volterra, DiagAccumulating, HarmonicDiag };
  Name name = Name::ScalarOnes;
  std::optional<std::vector<std::complex<double>>> alpha_list;
  std::optional<std::string> alpha_expr;
  int nq = 0;  // volterra grid size (even, >= 2)

  static Name parse_name(const std::string& text);  // throws ParseError
  static std::string name_string(Name name);
};

/// Builds the fixture family with its analytic metadata (flags, tail
/// certificate, spectral clearance). tail_override replaces the declared
/// envelopes but keeps the fixture's spectral clearance.
BlockFamily make_fixture(const FixtureSpec& spec,
                         const std::optional<TailCertificate>& tail_override = std::nullopt);

/// Dense realization of the truncated direct sum as one block-diagonal
/// matrix. Throws ResourceError when the total dimension exceeds the cap
/// (default 2000, overridable via BLOCKSPEC_DIM_CAP).
BlockMatrix assemble(const BlockFamily& family, std::int64_t n);

std::int64_t assemble_dimension_cap();

/// Cross-validation of the block-wise formulas against the assembled matrix:
/// eigenvalue union, singular-value merge, resolvent maxima at deterministic
/// probe points, and the power-norm interchange.
struct OracleReport {
  struct Check {
    std::string name;
    bool pass = false;
    double deviation = 0.0;
    double tolerance = 0.0;
    std::string detail;
  };
  std::vector<Check> checks;
  std::int64_t assembled_dim = 0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

OracleReport oracle_check(const BlockFamily& family, std::int64_t n, std::int64_t m_powers);

/// Greedy nearest-neighbor multiset matching; returns the maximum pair
/// deviation or nullopt on size mismatch. Shared by the oracle checks and
/// the test suites.
std::optional<double> match_multisets(std::vector<std::complex<double>> a,
                                      std::vector<std::complex<double>> b);

}  // namespace blockspec

#endif
