#ifndef BLOCKSPEC_KERNEL_HPP
#define BLOCKSPEC_KERNEL_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "blockspec/block_matrix.hpp"
#include "blockspec/polynomial.hpp"

namespace blockspec {

/// Eigenvalue multiset (with algebraic multiplicity) of one block, plus a
/// backward-error estimate max_i ||A v_i - lambda_i v_i|| over unit
/// eigenvectors.
struct EigenSet {
  std::vector<std::complex<double>> values;  // size == dim
  double residual = 0.0;
};

/// Throws KernelError when the underlying iteration fails to converge.
EigenSet eigenvalues(const BlockMatrix& a);

/// Singular values, nonincreasing, length dim.
std::vector<double> singular_values(const BlockMatrix& a);

/// Operator (spectral) norm s_1.
double operator_norm(const BlockMatrix& a);

struct ResolventNorm {
  bool is_singular = false;  // s_min below the rank-decision threshold
  double value = 0.0;        // 1 / s_min(A - tau I) when not singular
};

ResolventNorm resolvent_norm(const BlockMatrix& a, std::complex<double> tau);

/// Operator norms of A^m for m = 1..m_max, by repeated multiplication.
/// Stops early with diverged_at = m when A^m leaves the representable range.
struct PowerNorms {
  std::vector<double> norms;
  std::optional<std::int64_t> diverged_at;
};

PowerNorms power_norms(const BlockMatrix& a, std::int64_t m_max);

/// Horner evaluation p(A). nullopt when the evaluation overflows.
std::optional<BlockMatrix> apply_polynomial(const BlockMatrix& a, const Polynomial& p);

namespace detail {
// Raw-matrix variants used internally (validation, oracles).
std::vector<double> singular_values(const ComplexMatrix& m);
double operator_norm(const ComplexMatrix& m);
std::vector<std::complex<double>> eigenvalues(const ComplexMatrix& m, double* residual = nullptr);
double rank_tolerance(const ComplexMatrix& m, const std::vector<double>& sv);
}  // namespace detail

}  // namespace blockspec

#endif
