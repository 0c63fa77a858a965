#include "blockspec/block_matrix.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"

namespace blockspec {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_nilpotency(const ComplexMatrix& m, int order) {
  const auto n = m.rows();
  if (order < 1)
    throw ConstructionError("nilpotency_order must be >= 1");
  if (order > n)
    throw ConstructionError("nilpotency_order " + std::to_string(order) +
                            " exceeds dimension " + std::to_string(n));
  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  for (int k = 0; k < order - 1; ++k) power = power * m;
  if (order > 1 && power.isZero(0.0))
    throw ConstructionError("declared nilpotency_order " + std::to_string(order) +
                            " but a lower power is already zero");
  power = power * m;
  if (!power.isZero(0.0))
    throw ConstructionError("declared nilpotency_order " + std::to_string(order) +
                            " but that power is not exactly zero");
}

void check_normal(const ComplexMatrix& m) {
  const auto n = m.rows();
  double norm;
  double commutator;
  if (n <= 128) {
    norm = detail::operator_norm(m);
    commutator = detail::operator_norm(ComplexMatrix(m.adjoint() * m - m * m.adjoint()));
  } else {
    norm = m.norm();  // Frobenius fallback for big blocks
    commutator = (m.adjoint() * m - m * m.adjoint()).norm();
  }
  if (commutator > static_cast<double>(n) * kEps * norm * norm)
    throw ConstructionError("normal flag declared but ||A*A - AA*|| exceeds tolerance");
}
}  // namespace

BlockMatrix BlockMatrix::make(ComplexMatrix entries, BlockFlags flags) {
  if (entries.rows() < 1 || entries.rows() != entries.cols())
    throw ConstructionError("block must be a square matrix of dimension >= 1");
  for (Eigen::Index i = 0; i < entries.rows(); ++i)
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const auto& v = entries(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw ConstructionError("non-finite entry at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
    }
  if (flags.nilpotency_order) check_nilpotency(entries, *flags.nilpotency_order);
  if (flags.normal) check_normal(entries);
  return BlockMatrix(std::move(entries), flags);
}

}  // namespace blockspec
