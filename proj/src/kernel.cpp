#include "blockspec/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "blockspec/errors.hpp"

namespace blockspec {

namespace detail {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kOverflowGuard = 1e300;
}  // namespace

std::vector<double> singular_values(const ComplexMatrix& m) {
  const auto n = m.rows();
  if (n == 1) return {std::abs(m(0, 0))};
  Eigen::VectorXd sv;
  if (n <= 64) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    sv = svd.singularValues();
  } else {
    // Large blocks: Hermitian eigensolve of A*A. Loses half the digits on
    // the smallest singular values, which is acceptable for norms and
    // top-of-spectrum queries on oracle-scale matrices.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m);
    if (es.info() != Eigen::Success)
      throw KernelError("singular value iteration failed to converge (dim " +
                        std::to_string(n) + ")");
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    sv = ev.cwiseMax(0.0).cwiseSqrt();
  }
  return {sv.data(), sv.data() + sv.size()};
}

double operator_norm(const ComplexMatrix& m) {
  return singular_values(m).front();
}

std::vector<std::complex<double>> eigenvalues(const ComplexMatrix& m, double* residual) {
  const auto n = m.rows();
  if (n == 1) {
    if (residual) *residual = 0.0;
    return {m(0, 0)};
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, residual != nullptr);
  if (es.info() != Eigen::Success)
    throw KernelError("eigenvalue iteration failed to converge (dim " + std::to_string(n) + ")");
  std::vector<std::complex<double>> values(es.eigenvalues().data(),
                                           es.eigenvalues().data() + n);
  if (residual) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXcd v = es.eigenvectors().col(k);
      double nv = v.norm();
      if (nv > 0.0) v /= nv;
      worst = std::max(worst, (m * v - es.eigenvalues()(k) * v).norm());
    }
    *residual = worst;
  }
  return values;
}

double rank_tolerance(const ComplexMatrix& m, const std::vector<double>& sv) {
  return static_cast<double>(m.rows()) * kEps * (sv.empty() ? 0.0 : sv.front());
}

}  // namespace detail

EigenSet eigenvalues(const BlockMatrix& a) {
  EigenSet out;
  out.values = detail::eigenvalues(a.entries(), &out.residual);
  return out;
}

std::vector<double> singular_values(const BlockMatrix& a) {
  return detail::singular_values(a.entries());
}

double operator_norm(const BlockMatrix& a) {
  return detail::operator_norm(a.entries());
}

ResolventNorm resolvent_norm(const BlockMatrix& a, std::complex<double> tau) {
  ComplexMatrix shifted = a.entries();
  shifted.diagonal().array() -= tau;
  std::vector<double> sv = detail::singular_values(shifted);
  double smin = sv.back();
  if (smin <= detail::rank_tolerance(shifted, sv)) return {true, 0.0};
  return {false, 1.0 / smin};
}

PowerNorms power_norms(const BlockMatrix& a, std::int64_t m_max) {
  PowerNorms out;
  ComplexMatrix power = a.entries();
  for (std::int64_t m = 1; m <= m_max; ++m) {
    if (!power.allFinite() || power.cwiseAbs().maxCoeff() > detail::kOverflowGuard) {
      out.diverged_at = m;
      return out;
    }
    out.norms.push_back(detail::operator_norm(power));
    if (m < m_max) power = power * a.entries();
  }
  return out;
}

std::optional<BlockMatrix> apply_polynomial(const BlockMatrix& a, const Polynomial& p) {
  const int n = a.dim();
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  if (p.coefficients.empty()) return BlockMatrix::make(std::move(acc));
  acc = p.coefficients.back() * ComplexMatrix::Identity(n, n);
  for (std::size_t k = p.coefficients.size() - 1; k-- > 0;) {
    acc = acc * a.entries();
    acc.diagonal().array() += p.coefficients[k];
    if (!acc.allFinite() || acc.cwiseAbs().maxCoeff() > detail::kOverflowGuard)
      return std::nullopt;
  }
  return BlockMatrix::make(std::move(acc));
}

}  // namespace blockspec
