#ifndef BLOCKSPEC_POLYNOMIAL_HPP
#define BLOCKSPEC_POLYNOMIAL_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace blockspec {

/// p(z) = a_0 + a_1 z + ... + a_q z^q. The degree is the declared coefficient
/// count minus one; a zero leading coefficient is allowed.
struct Polynomial {
  std::vector<std::complex<double>> coefficients;  // a_0 first

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }

  std::complex<double> eval(std::complex<double> z) const {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * z + coefficients[k];
    return acc;
  }

  static Polynomial monomial(int degree, std::complex<double> coeff = 1.0) {
    Polynomial p;
    p.coefficients.assign(static_cast<std::size_t>(degree) + 1, {0.0, 0.0});
    p.coefficients.back() = coeff;
    return p;
  }
};

}  // namespace blockspec

#endif
