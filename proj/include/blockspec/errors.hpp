#ifndef BLOCKSPEC_ERRORS_HPP
#define BLOCKSPEC_ERRORS_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace blockspec {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value failed its construction invariants (non-finite entry, bad flag, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Malformed envelope expression, family file, or CLI argument.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the operation's domain (p < 1, grid too small, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configured resource cap would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A dense kernel iteration failed to converge.
class KernelError : public Error {
 public:
  using Error::Error;
};

/// resolvent_sup was asked about a point of the point spectrum.
class PointSpectrumError : public Error {
 public:
  PointSpectrumError(const std::string& what, std::int64_t block_index,
                     std::complex<double> eigenvalue)
      : Error(what), block_index(block_index), eigenvalue(eigenvalue) {}

  std::int64_t block_index;
  std::complex<double> eigenvalue;
};

}  // namespace blockspec

#endif
