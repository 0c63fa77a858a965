#ifndef BLOCKSPEC_SPECTRUM_HPP
#define BLOCKSPEC_SPECTRUM_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockspec/family.hpp"

namespace blockspec {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Union of block point spectra over an inspected prefix, deduplicated by
/// greedy nearest-neighbor clustering at the per-block eigenvalue tolerance.
struct SpectrumReport {
  struct Entry {
    std::complex<double> value;            // cluster representative (first occurrence)
    std::vector<std::int64_t> blocks;      // contributing block indices
    double tolerance = 0.0;
  };
  std::vector<Entry> eigenvalues;
  std::int64_t truncation_level = 0;
  bool exact = false;  // true iff the family is explicit and fully covered
};

SpectrumReport point_spectrum(const BlockFamily& family, std::int64_t n,
                              double tol_scale = 1e-8);

/// sup over blocks of ||R_tau(A_n)||, decided over the inspected prefix plus
/// tail certificates. Explicit families are evaluated exactly over all
/// blocks. Throws PointSpectrumError when tau is (numerically) an eigenvalue
/// of an inspected block.
struct ResolventSup {
  enum class Kind { Finite, Divergent, Unknown };
  Kind kind = Kind::Unknown;
  Interval bound;                              // Finite: two-sided bracket of the sup
  std::vector<std::int64_t> witness_indices;   // Divergent: blocks with growing resolvents
  std::vector<double> witness_norms;
  double prefix_max = 0.0;                     // max over inspected blocks (always)
  std::int64_t inspected = 0;
  std::string note;
};

ResolventSup resolvent_sup(const BlockFamily& family, std::complex<double> tau,
                           std::int64_t n, double tol_scale = 1e-8);

/// Classification of tau against the direct sum: eigenvalue of some block
/// (point), certified divergent resolvent sup (continuous), certified finite
/// sup (resolvent set), or unknown. Residual never occurs: the coordinate
/// blocks are finite-dimensional.
struct PointClass {
  enum class Kind { Point, Continuous, Residual, Resolvent, Unknown };
  Kind kind = Kind::Unknown;
  std::optional<std::int64_t> witness_index;            // Point
  std::optional<std::complex<double>> witness_eigenvalue;
  std::vector<std::int64_t> witness_indices;             // Continuous
  std::vector<double> witness_norms;
  std::optional<Interval> sup_bound;                     // Resolvent
  double prefix_max = 0.0;
  std::string note;
};

PointClass classify_point(const BlockFamily& family, std::complex<double> tau,
                          std::int64_t n, double tol_scale = 1e-8);

/// Minimal countable support: subset of the first n indices whose point
/// spectra cover the whole union. Greedy in index order, then reduced so the
/// result is inclusion-minimal (removing any retained index loses coverage).
std::vector<std::int64_t> minimal_support(const BlockFamily& family, std::int64_t n,
                                          double tol_scale = 1e-8);

}  // namespace blockspec

#endif
