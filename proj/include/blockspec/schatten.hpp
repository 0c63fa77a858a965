#ifndef BLOCKSPEC_SCHATTEN_HPP
#define BLOCKSPEC_SCHATTEN_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "blockspec/family.hpp"
#include "blockspec/spectrum.hpp"

namespace blockspec {

/// Compactness of the direct sum. Finite families are always compact; an
/// infinite family is compact iff the block norms tend to zero, decided
/// symbolically on the declared envelopes.
struct CompactnessVerdict {
  enum class Kind { Compact, NotCompact, Unknown };
  Kind kind = Kind::Unknown;
  std::string evidence;
  std::vector<std::int64_t> witness_indices;  // NotCompact: sampled blocks
  std::vector<double> witness_norms;
  double norm_lower_bound = 0.0;              // NotCompact: witnessed norms >= this > 0
  std::vector<double> prefix_norms;           // Unknown: what was inspected
};

CompactnessVerdict compactness_verdict(const BlockFamily& family, std::int64_t n);

/// Top-K of the merged singular-value multiset over the inspected prefix.
/// certified means no uninspected block can contribute above the K-th entry.
struct SingularMerge {
  struct Entry {
    double value;
    std::int64_t block;
    int rank;  // 1-based rank within the block
  };
  std::vector<Entry> top;  // nonincreasing
  bool certified = false;
};

SingularMerge merged_singular_values(const BlockFamily& family, std::int64_t k, std::int64_t n);

/// C_p membership via the merged singular-value series
/// sum_{n not excluded} sum_q s_q(A_n)^p, with certified tail brackets from
/// the envelopes. Verdicts are withheld (Unknown) when the family is not
/// known compact, matching the hypotheses of the series criterion.
struct SchattenDecision {
  enum class Kind { Member, NotMember, Unknown };
  Kind kind = Kind::Unknown;
  double p = 0.0;
  Interval series;                 // Member: [partial, partial + tail bound]
  Interval norm;                   // series^(1/p), elementwise
  double partial = 0.0;            // inspected partial sum (always reported)
  std::vector<std::int64_t> witness_indices;  // NotMember: growing partial sums
  std::vector<double> witness_partials;
  std::string note;
};

SchattenDecision schatten_decision(const BlockFamily& family, double p, std::int64_t n,
                                   const std::set<std::int64_t>& exclusions = {});

}  // namespace blockspec

#endif
