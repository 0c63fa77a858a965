#ifndef BLOCKSPEC_FAMILY_HPP
#define BLOCKSPEC_FAMILY_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "blockspec/block_matrix.hpp"
#include "blockspec/envelope.hpp"

namespace blockspec {

/// Atomic measure metadata: every one-point set carries strictly positive
/// weight. Validated at construction and carried along, but it never enters
/// the numerics — all implemented formulas depend only on the blocks.
class MeasureSpec {
 public:
  static MeasureSpec counting() { return MeasureSpec{}; }
  /// Throws ConstructionError unless every weight is strictly positive and finite.
  static MeasureSpec weights(std::vector<double> w);

  bool is_counting() const noexcept { return weights_.empty(); }
  const std::vector<double>& weight_list() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Declared closed-form knowledge about the uninspected tail of an infinite
/// family. The envelopes make the paper's infinite suprema and series
/// decidable: upper bounds block norms (nonincreasing), lower underestimates
/// them, singular[q-1] bounds the q-th singular value (zero beyond the list),
/// and spectral_clearance(tau) lower-bounds dist(tau, sigma_p(A_n)).
struct TailCertificate {
  std::int64_t start_index = 1;  // N0: envelopes valid for n >= N0
  std::optional<Envelope> upper;
  std::optional<Envelope> lower;
  std::vector<Envelope> singular;
  std::optional<int> dim_bound;  // max block dimension on the tail
  std::function<std::optional<Envelope>(std::complex<double>)> spectral_clearance;
};

/// An indexed family (A_n), n >= 1: either an explicit finite list or a pure
/// deterministic generator declared infinite, with optional tail certificate.
class BlockFamily {
 public:
  using Generator = std::function<BlockMatrix(std::int64_t)>;

  bool is_explicit() const noexcept {
    return std::holds_alternative<std::vector<BlockMatrix>>(source_);
  }
  bool is_generator() const noexcept { return !is_explicit(); }

  /// Number of blocks for explicit families.
  std::int64_t explicit_size() const;

  /// 1-based block access; generator families evaluate lazily.
  BlockMatrix block(std::int64_t index) const;

  const std::optional<TailCertificate>& tail() const noexcept { return tail_; }
  const MeasureSpec& measure() const noexcept { return measure_; }

  friend BlockFamily make_explicit(std::vector<BlockMatrix>, MeasureSpec);
  friend BlockFamily make_generator(Generator, std::optional<TailCertificate>, MeasureSpec);

 private:
  BlockFamily() = default;
  std::variant<std::vector<BlockMatrix>, Generator> source_;
  std::optional<TailCertificate> tail_;
  MeasureSpec measure_;
};

/// Builds a finite family. Throws ConstructionError on an empty list.
BlockFamily make_explicit(std::vector<BlockMatrix> blocks,
                          MeasureSpec measure = MeasureSpec::counting());

/// Raw-matrix convenience: validation failures name the offending index.
BlockFamily make_explicit(const std::vector<ComplexMatrix>& raw,
                          MeasureSpec measure = MeasureSpec::counting());

/// Wraps a pure generator as an infinite family. The certificate, when
/// present, is sample-validated against the generated blocks (envelope sign,
/// monotonicity of the upper envelope, and consistency with computed norms).
BlockFamily make_generator(BlockFamily::Generator gen,
                           std::optional<TailCertificate> tail = std::nullopt,
                           MeasureSpec measure = MeasureSpec::counting());

struct Truncation {
  std::vector<BlockMatrix> blocks;
  bool clamped = false;  // explicit family shorter than the request
};

/// First `count` blocks in index order; explicit families clamp and report it.
Truncation truncate(const BlockFamily& family, std::int64_t count);

}  // namespace blockspec

#endif
