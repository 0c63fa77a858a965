#ifndef BLOCKSPEC_BLOCK_MATRIX_HPP
#define BLOCKSPEC_BLOCK_MATRIX_HPP

#include <Eigen/Dense>
#include <complex>
#include <optional>

namespace blockspec {

using ComplexMatrix = Eigen::MatrixXcd;

/// Analytic metadata a constructor may declare about a block. Flags are
/// verified at construction, so downstream code can rely on them.
struct BlockFlags {
  bool normal = false;
  std::optional<int> nilpotency_order;
};

/// One coordinate operator of a direct sum: a finite square complex matrix.
/// Immutable after construction; construction validates finiteness and any
/// declared flags.
class BlockMatrix {
 public:
  /// Throws ConstructionError when entries are non-square/non-finite or a
  /// declared flag fails its check.
  static BlockMatrix make(ComplexMatrix entries, BlockFlags flags = {});

  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  const ComplexMatrix& entries() const noexcept { return entries_; }
  const BlockFlags& flags() const noexcept { return flags_; }

  bool operator==(const BlockMatrix& other) const {
    return entries_.rows() == other.entries_.rows() && entries_ == other.entries_;
  }

 private:
  BlockMatrix(ComplexMatrix entries, BlockFlags flags)
      : entries_(std::move(entries)), flags_(flags) {}

  ComplexMatrix entries_;
  BlockFlags flags_;
};

}  // namespace blockspec

#endif
