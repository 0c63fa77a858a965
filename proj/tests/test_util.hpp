#ifndef BLOCKSPEC_TEST_UTIL_HPP
#define BLOCKSPEC_TEST_UTIL_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "blockspec/block_matrix.hpp"
#include "blockspec/family.hpp"

namespace blockspec::testutil {

// Randomized finite families: 2-6 blocks, dims 1-6, entries with re and im
// uniform in the unit square [0,1]^2.
inline std::vector<ComplexMatrix> random_family_raw(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> block_count(2, 6);
  std::uniform_int_distribution<int> dim_dist(1, 6);
  std::uniform_real_distribution<double> entry(0.0, 1.0);
  std::vector<ComplexMatrix> blocks;
  const int count = block_count(rng);
  for (int b = 0; b < count; ++b) {
    const int d = dim_dist(rng);
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = std::complex<double>(entry(rng), entry(rng));
    blocks.push_back(std::move(m));
  }
  return blocks;
}

inline std::vector<std::vector<ComplexMatrix>> random_corpus(int families, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<ComplexMatrix>> corpus;
  corpus.reserve(static_cast<std::size_t>(families));
  for (int i = 0; i < families; ++i) corpus.push_back(random_family_raw(rng));
  return corpus;
}

// Dense assembled block-diagonal matrix, built independently of the library
// assemble() so oracle comparisons do not share its code path.
inline ComplexMatrix assemble_raw(const std::vector<ComplexMatrix>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  ComplexMatrix big = ComplexMatrix::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    big.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return big;
}

inline BlockFamily family_of(const std::vector<ComplexMatrix>& blocks) {
  return make_explicit(blocks);
}

}  // namespace blockspec::testutil

#endif
