#include "blockspec/family.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"

namespace blockspec {

MeasureSpec MeasureSpec::weights(std::vector<double> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw ConstructionError("measure weight at index " + std::to_string(i + 1) +
                              " must be strictly positive and finite");
  }
  MeasureSpec m;
  m.weights_ = std::move(w);
  return m;
}

std::int64_t BlockFamily::explicit_size() const {
  return static_cast<std::int64_t>(std::get<std::vector<BlockMatrix>>(source_).size());
}

BlockMatrix BlockFamily::block(std::int64_t index) const {
  if (index < 1) throw DomainError("block index must be >= 1");
  if (is_explicit()) {
    const auto& list = std::get<std::vector<BlockMatrix>>(source_);
    if (index > static_cast<std::int64_t>(list.size()))
      throw DomainError("block index " + std::to_string(index) + " beyond explicit family of " +
                        std::to_string(list.size()));
    return list[static_cast<std::size_t>(index - 1)];
  }
  return std::get<Generator>(source_)(index);
}

namespace {

void validate_certificate(const TailCertificate& tail, const BlockFamily::Generator& gen) {
  const std::int64_t n0 = tail.start_index;
  if (n0 < 1) throw ConstructionError("tail certificate start_index must be >= 1");
  if (!tail.upper && !tail.lower && tail.singular.empty() && !tail.spectral_clearance)
    throw ConstructionError("tail certificate declares no envelope");

  if (tail.upper) {
    if (!tail.upper->nonnegative_on(n0))
      throw ConstructionError("upper envelope must be nonnegative on the tail");
    if (!tail.upper->nonincreasing_on(n0))
      throw ConstructionError("upper envelope must be nonincreasing on the tail");
  }
  if (tail.lower && !tail.lower->nonnegative_on(n0))
    throw ConstructionError("lower envelope must be nonnegative on the tail");
  for (const Envelope& s : tail.singular)
    if (!s.nonnegative_on(n0) || !s.nonincreasing_on(n0))
      throw ConstructionError("singular envelopes must be nonnegative and nonincreasing");
  if (tail.dim_bound && *tail.dim_bound < 1)
    throw ConstructionError("dim_bound must be >= 1");

  // Spot-check the declared envelopes against generated blocks. Expensive
  // blocks get fewer samples.
  BlockMatrix first = gen(n0);
  const int sample_count = first.dim() > 256 ? 2 : 6;
  for (int k = 0; k < sample_count; ++k) {
    const std::int64_t n = n0 + (k < 3 ? k : (std::int64_t{1} << (2 * k)) / 4);
    BlockMatrix blk = k == 0 ? first : gen(n);
    const double nrm = operator_norm(blk);
    const double slack = 1e-9 * std::max(1.0, nrm);
    if (tail.upper && tail.upper->eval(static_cast<double>(n)) < nrm - slack)
      throw ConstructionError("upper envelope below block norm at index " + std::to_string(n));
    if (tail.lower && tail.lower->eval(static_cast<double>(n)) > nrm + slack)
      throw ConstructionError("lower envelope above block norm at index " + std::to_string(n));
    if (tail.dim_bound && blk.dim() > *tail.dim_bound)
      throw ConstructionError("block dimension exceeds declared dim_bound at index " +
                              std::to_string(n));
    if (!tail.singular.empty()) {
      std::vector<double> sv = singular_values(blk);
      for (std::size_t q = 0; q < sv.size(); ++q) {
        double bound = q < tail.singular.size()
                           ? tail.singular[q].eval(static_cast<double>(n))
                           : 0.0;
        if (sv[q] > bound + slack)
          throw ConstructionError("singular envelope below s_" + std::to_string(q + 1) +
                                  " at index " + std::to_string(n));
      }
    }
  }
}

}  // namespace

BlockFamily make_explicit(std::vector<BlockMatrix> blocks, MeasureSpec measure) {
  if (blocks.empty()) throw ConstructionError("explicit family needs at least one block");
  BlockFamily f;
  f.source_ = std::move(blocks);
  f.measure_ = std::move(measure);
  return f;
}

BlockFamily make_explicit(const std::vector<ComplexMatrix>& raw, MeasureSpec measure) {
  if (raw.empty()) throw ConstructionError("explicit family needs at least one block");
  std::vector<BlockMatrix> blocks;
  blocks.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      blocks.push_back(BlockMatrix::make(raw[i]));
    } catch (const ConstructionError& e) {
      throw ConstructionError("block at index " + std::to_string(i) + ": " + e.what());
    }
  }
  return make_explicit(std::move(blocks), std::move(measure));
}

BlockFamily make_generator(BlockFamily::Generator gen, std::optional<TailCertificate> tail,
                           MeasureSpec measure) {
  if (!gen) throw ConstructionError("generator function must be callable");
  if (tail) validate_certificate(*tail, gen);
  BlockFamily f;
  f.source_ = std::move(gen);
  f.tail_ = std::move(tail);
  f.measure_ = std::move(measure);
  return f;
}

Truncation truncate(const BlockFamily& family, std::int64_t count) {
  if (count < 1) throw DomainError("truncation count must be >= 1");
  Truncation out;
  std::int64_t effective = count;
  if (family.is_explicit() && count > family.explicit_size()) {
    effective = family.explicit_size();
    out.clamped = true;
  }
  out.blocks.reserve(static_cast<std::size_t>(effective));
  for (std::int64_t n = 1; n <= effective; ++n) out.blocks.push_back(family.block(n));
  return out;
}

}  // namespace blockspec
