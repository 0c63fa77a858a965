#include "blockspec/schatten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"

namespace blockspec {

namespace {

std::int64_t inspected_count(const BlockFamily& family, std::int64_t n) {
  if (n < 1) throw DomainError("truncation level must be >= 1");
  return family.is_explicit() ? std::min(n, family.explicit_size()) : n;
}

}  // namespace

CompactnessVerdict compactness_verdict(const BlockFamily& family, std::int64_t n) {
  CompactnessVerdict out;
  if (family.is_explicit()) {
    out.kind = CompactnessVerdict::Kind::Compact;
    out.evidence = "finite direct sum of finite-dimensional blocks";
    return out;
  }

  const auto& tail = family.tail();
  if (tail && tail->upper) {
    Envelope::Limit lim = tail->upper->limit();
    if (lim.is_zero()) {
      out.kind = CompactnessVerdict::Kind::Compact;
      out.evidence = "norm envelope " + tail->upper->text() + " tends to zero";
      return out;
    }
  }
  if (tail && tail->lower) {
    Envelope::Limit lim = tail->lower->limit();
    const bool stays_positive =
        lim.kind == Envelope::LimitKind::Infinity ||
        (lim.kind == Envelope::LimitKind::Finite && lim.value > 0.0);
    if (stays_positive) {
      // Sample far-out blocks, where the lower envelope is near its limit,
      // as concrete witnesses.
      double least = std::numeric_limits<double>::infinity();
      const std::int64_t base = std::max<std::int64_t>(tail->start_index, 64);
      for (std::int64_t idx : {base, 4 * base, 16 * base}) {
        double nrm = operator_norm(family.block(idx));
        out.witness_indices.push_back(idx);
        out.witness_norms.push_back(nrm);
        least = std::min(least, nrm);
      }
      if (least > 0.0) {
        out.kind = CompactnessVerdict::Kind::NotCompact;
        out.norm_lower_bound = least;
        out.evidence = "lower norm envelope " + tail->lower->text() + " does not vanish";
        return out;
      }
      out.witness_indices.clear();
      out.witness_norms.clear();
    }
  }

  out.kind = CompactnessVerdict::Kind::Unknown;
  const std::int64_t keep = std::min<std::int64_t>(n, 32);
  for (std::int64_t k = 1; k <= keep; ++k)
    out.prefix_norms.push_back(operator_norm(family.block(k)));
  out.evidence = tail ? "envelopes do not decide the norm limit"
                      : "missing certificate: no tail envelopes declared";
  return out;
}

SingularMerge merged_singular_values(const BlockFamily& family, std::int64_t k, std::int64_t n) {
  if (k < 1) throw DomainError("k must be >= 1");
  const std::int64_t count = inspected_count(family, n);

  SingularMerge out;
  std::vector<SingularMerge::Entry> all;
  for (std::int64_t idx = 1; idx <= count; ++idx) {
    std::vector<double> sv = singular_values(family.block(idx));
    for (std::size_t q = 0; q < sv.size(); ++q)
      all.push_back({sv[q], idx, static_cast<int>(q + 1)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.block != b.block) return a.block < b.block;
    return a.rank < b.rank;
  });
  if (static_cast<std::int64_t>(all.size()) > k) all.resize(static_cast<std::size_t>(k));
  out.top = std::move(all);

  if (family.is_explicit()) {
    out.certified = n >= family.explicit_size();
    return out;
  }
  const auto& tail = family.tail();
  if (tail && tail->upper && count + 1 >= tail->start_index &&
      static_cast<std::int64_t>(out.top.size()) == k) {
    out.certified = tail->upper->tail_sup(count + 1) < out.top.back().value;
  }
  return out;
}

SchattenDecision schatten_decision(const BlockFamily& family, double p, std::int64_t n,
                                   const std::set<std::int64_t>& exclusions) {
  if (!(p >= 1.0)) throw DomainError("Schatten exponent p must be >= 1");
  const std::int64_t count = inspected_count(family, n);

  SchattenDecision out;
  out.p = p;

  // Ordered partial sum over non-excluded inspected blocks; the fixed
  // summation order keeps reports reproducible.
  double partial = 0.0;
  std::vector<std::int64_t> sample_indices;
  std::vector<double> sample_partials;
  for (std::int64_t idx = 1; idx <= count; ++idx) {
    if (exclusions.count(idx)) continue;
    for (double s : singular_values(family.block(idx))) partial += std::pow(s, p);
    if (idx == count / 4 || idx == count / 2 || idx == count) {
      sample_indices.push_back(idx);
      sample_partials.push_back(partial);
    }
  }
  out.partial = partial;

  CompactnessVerdict compact = compactness_verdict(family, count);
  if (compact.kind == CompactnessVerdict::Kind::NotCompact) {
    // The series criterion presumes a compact direct sum with compact
    // coordinates; outside that regime the verdict is withheld.
    out.kind = SchattenDecision::Kind::Unknown;
    out.note = "family is not compact (" + compact.evidence +
               "); the series criterion does not apply";
    return out;
  }

  if (family.is_explicit()) {
    out.kind = SchattenDecision::Kind::Member;
    out.series = {partial, partial};
    out.norm = {std::pow(partial, 1.0 / p), std::pow(partial, 1.0 / p)};
    return out;
  }

  const auto& tail = family.tail();
  const bool covered = tail && count + 1 >= tail->start_index;
  const bool exclusions_in_prefix =
      exclusions.empty() || *exclusions.rbegin() <= count;

  if (covered && exclusions_in_prefix) {
    // Convergent tail: per-singular-value envelopes first, then the
    // dimension-scaled norm envelope.
    std::optional<double> tail_upper;
    if (!tail->singular.empty()) {
      double total = 0.0;
      bool ok = true;
      for (const Envelope& env : tail->singular) {
        Envelope::TailSum ts = env.tail_sum(p, count + 1);
        if (ts.kind != Envelope::SumKind::Converges) {
          ok = false;
          break;
        }
        total += ts.upper;
      }
      if (ok) tail_upper = total;
    } else if (tail->upper && tail->dim_bound) {
      Envelope::TailSum ts = tail->upper->tail_sum(p, count + 1);
      if (ts.kind == Envelope::SumKind::Converges)
        tail_upper = static_cast<double>(*tail->dim_bound) * ts.upper;
    }
    if (tail_upper) {
      out.kind = SchattenDecision::Kind::Member;
      out.series = {partial, partial + *tail_upper};
      out.norm = {std::pow(out.series.lo, 1.0 / p), std::pow(out.series.hi, 1.0 / p)};
      out.note = "tail bounded by integral test on declared envelopes";
      return out;
    }
  }

  if (tail && tail->lower) {
    // s_1(A_n) >= l(n), so divergence of sum l(n)^p certifies NotMember;
    // finitely many exclusions cannot restore convergence.
    Envelope::TailSum ts = tail->lower->tail_sum(p, tail->start_index);
    if (ts.kind == Envelope::SumKind::Diverges) {
      out.kind = SchattenDecision::Kind::NotMember;
      out.witness_indices = sample_indices;
      out.witness_partials = sample_partials;
      out.note = "series diverges: integral test on lower envelope " + tail->lower->text();
      return out;
    }
  }

  out.kind = SchattenDecision::Kind::Unknown;
  out.note = tail ? "envelopes do not decide the series"
                  : "missing certificate: no tail envelopes declared";
  return out;
}

}  // namespace blockspec
