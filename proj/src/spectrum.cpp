#include "blockspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"

namespace blockspec {

namespace {

struct BlockSpectrum {
  std::int64_t index;
  std::vector<std::complex<double>> values;
  double tolerance;  // eigenvalue-identity tolerance for this block
};

std::vector<BlockSpectrum> inspect_spectra(const BlockFamily& family, std::int64_t count,
                                           double tol_scale) {
  std::vector<BlockSpectrum> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t n = 1; n <= count; ++n) {
    BlockMatrix blk = family.block(n);
    try {
      EigenSet eig = eigenvalues(blk);
      double tol = tol_scale * std::max(1.0, operator_norm(blk));
      out.push_back({n, std::move(eig.values), tol});
    } catch (const KernelError& e) {
      throw KernelError("block " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::int64_t inspected_count(const BlockFamily& family, std::int64_t n) {
  if (n < 1) throw DomainError("truncation level must be >= 1");
  return family.is_explicit() ? std::min(n, family.explicit_size()) : n;
}

// first block whose point spectrum contains tau at that block's tolerance
const BlockSpectrum* find_point_witness(const std::vector<BlockSpectrum>& spectra,
                                        std::complex<double> tau,
                                        std::complex<double>* eigenvalue_out) {
  for (const BlockSpectrum& bs : spectra) {
    for (const auto& v : bs.values) {
      if (std::abs(tau - v) <= bs.tolerance) {
        if (eigenvalue_out) *eigenvalue_out = v;
        return &bs;
      }
    }
  }
  return nullptr;
}

}  // namespace

SpectrumReport point_spectrum(const BlockFamily& family, std::int64_t n, double tol_scale) {
  const std::int64_t count = inspected_count(family, n);
  SpectrumReport report;
  report.truncation_level = count;
  report.exact = family.is_explicit() && n >= family.explicit_size();

  for (const BlockSpectrum& bs : inspect_spectra(family, count, tol_scale)) {
    for (const auto& v : bs.values) {
      SpectrumReport::Entry* nearest = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (auto& entry : report.eigenvalues) {
        double d = std::abs(v - entry.value);
        if (d <= std::max(entry.tolerance, bs.tolerance) && d < best) {
          best = d;
          nearest = &entry;
        }
      }
      if (nearest) {
        if (nearest->blocks.back() != bs.index) nearest->blocks.push_back(bs.index);
        nearest->tolerance = std::max(nearest->tolerance, bs.tolerance);
      } else {
        report.eigenvalues.push_back({v, {bs.index}, bs.tolerance});
      }
    }
  }
  return report;
}

ResolventSup resolvent_sup(const BlockFamily& family, std::complex<double> tau, std::int64_t n,
                           double tol_scale) {
  const std::int64_t count = inspected_count(family, n);
  // Explicit families are finite: evaluate the sup exactly over all blocks.
  const std::int64_t scan = family.is_explicit() ? family.explicit_size() : count;

  auto spectra = inspect_spectra(family, scan, tol_scale);
  std::complex<double> hit;
  if (const BlockSpectrum* w = find_point_witness(spectra, tau, &hit)) {
    throw PointSpectrumError("tau is an eigenvalue of block " + std::to_string(w->index),
                             w->index, hit);
  }

  ResolventSup out;
  out.inspected = scan;
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(scan));
  for (std::int64_t k = 1; k <= scan; ++k) {
    ResolventNorm r = resolvent_norm(family.block(k), tau);
    if (r.is_singular) {
      // Not within eigenvalue tolerance, but the shifted block is numerically
      // rank-deficient; refuse to report a finite value.
      throw PointSpectrumError(
          "A - tau I is numerically singular at block " + std::to_string(k), k, tau);
    }
    norms.push_back(r.value);
  }
  out.prefix_max = *std::max_element(norms.begin(), norms.end());

  if (family.is_explicit()) {
    out.kind = ResolventSup::Kind::Finite;
    out.bound = {out.prefix_max, out.prefix_max};
    return out;
  }

  const auto& tail = family.tail();
  const bool covered = tail && count + 1 >= tail->start_index;

  // Neumann-series bound on the tail: ||R_tau(A_k)|| <= 1/(|tau| - b(k)).
  if (covered && tail->upper) {
    double tail_norm_sup = tail->upper->tail_sup(count + 1);
    if (std::abs(tau) > tail_norm_sup) {
      double tail_bound = 1.0 / (std::abs(tau) - tail_norm_sup);
      out.kind = ResolventSup::Kind::Finite;
      out.bound = {out.prefix_max, std::max(out.prefix_max, tail_bound)};
      out.note = "tail bounded by Neumann series on the norm envelope";
      return out;
    }
  }

  if (covered && tail->spectral_clearance) {
    if (auto clearance = tail->spectral_clearance(tau)) {
      bool all_normal = true;
      for (std::int64_t k = 1; k <= scan && all_normal; ++k)
        all_normal = family.block(k).flags().normal;
      Envelope::Limit lim = clearance->limit();
      if (all_normal && lim.is_zero()) {
        // Eigenvalues accumulate at tau along the family: resolvents of
        // normal blocks grow without bound.
        out.kind = ResolventSup::Kind::Divergent;
        std::int64_t first = std::max<std::int64_t>(1, scan - 7);
        for (std::int64_t k = first; k <= scan; ++k) {
          out.witness_indices.push_back(k);
          out.witness_norms.push_back(norms[static_cast<std::size_t>(k - 1)]);
        }
        out.note = "spectral clearance decays to zero on normal blocks";
        return out;
      }
      if (all_normal && lim.is_finite()) {
        if (auto inf = clearance->tail_inf_monotone(count + 1); inf && *inf > 0.0) {
          double tail_bound = 1.0 / *inf;
          out.kind = ResolventSup::Kind::Finite;
          out.bound = {out.prefix_max, std::max(out.prefix_max, tail_bound)};
          out.note = "tail bounded by spectral clearance on normal blocks";
          return out;
        }
      }
    }
  }

  out.kind = ResolventSup::Kind::Unknown;
  out.note = tail ? "certificate does not decide this point"
                  : "missing certificate: infinite family without tail envelopes";
  return out;
}

PointClass classify_point(const BlockFamily& family, std::complex<double> tau, std::int64_t n,
                          double tol_scale) {
  const std::int64_t count = inspected_count(family, n);
  const std::int64_t scan = family.is_explicit() ? family.explicit_size() : count;
  auto spectra = inspect_spectra(family, scan, tol_scale);

  PointClass out;
  std::complex<double> hit;
  if (const BlockSpectrum* w = find_point_witness(spectra, tau, &hit)) {
    out.kind = PointClass::Kind::Point;
    out.witness_index = w->index;
    out.witness_eigenvalue = hit;
    return out;
  }

  ResolventSup sup;
  try {
    sup = resolvent_sup(family, tau, n, tol_scale);
  } catch (const PointSpectrumError& e) {
    out.kind = PointClass::Kind::Unknown;
    out.note = std::string("numerically singular resolvent at block ") +
               std::to_string(e.block_index) + "; tau is unresolvable at working precision";
    return out;
  }

  out.prefix_max = sup.prefix_max;
  switch (sup.kind) {
    case ResolventSup::Kind::Finite:
      out.kind = PointClass::Kind::Resolvent;
      out.sup_bound = sup.bound;
      break;
    case ResolventSup::Kind::Divergent:
      out.kind = PointClass::Kind::Continuous;
      out.witness_indices = sup.witness_indices;
      out.witness_norms = sup.witness_norms;
      break;
    case ResolventSup::Kind::Unknown:
      out.kind = PointClass::Kind::Unknown;
      out.note = sup.note;
      break;
  }
  return out;
}

std::vector<std::int64_t> minimal_support(const BlockFamily& family, std::int64_t n,
                                          double tol_scale) {
  const std::int64_t count = inspected_count(family, n);
  auto spectra = inspect_spectra(family, count, tol_scale);

  // Coverage test: every eigenvalue of every inspected block must be within
  // tolerance of some eigenvalue contributed by the retained set.
  auto covers = [&](const std::vector<std::size_t>& retained) {
    for (const BlockSpectrum& bs : spectra) {
      for (const auto& v : bs.values) {
        bool found = false;
        for (std::size_t r : retained) {
          const BlockSpectrum& other = spectra[r];
          for (const auto& w : other.values) {
            if (std::abs(v - w) <= std::max(bs.tolerance, other.tolerance)) {
              found = true;
              break;
            }
          }
          if (found) break;
        }
        if (!found) return false;
      }
    }
    return true;
  };

  // Forward greedy pass: keep a block iff it contributes a new eigenvalue.
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const BlockSpectrum& bs = spectra[i];
    bool contributes = false;
    for (const auto& v : bs.values) {
      bool seen = false;
      for (std::size_t r : retained) {
        for (const auto& w : spectra[r].values) {
          if (std::abs(v - w) <= std::max(bs.tolerance, spectra[r].tolerance)) {
            seen = true;
            break;
          }
        }
        if (seen) break;
      }
      if (!seen) {
        contributes = true;
        break;
      }
    }
    if (contributes) retained.push_back(i);
  }

  // Reverse-delete pass: the greedy set can retain an early block whose
  // contribution a later block also covers; drop such blocks so the result
  // is genuinely inclusion-minimal.
  for (std::size_t i = 0; i < retained.size();) {
    std::vector<std::size_t> without = retained;
    without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
    if (covers(without)) {
      retained = std::move(without);
    } else {
      ++i;
    }
  }

  std::vector<std::int64_t> indices;
  indices.reserve(retained.size());
  for (std::size_t r : retained) indices.push_back(spectra[r].index);
  return indices;
}

}  // namespace blockspec
