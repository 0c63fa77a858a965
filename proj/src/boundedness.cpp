#include "blockspec/boundedness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"

namespace blockspec {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSpectralTolScale = 1e-8;     // regime split around |lambda| = 1
constexpr double kPowerDipThreshold = 0.99;    // ||A^m|| below this certifies the tail
constexpr std::int64_t kPowerScanCap = 4096;
constexpr double kProbeThreshold = 1e6;        // norm level treated as divergence evidence
constexpr int kGeometricRunLength = 5;         // consecutive contraction ratios
constexpr double kGeometricRatio = 0.9;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::complex<double> gaussian(std::uint64_t& state) {
  double u = std::max(uniform01(state), 1e-300);
  double v = uniform01(state);
  double r = std::sqrt(-2.0 * std::log(u));
  return {r * std::cos(2.0 * std::numbers::pi * v), r * std::sin(2.0 * std::numbers::pi * v)};
}

double spectral_radius(const std::vector<std::complex<double>>& eigs,
                       std::complex<double>* argmax = nullptr) {
  double rho = 0.0;
  for (const auto& v : eigs) {
    if (std::abs(v) > rho) {
      rho = std::abs(v);
      if (argmax) *argmax = v;
    }
  }
  return rho;
}

// Certified upper bound of max_{|z|=r} ||R_z(A)|| by adaptive arc refinement:
// within an arc of half-width s around a sample z, ||R_w|| <= ||R_z||/(1-s||R_z||).
// Refinement can only raise the bound, so the search aborts once the sampled
// values already exceed give_up_above (the caller's best bound so far).
std::optional<double> certified_circle_resolvent_max(
    const BlockMatrix& a, double r,
    double give_up_above = std::numeric_limits<double>::infinity()) {
  struct Arc {
    double center;
    double half_width;
  };
  std::deque<Arc> work;
  const int initial = 64;
  for (int k = 0; k < initial; ++k)
    work.push_back({(2.0 * std::numbers::pi) * (k + 0.5) / initial,
                    std::numbers::pi / initial});
  double best = 0.0;
  int budget = 1 << 17;
  while (!work.empty()) {
    if (--budget < 0) return std::nullopt;
    Arc arc = work.front();
    work.pop_front();
    std::complex<double> z = std::polar(r, arc.center);
    ResolventNorm res = resolvent_norm(a, z);
    if (res.is_singular) return std::nullopt;
    if (res.value >= give_up_above) return std::nullopt;
    double chord = r * arc.half_width;  // arc length bound on |w - z|
    if (chord * res.value < 0.5) {
      best = std::max(best, res.value / (1.0 - chord * res.value));
    } else {
      work.push_back({arc.center - arc.half_width / 2.0, arc.half_width / 2.0});
      work.push_back({arc.center + arc.half_width / 2.0, arc.half_width / 2.0});
    }
  }
  return best;
}

// Sampled Kreiss constant sup_{|z|>1} (|z|-1)||R_z(A)|| on the documented
// grid: 32 log-spaced radii in (1,2] by 64 angles. A sound lower bound of
// the true constant; the Kreiss matrix theorem supplies the e*dim factor.
double sampled_kreiss_constant(const BlockMatrix& a) {
  double best = 0.0;
  for (int j = 1; j <= 32; ++j) {
    double r = std::pow(2.0, j / 32.0);
    for (int k = 0; k < 64; ++k) {
      std::complex<double> z = std::polar(r, 2.0 * std::numbers::pi * k / 64.0);
      ResolventNorm res = resolvent_norm(a, z);
      if (!res.is_singular) best = std::max(best, (r - 1.0) * res.value);
    }
  }
  return best;
}

struct UnimodularDefect {
  bool found = false;
  std::complex<double> eigenvalue;
};

// Rank test on A - lambda I for repeated eigenvalue clusters near the unit
// circle. Clustering at sqrt(dim*eps)*scale absorbs the square-root
// splitting that perturbed Jordan blocks exhibit.
UnimodularDefect defective_unimodular(const BlockMatrix& a,
                                      const std::vector<std::complex<double>>& eigs,
                                      double scale) {
  const int dim = a.dim();
  const double cluster_tol =
      std::sqrt(static_cast<double>(dim) * kEps) * std::max(1.0, scale) * 4.0;
  const double unit_tol = kSpectralTolScale * std::max(1.0, scale);

  std::vector<bool> used(eigs.size(), false);
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> cluster{i};
    for (std::size_t j = i + 1; j < eigs.size(); ++j) {
      if (!used[j] && std::abs(eigs[j] - eigs[i]) <= cluster_tol) {
        cluster.push_back(j);
        used[j] = true;
      }
    }
    if (cluster.size() < 2) continue;
    std::complex<double> mean{0.0, 0.0};
    for (std::size_t j : cluster) mean += eigs[j];
    mean /= static_cast<double>(cluster.size());
    if (std::abs(std::abs(mean) - 1.0) > unit_tol) continue;

    ComplexMatrix shifted = a.entries();
    shifted.diagonal().array() -= mean;
    std::vector<double> sv = detail::singular_values(shifted);
    double tol = detail::rank_tolerance(shifted, sv);
    int rank = 0;
    for (double s : sv)
      if (s > tol) ++rank;
    int geometric = dim - rank;
    if (geometric < static_cast<int>(cluster.size())) return {true, mean};
  }
  return {false, {}};
}

std::string format_monomial(int degree) {
  if (degree == 0) return "1";
  if (degree == 1) return "z";
  return "z^" + std::to_string(degree);
}

}  // namespace

PowerBoundEntry power_bound_block(const BlockMatrix& a, std::int64_t m_max) {
  if (m_max < 1) throw DomainError("m_max must be >= 1");
  PowerBoundEntry out;
  const int dim = a.dim();
  const double norm = operator_norm(a);
  const double tol = kSpectralTolScale * std::max(1.0, norm);

  // Exact structural scan: nilpotency and power cycles give M_w exactly.
  std::vector<ComplexMatrix> powers;  // powers[m-1] = A^m
  powers.push_back(a.entries());
  std::vector<double> norms{norm};
  const std::int64_t structural_cap = std::min<std::int64_t>(64, std::max<std::int64_t>(dim + 1, 8));
  for (std::int64_t m = 1; m <= structural_cap; ++m) {
    const ComplexMatrix& current = powers.back();
    // Once the powers have collapsed far below scale, neither an exact cycle
    // nor a larger norm can appear; the dip path finishes the analysis.
    if (m > 1 && norms.back() <= 1e-9 * std::max(1.0, norm) && !current.isZero(0.0)) break;
    if (current.isZero(0.0)) {
      // nilpotent of order m: sup_m ||A^m|| realized on the computed prefix
      double mw = 1.0;
      for (std::size_t i = 0; i + 1 < norms.size(); ++i) mw = std::max(mw, norms[i]);
      out.kind = PowerBoundEntry::Kind::Bounded;
      out.mw = {mw, mw};
      out.method = "nilpotent-exact";
      out.witness_norms = norms;
      return out;
    }
    for (std::size_t j = 0; j + 1 < powers.size(); ++j) {
      if (powers[j] == current) {
        // A^{j+1} == A^m exactly: the norm sequence is eventually periodic
        double mw = 1.0;
        for (double v : norms) mw = std::max(mw, v);
        out.kind = PowerBoundEntry::Kind::Bounded;
        out.mw = {mw, mw};
        out.method = "cycle-exact";
        return out;
      }
    }
    if (m == structural_cap) break;
    ComplexMatrix next = current * a.entries();
    if (!next.allFinite()) break;
    powers.push_back(std::move(next));
    norms.push_back(detail::operator_norm(powers.back()));
  }

  std::complex<double> top;
  EigenSet eig = eigenvalues(a);
  const double rho = spectral_radius(eig.values, &top);

  if (rho > 1.0 + tol) {
    out.kind = PowerBoundEntry::Kind::Unbounded;
    out.witness_eigenvalue = top;
    out.witness_norms = norms;
    return out;
  }

  if (rho < 1.0 - tol) {
    // Powers eventually contract; once some ||A^m|| < 1 the supremum is
    // exactly the prefix maximum. The geometric-ratio run is reported as
    // supporting evidence of the decay.
    double prefix_max = 1.0;
    double value = norms.back();
    std::int64_t m = static_cast<std::int64_t>(norms.size());
    ComplexMatrix power = powers.back();
    for (double v : norms) prefix_max = std::max(prefix_max, v);
    int run = 0;
    double prev = norms.empty() ? 1.0 : norms.front();
    for (std::size_t i = 1; i < norms.size(); ++i) {
      run = norms[i] <= kGeometricRatio * norms[i - 1] ? run + 1 : 0;
      prev = norms[i];
    }
    const std::int64_t cap = std::max(m_max, kPowerScanCap);
    while (value >= kPowerDipThreshold && m < cap) {
      power = power * a.entries();
      ++m;
      if (!power.allFinite()) break;
      value = detail::operator_norm(power);
      run = value <= kGeometricRatio * prev ? run + 1 : 0;
      prev = value;
      prefix_max = std::max(prefix_max, value);
    }
    if (value < kPowerDipThreshold) {
      out.kind = PowerBoundEntry::Kind::Bounded;
      out.mw = {prefix_max, prefix_max};
      out.method = run >= kGeometricRunLength ? "power-dip(geometric-run)" : "power-dip";
      return out;
    }
    // No dip within the cap (large transient): Cauchy integral bound
    // ||A^m|| <= r^{m+1} max_{|z|=r} ||R_z||, supremum over m >= 1 at r^2.
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 6; k >= 1; --k) {
      double r = rho + (1.0 - rho) * k / 6.0;
      if (auto circle = certified_circle_resolvent_max(a, r, hi / (r * r)))
        hi = std::min(hi, r * r * *circle);
    }
    if (!std::isfinite(hi))
      throw KernelError("unable to certify a power bound despite spectral radius < 1");
    out.kind = PowerBoundEntry::Kind::Bounded;
    out.mw = {prefix_max, std::max(prefix_max, hi)};
    out.method = "cauchy";
    return out;
  }

  // Unimodular regime.
  UnimodularDefect defect = defective_unimodular(a, eig.values, norm);
  if (defect.found) {
    out.kind = PowerBoundEntry::Kind::Unbounded;
    out.witness_eigenvalue = defect.eigenvalue;
    out.defective_unimodular = true;
    out.heuristic = true;
    out.witness_norms = norms;
    return out;
  }
  const double kreiss = sampled_kreiss_constant(a);
  double lo = std::max(1.0, kreiss);
  double hi = std::max(lo, std::numbers::e * dim * kreiss);
  out.kind = PowerBoundEntry::Kind::Bounded;
  out.mw = {lo, hi};
  out.method = "kreiss";
  return out;
}

namespace {

struct ProbeResult {
  bool diverging = false;
  std::vector<std::int64_t> indices;
  std::vector<double> norms;
};

// Divergence witnessed from finitely many blocks: sample the generator at
// geometrically growing indices and require strict growth past a fixed
// threshold.
ProbeResult probe_norm_growth(const BlockFamily& family, std::int64_t from) {
  ProbeResult out;
  std::int64_t idx = std::max<std::int64_t>(from, 1);
  double prev = -1.0;
  int increasing = 0;
  for (int j = 0; j < 22; ++j) {
    idx *= 2;
    if (idx > (std::int64_t{1} << 40)) break;
    double nrm;
    try {
      nrm = operator_norm(family.block(idx));
    } catch (...) {
      break;
    }
    out.indices.push_back(idx);
    out.norms.push_back(nrm);
    increasing = nrm > prev ? increasing + 1 : 0;
    prev = nrm;
    if (nrm > kProbeThreshold && increasing >= 4) {
      out.diverging = true;
      return out;
    }
  }
  return out;
}

}  // namespace

PowerBoundReport power_bound_family(const BlockFamily& family, std::int64_t n,
                                    std::int64_t m_max) {
  if (n < 1) throw DomainError("truncation level must be >= 1");
  PowerBoundReport out;
  const std::int64_t count = family.is_explicit() ? family.explicit_size() : n;

  bool all_bounded = true;
  double lo = 1.0, hi = 1.0;
  for (std::int64_t idx = 1; idx <= count; ++idx) {
    PowerBoundEntry entry = power_bound_block(family.block(idx), m_max);
    if (entry.kind == PowerBoundEntry::Kind::Unbounded) {
      all_bounded = false;
      out.witness_indices.push_back(idx);
    } else {
      lo = std::max(lo, entry.mw.lo);
      hi = std::max(hi, entry.mw.hi);
    }
    out.per_block.emplace(idx, std::move(entry));
  }

  if (!all_bounded) {
    out.family = PowerBoundReport::Kind::Unbounded;
    out.note = "some block is not power bounded";
    return out;
  }
  if (family.is_explicit()) {
    out.family = PowerBoundReport::Kind::Bounded;
    out.family_mw = {lo, hi};
    return out;
  }

  const auto& tail = family.tail();
  if (tail && tail->lower && tail->lower->limit().kind == Envelope::LimitKind::Infinity) {
    out.family = PowerBoundReport::Kind::Unbounded;
    out.note = "per-block power bounds diverge: M_w(A_n) >= ||A_n|| >= " + tail->lower->text();
    for (std::int64_t idx = 1; idx <= count; ++idx) {
      out.witness_indices.push_back(idx);
      out.witness_bounds.push_back(operator_norm(family.block(idx)));
    }
    return out;
  }
  if (tail && tail->upper && count + 1 >= tail->start_index &&
      tail->upper->tail_sup(count + 1) <= 1.0) {
    // Tail blocks are contractions: ||A_n^m|| <= b(n)^m <= 1.
    out.family = PowerBoundReport::Kind::Bounded;
    out.family_mw = {std::max(lo, 1.0), std::max(hi, 1.0)};
    out.note = "tail norms bounded by 1; prefix interval covers the supremum";
    return out;
  }
  ProbeResult probe = probe_norm_growth(family, count);
  if (probe.diverging) {
    out.family = PowerBoundReport::Kind::Unbounded;
    out.witness_indices = probe.indices;
    out.witness_bounds = probe.norms;
    out.note = "block norm lower bounds grow without apparent bound "
               "(witnessed at geometrically spaced indices)";
    return out;
  }
  out.family = PowerBoundReport::Kind::Unknown;
  out.family_mw = {lo, hi};
  out.note = "prefix bounded but the tail is not certified";
  return out;
}

Interval poly_sup_norm(const Polynomial& p, int grid) {
  const int declared = p.degree();
  if (declared < 0) return {0.0, 0.0};
  if (grid < 4 * (declared + 1))
    throw DomainError("grid must be at least 4*(degree+1) = " +
                      std::to_string(4 * (declared + 1)));

  int effective = -1;
  int nonzero = 0;
  double abs_sum = 0.0;
  for (int k = 0; k <= declared; ++k) {
    double m = std::abs(p.coefficients[static_cast<std::size_t>(k)]);
    if (m > 0.0) {
      effective = k;
      ++nonzero;
      abs_sum += m;
    }
  }
  if (nonzero == 0) return {0.0, 0.0};
  // |a_j z^j + a_k z^k| attains |a_j| + |a_k| on the circle: exact for
  // polynomials with at most two terms (monomials included).
  if (nonzero <= 2) return {abs_sum, abs_sum};

  double sampled = 0.0;
  for (int k = 0; k < grid; ++k) {
    double theta = 2.0 * std::numbers::pi * k / grid;
    sampled = std::max(sampled, std::abs(p.eval(std::polar(1.0, theta))));
  }
  // Bernstein: |d/dtheta p(e^{i theta})| <= q * max|p|, so the true maximum
  // is at most sampled / (1 - pi q / grid).
  double slack = 1.0 - std::numbers::pi * effective / grid;
  return {sampled, sampled / slack};
}

PolyBoundEntry poly_bound_block(const BlockMatrix& a, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  PolyBoundEntry out;
  out.seed = seed;
  const int dim = a.dim();
  const double norm = operator_norm(a);
  const double tol = kSpectralTolScale * std::max(1.0, norm);

  EigenSet eig = eigenvalues(a);
  const double rho = spectral_radius(eig.values);

  // Power-unbounded blocks are polynomially unbounded: monomials witness it.
  PowerBoundEntry power = power_bound_block(a, 16);
  if (power.kind == PowerBoundEntry::Kind::Unbounded) {
    out.kind = PolyBoundEntry::Kind::Unbounded;
    out.heuristic = power.heuristic;
    int best_m = 1;
    double best = 0.0;
    PowerNorms pn = power_norms(a, 24);
    for (std::size_t i = 0; i < pn.norms.size(); ++i) {
      if (pn.norms[i] > best) {
        best = pn.norms[i];
        best_m = static_cast<int>(i + 1);
      }
    }
    out.witness_monomial = best_m;
    out.witness = format_monomial(best_m);
    out.lo = std::max(1.0, best);
    return out;
  }

  // Upper bound: take the best applicable closed-form route.
  std::optional<double> hi;
  std::string method;
  if (a.flags().nilpotency_order && *a.flags().nilpotency_order <= 2) {
    hi = 1.0 + norm;  // p(A) = a_0 I + a_1 A and |a_k| <= ||p||_inf
    method = "nilpotent2";
  }
  if (norm <= 1.0 && (!hi || 1.0 < *hi)) {
    hi = 1.0;  // von Neumann inequality for Hilbert-space contractions
    method = "von-neumann";
  }
  // The Cauchy route can never improve on a von Neumann hi of 1 (applying
  // the bound to p = 1 shows r * max||R_z|| >= 1), so only pay for the
  // circle certification when it could tighten the result.
  if (rho < 1.0 - tol && (!hi || *hi > 1.0)) {
    double cauchy = hi ? *hi : std::numeric_limits<double>::infinity();
    bool improved = false;
    for (int k = 6; k >= 1; --k) {  // outer radii are cheap and usually best
      double r = rho + (1.0 - rho) * k / 6.0;
      if (auto circle = certified_circle_resolvent_max(a, r, cauchy / r)) {
        if (r * *circle < cauchy) {
          cauchy = r * *circle;
          improved = true;
        }
      }
    }
    if (improved) {
      hi = cauchy;
      method = "cauchy";
    }
  }

  // Lower bound: monomials (exact sup norm 1) and seeded random draws.
  double lo = 1.0;
  std::string witness = "1";
  {
    ComplexMatrix power = a.entries();
    for (int m = 1; m <= 4 * dim; ++m) {
      if (power.isZero(0.0)) break;  // nilpotent: no further monomial can win
      double v = detail::operator_norm(power);
      if (v > lo) {
        lo = v;
        witness = format_monomial(m);
      }
      if (v <= 1e-12 * std::max(1.0, norm)) break;  // collapsed far below scale
      if (m < 4 * dim) power = power * a.entries();
    }
  }
  std::uint64_t state = seed;
  for (int draw = 0; draw < samples; ++draw) {
    int degree = 1 + static_cast<int>(splitmix64(state) % 16);
    Polynomial p;
    p.coefficients.resize(static_cast<std::size_t>(degree) + 1);
    for (auto& c : p.coefficients) c = gaussian(state);
    Interval sup = poly_sup_norm(p, std::max(256, 8 * (degree + 1)));
    if (sup.hi <= 0.0) continue;
    auto value = apply_polynomial(a, p);
    if (!value) continue;
    double ratio = operator_norm(*value) / sup.hi;
    if (ratio > lo) {
      lo = ratio;
      witness = "random(seed=" + std::to_string(seed) + ",draw=" + std::to_string(draw) +
                ",degree=" + std::to_string(degree) + ")";
    }
  }

  out.kind = PolyBoundEntry::Kind::Bounded;
  out.lo = lo;
  if (hi && *hi < lo) *hi = lo;  // certified bounds can only collide by rounding
  out.hi = hi;
  out.method = method;
  out.witness = witness;
  return out;
}

PolyBoundReport poly_bound_family(const BlockFamily& family, std::int64_t n, int samples,
                                  std::uint64_t seed) {
  if (n < 1) throw DomainError("truncation level must be >= 1");
  PolyBoundReport out;
  const std::int64_t count = family.is_explicit() ? family.explicit_size() : n;

  bool all_bounded = true;
  bool all_hi = true;
  double lo = 1.0, hi = 1.0;
  for (std::int64_t idx = 1; idx <= count; ++idx) {
    std::uint64_t block_seed = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(idx));
    PolyBoundEntry entry = poly_bound_block(family.block(idx), samples, block_seed);
    if (entry.kind == PolyBoundEntry::Kind::Unbounded) {
      all_bounded = false;
      out.witness_indices.push_back(idx);
      if (out.witness_polynomial.empty() && entry.witness_monomial)
        out.witness_polynomial = format_monomial(*entry.witness_monomial);
    } else {
      lo = std::max(lo, entry.lo);
      if (entry.hi)
        hi = std::max(hi, *entry.hi);
      else
        all_hi = false;
    }
    out.per_block.emplace(idx, std::move(entry));
  }

  if (!all_bounded) {
    out.family = PolyBoundReport::Kind::Unbounded;
    out.note = "some block is not polynomially bounded";
    return out;
  }
  if (family.is_explicit()) {
    out.family = PolyBoundReport::Kind::Bounded;
    out.family_lo = lo;
    if (all_hi) out.family_hi = hi;
    return out;
  }

  const auto& tail = family.tail();
  if (tail && tail->lower && tail->lower->limit().kind == Envelope::LimitKind::Infinity) {
    // ||p_*(A)|| = sup_n ||A_n|| with p_*(z) = z, and the norms diverge.
    out.family = PolyBoundReport::Kind::Unbounded;
    out.witness_polynomial = "z";
    out.note = "monomial witness: sup_n ||A_n|| diverges by the lower envelope " +
               tail->lower->text();
    for (std::int64_t idx = 1; idx <= count; ++idx) out.witness_indices.push_back(idx);
    return out;
  }
  if (all_hi && tail && tail->upper && count + 1 >= tail->start_index &&
      tail->upper->tail_sup(count + 1) <= 1.0) {
    out.family = PolyBoundReport::Kind::Bounded;
    out.family_lo = lo;
    out.family_hi = std::max(hi, 1.0);  // von Neumann on the contraction tail
    out.note = "tail blocks are contractions; von Neumann bounds their M_p by 1";
    return out;
  }
  ProbeResult probe = probe_norm_growth(family, count);
  if (probe.diverging) {
    out.family = PolyBoundReport::Kind::Unbounded;
    out.witness_polynomial = "z";
    out.witness_indices = probe.indices;
    out.note = "block norm lower bounds grow without apparent bound "
               "(witnessed at geometrically spaced indices)";
    return out;
  }
  out.family = PolyBoundReport::Kind::Unknown;
  out.family_lo = lo;
  if (all_hi) out.family_hi = hi;
  out.note = "prefix bounded but the tail is not certified";
  return out;
}

}  // namespace blockspec
