#include "blockspec/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numbers>
#include <set>

#include "blockspec/errors.hpp"
#include "blockspec/kernel.hpp"
#include "blockspec/schatten.hpp"
#include "blockspec/spectrum.hpp"

namespace blockspec {

namespace {

constexpr double kUnionTolScale = 1e-8;
constexpr double kResolventRelTol = 1e-6;
constexpr double kInterchangeRelTol = 1e-10;

using Complex = std::complex<double>;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

BlockMatrix nilpotent2_block(Complex alpha) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = alpha;
  BlockFlags flags;
  flags.nilpotency_order = alpha == Complex{0.0, 0.0} ? 1 : 2;
  flags.normal = alpha == Complex{0.0, 0.0};
  return BlockMatrix::make(std::move(m), flags);
}

BlockMatrix scalar_block(double value, bool normal = true) {
  ComplexMatrix m(1, 1);
  m(0, 0) = value;
  BlockFlags flags;
  flags.normal = normal;
  return BlockMatrix::make(std::move(m), flags);
}

// Midpoint-grid discretization of f |-> alpha int_{-x}^{x} f(t) dt on
// L^2(-1,1). The grid midpoints are x_i = t_i / nq with odd integers
// t_i = 2i+1-nq; comparing |t_j| < |t_i| in integer arithmetic keeps the
// stencil exactly mirror-symmetric, which is what makes M^2 cancel.
ComplexMatrix volterra_matrix(int nq, Complex alpha) {
  const double h = 2.0 / nq;
  ComplexMatrix m = ComplexMatrix::Zero(nq, nq);
  for (int i = 0; i < nq; ++i) {
    const std::int64_t ti = 2LL * i + 1 - nq;
    const Complex entry = (ti > 0 ? alpha : -alpha) * h;
    for (int j = 0; j < nq; ++j) {
      const std::int64_t tj = 2LL * j + 1 - nq;
      if (std::llabs(tj) < std::llabs(ti)) m(i, j) = entry;
    }
  }
  return m;
}

BlockMatrix volterra_block(int nq, Complex alpha) {
  ComplexMatrix m = volterra_matrix(nq, alpha);
  BlockFlags flags;
  // The square cancels exactly in exact arithmetic; in floating point the
  // residue is only zero for some sizes, so the flag is set after checking.
  if (nq <= 200) {
    ComplexMatrix sq = m * m;
    if (sq.isZero(0.0) && !m.isZero(0.0)) flags.nilpotency_order = 2;
  }
  return BlockMatrix::make(std::move(m), flags);
}

struct AlphaSequence {
  std::optional<std::vector<Complex>> list;
  std::optional<Envelope> expr;

  Complex at(std::int64_t n) const {
    if (list) return (*list)[static_cast<std::size_t>(n - 1)];
    return {expr->eval(static_cast<double>(n)), 0.0};
  }
};

AlphaSequence parse_alpha(const FixtureSpec& spec, bool required) {
  AlphaSequence alpha;
  if (spec.alpha_list && spec.alpha_expr)
    throw ConstructionError("fixture takes either an alpha list or an alpha expression");
  if (spec.alpha_list) {
    if (spec.alpha_list->empty()) throw ConstructionError("alpha list must be nonempty");
    alpha.list = spec.alpha_list;
  } else if (spec.alpha_expr) {
    alpha.expr = Envelope::parse(*spec.alpha_expr);
  } else if (required) {
    throw ConstructionError("fixture '" + FixtureSpec::name_string(spec.name) +
                            "' needs an alpha sequence");
  }
  return alpha;
}

// Distance from tau to the closure of {values(n)} for a real scalar sequence
// converging to `limit`: candidate indices near the minimizer plus the
// accumulation point. Returns the distance and whether a finite index
// attains it (then tau is an eigenvalue, not a clearance case).
struct ScalarClearance {
  double distance;
  bool attained;
};

template <typename ValueFn, typename InverseFn>
ScalarClearance scalar_sequence_clearance(Complex tau, double limit, ValueFn value,
                                          InverseFn inverse) {
  double best_attained = std::numeric_limits<double>::infinity();
  std::set<std::int64_t> candidates{1, 2, 3, 4, 5, 6, 7, 8};
  double guess = inverse(tau.real());
  if (std::isfinite(guess)) {
    std::int64_t g = static_cast<std::int64_t>(std::floor(guess));
    for (std::int64_t d = -2; d <= 2; ++d) {
      std::int64_t n = g + d;
      if (n >= 1 && n <= (std::int64_t{1} << 60)) candidates.insert(n);
    }
  }
  for (std::int64_t n : candidates)
    best_attained = std::min(best_attained, std::abs(tau - Complex{value(n), 0.0}));
  double at_limit = std::abs(tau - Complex{limit, 0.0});
  return {std::min(best_attained, at_limit), best_attained <= at_limit};
}

}  // namespace

FixtureSpec::Name FixtureSpec::parse_name(const std::string& text) {
  if (text == "scalar_ones") return Name::ScalarOnes;
  if (text == "nilpotent2") return Name::Nilpotent2;
  if (text == "volterra") return Name::Volterra;
  if (text == "diag_accumulating") return Name::DiagAccumulating;
  if (text == "harmonic_diag") return Name::HarmonicDiag;
  throw ParseError("unknown fixture '" + text +
                   "' (expected scalar_ones, nilpotent2, volterra, diag_accumulating, "
                   "harmonic_diag)");
}

std::string FixtureSpec::name_string(Name name) {
  switch (name) {
    case Name::ScalarOnes: return "scalar_ones";
    case Name::Nilpotent2: return "nilpotent2";
    case Name::Volterra: return "volterra";
    case Name::DiagAccumulating: return "diag_accumulating";
    case Name::HarmonicDiag: return "harmonic_diag";
  }
  return "?";
}

BlockFamily make_fixture(const FixtureSpec& spec,
                         const std::optional<TailCertificate>& tail_override) {
  using Name = FixtureSpec::Name;

  BlockFamily::Generator gen;
  std::optional<TailCertificate> tail;

  switch (spec.name) {
    case Name::ScalarOnes: {
      gen = [](std::int64_t) { return scalar_block(1.0); };
      TailCertificate cert;
      cert.upper = Envelope::parse("1");
      cert.lower = Envelope::parse("1");
      cert.singular = {Envelope::parse("1")};
      cert.dim_bound = 1;
      cert.spectral_clearance = [](Complex tau) -> std::optional<Envelope> {
        double d = std::abs(tau - Complex{1.0, 0.0});
        if (d <= 1e-14) return std::nullopt;
        return Envelope::constant(d * (1.0 - 1e-12));
      };
      tail = std::move(cert);
      break;
    }

    case Name::DiagAccumulating: {
      gen = [](std::int64_t n) { return scalar_block(1.0 - 1.0 / static_cast<double>(n)); };
      TailCertificate cert;
      cert.upper = Envelope::parse("1");
      cert.lower = Envelope::parse("1 - 1/n");
      cert.dim_bound = 1;
      cert.spectral_clearance = [](Complex tau) -> std::optional<Envelope> {
        if (tau == Complex{1.0, 0.0}) return Envelope::parse("1/n");  // exact distances
        auto c = scalar_sequence_clearance(
            tau, 1.0, [](std::int64_t n) { return 1.0 - 1.0 / static_cast<double>(n); },
            [](double re) { return 1.0 / (1.0 - re); });
        if (c.attained && c.distance <= 1e-14) return std::nullopt;
        if (c.distance <= 0.0) return std::nullopt;
        return Envelope::constant(c.distance * (1.0 - 1e-12));
      };
      tail = std::move(cert);
      break;
    }

    case Name::HarmonicDiag: {
      gen = [](std::int64_t n) { return scalar_block(1.0 / static_cast<double>(n)); };
      TailCertificate cert;
      cert.upper = Envelope::parse("1/n");
      cert.lower = Envelope::parse("1/n");
      cert.singular = {Envelope::parse("1/n")};
      cert.dim_bound = 1;
      cert.spectral_clearance = [](Complex tau) -> std::optional<Envelope> {
        if (tau == Complex{0.0, 0.0}) return Envelope::parse("1/n");
        auto c = scalar_sequence_clearance(
            tau, 0.0, [](std::int64_t n) { return 1.0 / static_cast<double>(n); },
            [](double re) { return 1.0 / re; });
        if (c.attained && c.distance <= 1e-14) return std::nullopt;
        if (c.distance <= 0.0) return std::nullopt;
        return Envelope::constant(c.distance * (1.0 - 1e-12));
      };
      tail = std::move(cert);
      break;
    }

    case Name::Nilpotent2: {
      AlphaSequence alpha = parse_alpha(spec, true);
      if (alpha.list) {
        std::vector<BlockMatrix> blocks;
        for (const Complex& a : *alpha.list) blocks.push_back(nilpotent2_block(a));
        return make_explicit(std::move(blocks));
      }
      Envelope expr = *alpha.expr;
      gen = [expr](std::int64_t n) {
        return nilpotent2_block({expr.eval(static_cast<double>(n)), 0.0});
      };
      if (expr.nonnegative_on(1)) {
        TailCertificate cert;
        cert.lower = expr;  // ||A_n|| = |alpha_n|
        if (expr.nonincreasing_on(1)) {
          cert.upper = expr;
          cert.singular = {expr, Envelope::constant(0.0)};
        }
        cert.dim_bound = 2;
        tail = std::move(cert);
      }
      break;
    }

    case Name::Volterra: {
      if (spec.nq < 2 || spec.nq % 2 != 0)
        throw ConstructionError("volterra needs an even grid size nq >= 2");
      AlphaSequence alpha = parse_alpha(spec, true);
      const int nq = spec.nq;
      if (alpha.list) {
        std::vector<BlockMatrix> blocks;
        for (const Complex& a : *alpha.list) blocks.push_back(volterra_block(nq, a));
        return make_explicit(std::move(blocks));
      }
      Envelope expr = *alpha.expr;
      gen = [expr, nq](std::int64_t n) {
        return volterra_block(nq, {expr.eval(static_cast<double>(n)), 0.0});
      };
      if (expr.nonnegative_on(1)) {
        const double base_norm = detail::operator_norm(volterra_matrix(nq, {1.0, 0.0}));
        TailCertificate cert;
        cert.lower =
            Envelope::parse(format_double(base_norm * (1.0 - 1e-6)) + "*(" + expr.text() + ")");
        if (expr.nonincreasing_on(1)) {
          cert.upper =
              Envelope::parse(format_double(base_norm * (1.0 + 1e-6)) + "*(" + expr.text() + ")");
        }
        cert.dim_bound = nq;
        tail = std::move(cert);
      }
      break;
    }
  }

  if (tail_override) {
    TailCertificate merged = *tail_override;
    if (!merged.spectral_clearance && tail) merged.spectral_clearance = tail->spectral_clearance;
    tail = std::move(merged);
  }
  return make_generator(std::move(gen), std::move(tail));
}

std::int64_t assemble_dimension_cap() {
  if (const char* env = std::getenv("BLOCKSPEC_DIM_CAP")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return v;
    throw ParseError("BLOCKSPEC_DIM_CAP must be a positive integer, got '" + std::string(env) +
                     "'");
  }
  return 2000;
}

BlockMatrix assemble(const BlockFamily& family, std::int64_t n) {
  Truncation tr = truncate(family, n);
  std::int64_t total = 0;
  for (const BlockMatrix& b : tr.blocks) total += b.dim();
  const std::int64_t cap = assemble_dimension_cap();
  if (total > cap)
    throw ResourceError("assembled dimension " + std::to_string(total) +
                        " exceeds the configured cap " + std::to_string(cap));

  ComplexMatrix big = ComplexMatrix::Zero(total, total);
  std::int64_t offset = 0;
  for (const BlockMatrix& b : tr.blocks) {
    big.block(offset, offset, b.dim(), b.dim()) = b.entries();
    offset += b.dim();
  }
  return BlockMatrix::make(std::move(big));
}

std::optional<double> match_multisets(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::nullopt;
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const Complex& v : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = b.size();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(v - b[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best_j == b.size()) return std::nullopt;
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

OracleReport oracle_check(const BlockFamily& family, std::int64_t n, std::int64_t m_powers) {
  OracleReport report;
  BlockMatrix big = assemble(family, n);
  report.assembled_dim = big.dim();
  const std::int64_t count =
      family.is_explicit() ? std::min(n, family.explicit_size()) : n;
  const double scale = operator_norm(big);
  const double union_tol = kUnionTolScale * std::max(1.0, scale);

  std::vector<Complex> union_eigs;
  std::vector<double> merged_sv;
  for (std::int64_t idx = 1; idx <= count; ++idx) {
    BlockMatrix blk = family.block(idx);
    for (const Complex& v : eigenvalues(blk).values) union_eigs.push_back(v);
    for (double s : singular_values(blk)) merged_sv.push_back(s);
  }

  // (1) eigenvalue union = assembled spectrum as a multiset
  {
    OracleReport::Check check{"eigenvalue-union", false, 0.0, union_tol, ""};
    try {
      std::vector<Complex> assembled = eigenvalues(big).values;
      auto dev = match_multisets(union_eigs, assembled);
      if (dev) {
        check.deviation = *dev;
        check.pass = *dev <= union_tol;
        if (!check.pass) check.detail = "greedy matching exceeded tolerance";
      } else {
        check.detail = "multiset cardinality mismatch";
      }
    } catch (const Error& e) {
      check.detail = e.what();
    }
    report.checks.push_back(std::move(check));
  }

  // (2) merged singular values = assembled singular values
  {
    OracleReport::Check check{"singular-merge", false, 0.0, union_tol, ""};
    try {
      std::vector<double> assembled = singular_values(big);
      std::sort(merged_sv.begin(), merged_sv.end(), std::greater<>());
      if (assembled.size() == merged_sv.size()) {
        double worst = 0.0;
        for (std::size_t i = 0; i < assembled.size(); ++i)
          worst = std::max(worst, std::abs(assembled[i] - merged_sv[i]));
        check.deviation = worst;
        check.pass = worst <= union_tol;
      } else {
        check.detail = "cardinality mismatch";
      }
    } catch (const Error& e) {
      check.detail = e.what();
    }
    report.checks.push_back(std::move(check));
  }

  // (3) max of block resolvents = assembled resolvent at deterministic probes
  {
    OracleReport::Check check{"resolvent-max", false, 0.0, kResolventRelTol, ""};
    try {
      std::vector<Complex> probes;
      const double radius = 2.0 * (1.0 + scale);
      for (int k = 0; k < 8; ++k)
        probes.push_back(std::polar(radius, 2.0 * std::numbers::pi * k / 8.0));
      // interior probes: midpoints of the widest gaps between sorted real parts
      std::vector<double> reals;
      for (const Complex& v : union_eigs) reals.push_back(v.real());
      std::sort(reals.begin(), reals.end());
      std::vector<std::pair<double, double>> gaps;  // width, midpoint
      for (std::size_t i = 0; i + 1 < reals.size(); ++i)
        gaps.push_back({reals[i + 1] - reals[i], (reals[i] + reals[i + 1]) / 2.0});
      std::sort(gaps.begin(), gaps.end(), std::greater<>());
      for (std::size_t i = 0; i < gaps.size() && i < 4; ++i)
        probes.push_back({gaps[i].second, 0.0});

      double worst = 0.0;
      int used = 0;
      for (const Complex& tau : probes) {
        bool near_spectrum = false;
        for (const Complex& v : union_eigs)
          if (std::abs(tau - v) < 1e-6 * std::max(1.0, scale)) near_spectrum = true;
        if (near_spectrum) continue;
        double block_max = 0.0;
        for (std::int64_t idx = 1; idx <= count; ++idx) {
          ResolventNorm r = resolvent_norm(family.block(idx), tau);
          if (r.is_singular) {
            near_spectrum = true;
            break;
          }
          block_max = std::max(block_max, r.value);
        }
        if (near_spectrum) continue;
        ResolventNorm oracle = resolvent_norm(big, tau);
        if (oracle.is_singular) continue;
        ++used;
        worst = std::max(worst, std::abs(block_max - oracle.value) / oracle.value);
      }
      check.deviation = worst;
      check.pass = used > 0 && worst <= kResolventRelTol;
      if (used == 0) check.detail = "no usable probe points";
    } catch (const Error& e) {
      check.detail = e.what();
    }
    report.checks.push_back(std::move(check));
  }

  // (4) power-norm interchange: max_m ||big^m|| vs max_n max_m ||A_n^m||
  {
    OracleReport::Check check{"power-interchange", false, 0.0, kInterchangeRelTol, ""};
    try {
      PowerNorms big_powers = power_norms(big, m_powers);
      double lhs = 0.0;
      for (double v : big_powers.norms) lhs = std::max(lhs, v);
      double rhs = 0.0;
      for (std::int64_t idx = 1; idx <= count; ++idx) {
        PowerNorms pn = power_norms(family.block(idx), m_powers);
        for (double v : pn.norms) rhs = std::max(rhs, v);
      }
      if (big_powers.diverged_at) {
        check.detail = "assembled power overflowed at m = " +
                       std::to_string(*big_powers.diverged_at);
      } else {
        check.deviation = std::abs(lhs - rhs) / std::max(lhs, std::numeric_limits<double>::min());
        check.pass = check.deviation <= kInterchangeRelTol;
      }
    } catch (const Error& e) {
      check.detail = e.what();
    }
    report.checks.push_back(std::move(check));
  }

  return report;
}

}  // namespace blockspec
