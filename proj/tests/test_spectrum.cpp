#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "blockspec/errors.hpp"
#include "blockspec/fixtures.hpp"
#include "blockspec/kernel.hpp"
#include "blockspec/spectrum.hpp"
#include "test_util.hpp"

using namespace blockspec;
using Complex = std::complex<double>;

namespace {

BlockMatrix scalar(double v) {
  ComplexMatrix m(1, 1);
  m(0, 0) = v;
  BlockFlags flags;
  flags.normal = true;
  return BlockMatrix::make(std::move(m), flags);
}

BlockMatrix nilpotent(double alpha) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = alpha;
  BlockFlags flags;
  flags.nilpotency_order = 2;
  return BlockMatrix::make(std::move(m), flags);
}

}  // namespace

TEST_CASE("point spectrum of two scalars") {
  BlockFamily f = make_explicit({scalar(2.0), scalar(3.0)});
  SpectrumReport r = point_spectrum(f, 2);
  CHECK(r.exact);
  REQUIRE(r.eigenvalues.size() == 2);
  CHECK(r.eigenvalues[0].value == Complex(2.0));
  CHECK(r.eigenvalues[1].value == Complex(3.0));
}

TEST_CASE("nilpotent family: single eigenvalue with full provenance") {
  BlockFamily f = make_explicit({nilpotent(1.0), nilpotent(2.0), nilpotent(3.0)});
  SpectrumReport r = point_spectrum(f, 3);
  REQUIRE(r.eigenvalues.size() == 1);
  CHECK(std::abs(r.eigenvalues[0].value) <= 1e-12);
  CHECK(r.eigenvalues[0].blocks == std::vector<std::int64_t>{1, 2, 3});
}

TEST_CASE("random families match the assembled eigensolve") {
  auto corpus = testutil::random_corpus(25, 20240901);
  for (const auto& raw : corpus) {
    BlockFamily f = make_explicit(raw);
    ComplexMatrix big = testutil::assemble_raw(raw);
    double scale = detail::operator_norm(big);

    std::vector<Complex> oracle = detail::eigenvalues(big);
    std::vector<Complex> mine;
    for (std::int64_t idx = 1; idx <= f.explicit_size(); ++idx)
      for (const Complex& v : eigenvalues(f.block(idx)).values) mine.push_back(v);

    auto dev = match_multisets(mine, oracle);
    REQUIRE(dev.has_value());
    CHECK(*dev <= 1e-8 * std::max(1.0, scale));
  }
}

TEST_CASE("resolvent sup over explicit families is the exact max") {
  BlockFamily f = make_explicit({scalar(0.0), nilpotent(3.0)});
  Complex tau(2.0, 0.0);
  ResolventSup sup = resolvent_sup(f, tau, 2);
  REQUIRE(sup.kind == ResolventSup::Kind::Finite);
  CHECK(sup.bound.lo == sup.bound.hi);

  // oracle: 1/s_min on the assembled matrix
  ComplexMatrix big = testutil::assemble_raw({f.block(1).entries(), f.block(2).entries()});
  big.diagonal().array() -= tau;
  double smin = detail::singular_values(big).back();
  CHECK(sup.bound.lo == doctest::Approx(1.0 / smin).epsilon(1e-10));
}

TEST_CASE("resolvent sup throws on point-spectrum probes") {
  BlockFamily f = make_explicit({scalar(2.0), scalar(3.0)});
  CHECK_THROWS_AS(resolvent_sup(f, Complex(3.0, 0.0), 2), PointSpectrumError);
}

TEST_CASE("diag_accumulating resolvents") {
  FixtureSpec spec;
  spec.name = FixtureSpec::Name::DiagAccumulating;
  BlockFamily f = make_fixture(spec);

  SUBCASE("divergent at the accumulation point") {
    ResolventSup sup = resolvent_sup(f, Complex(1.0, 0.0), 40);
    REQUIRE(sup.kind == ResolventSup::Kind::Divergent);
    REQUIRE_FALSE(sup.witness_indices.empty());
    // witness resolvent norms are 1/dist = n
    for (std::size_t i = 0; i < sup.witness_indices.size(); ++i)
      CHECK(sup.witness_norms[i] ==
            doctest::Approx(double(sup.witness_indices[i])).epsilon(1e-9));
  }

  SUBCASE("finite with Neumann tail bound away from the disk") {
    ResolventSup sup = resolvent_sup(f, Complex(1.5, 0.0), 40);
    REQUIRE(sup.kind == ResolventSup::Kind::Finite);
    CHECK(sup.bound.hi <= 2.0 + 1e-9);
    CHECK(sup.bound.lo >= 1.9);  // 1/(0.5 + 1/n) approaches 2 from below
  }
}

TEST_CASE("harmonic fixture: Neumann bound example") {
  FixtureSpec spec;
  spec.name = FixtureSpec::Name::HarmonicDiag;
  BlockFamily f = make_fixture(spec);
  ResolventSup sup = resolvent_sup(f, Complex(5.0, 0.0), 10);
  REQUIRE(sup.kind == ResolventSup::Kind::Finite);
  CHECK(sup.bound.hi <= 1.0 / 4.0 + 1e-6);
}

TEST_CASE("classification") {
  SUBCASE("nilpotent family: zero is point spectrum") {
    BlockFamily f = make_explicit({nilpotent(1.0), nilpotent(2.0)});
    PointClass pc = classify_point(f, Complex(0.0, 0.0), 2);
    REQUIRE(pc.kind == PointClass::Kind::Point);
    CHECK(*pc.witness_index == 1);
  }

  SUBCASE("single scalar block: resolvent point with sup 1") {
    BlockFamily f = make_explicit({scalar(1.0)});
    PointClass pc = classify_point(f, Complex(2.0, 0.0), 1);
    REQUIRE(pc.kind == PointClass::Kind::Resolvent);
    CHECK(pc.sup_bound->lo == doctest::Approx(1.0));
    CHECK(pc.sup_bound->hi == doctest::Approx(1.0));
  }

  SUBCASE("diag_accumulating at the accumulation point is continuous") {
    FixtureSpec spec;
    spec.name = FixtureSpec::Name::DiagAccumulating;
    BlockFamily f = make_fixture(spec);
    PointClass pc = classify_point(f, Complex(1.0, 0.0), 50);
    CHECK(pc.kind == PointClass::Kind::Continuous);
  }

  SUBCASE("verdicts are mutually exclusive and total on a sweep") {
    FixtureSpec spec;
    spec.name = FixtureSpec::Name::DiagAccumulating;
    BlockFamily f = make_fixture(spec);
    int point = 0, continuous = 0, resolvent = 0, unknown = 0;
    for (double re : {0.0, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0}) {
      PointClass pc = classify_point(f, Complex(re, 0.0), 30);
      switch (pc.kind) {
        case PointClass::Kind::Point: ++point; break;
        case PointClass::Kind::Continuous: ++continuous; break;
        case PointClass::Kind::Resolvent: ++resolvent; break;
        case PointClass::Kind::Residual: FAIL("residual is impossible"); break;
        case PointClass::Kind::Unknown: ++unknown; break;
      }
    }
    CHECK(point >= 2);       // 0 = 1 - 1/1 and 0.5 = 1 - 1/2 are block values
    CHECK(continuous == 1);  // tau = 1
    CHECK(resolvent >= 2);   // 1.25, 1.5, 2 lie outside the closed disk
  }

  SUBCASE("generator without certificate yields unknown, never continuous") {
    BlockFamily f = make_generator(
        [](std::int64_t n) { return scalar(1.0 - 1.0 / double(n)); });
    PointClass pc = classify_point(f, Complex(1.0, 0.0), 30);
    CHECK(pc.kind == PointClass::Kind::Unknown);
    CHECK(pc.prefix_max > 1.0);
  }
}

TEST_CASE("monotone evidence: point verdicts survive larger truncations") {
  FixtureSpec spec;
  spec.name = FixtureSpec::Name::DiagAccumulating;
  BlockFamily f = make_fixture(spec);
  Complex tau(1.0 - 1.0 / 7.0, 0.0);
  PointClass small = classify_point(f, tau, 10);
  PointClass large = classify_point(f, tau, 80);
  CHECK(small.kind == PointClass::Kind::Point);
  CHECK(large.kind == PointClass::Kind::Point);
}

TEST_CASE("minimal support") {
  SUBCASE("duplicate spectrum dropped") {
    BlockFamily f = make_explicit({scalar(1.0), scalar(1.0), scalar(2.0)});
    CHECK(minimal_support(f, 3) == std::vector<std::int64_t>{1, 3});
  }

  SUBCASE("nilpotent family collapses to the first block") {
    BlockFamily f =
        make_explicit({nilpotent(1.0), nilpotent(2.0), nilpotent(3.0), nilpotent(4.0),
                       nilpotent(5.0)});
    CHECK(minimal_support(f, 5) == std::vector<std::int64_t>{1});
  }

  SUBCASE("inclusion-minimal even when a later block covers an earlier one") {
    // block 1 contributes {1}, block 2 contributes {1,2}: greedy alone keeps
    // both, the reverse-delete pass drops block 1
    ComplexMatrix first(1, 1);
    first(0, 0) = 1.0;
    ComplexMatrix second(2, 2);
    second.setZero();
    second(0, 0) = 1.0;
    second(1, 1) = 2.0;
    BlockFamily f = make_explicit(std::vector<ComplexMatrix>{first, second});
    CHECK(minimal_support(f, 2) == std::vector<std::int64_t>{2});
  }

  SUBCASE("random families: coverage holds and every retained index is needed") {
    auto corpus = testutil::random_corpus(10, 77);
    for (const auto& raw : corpus) {
      BlockFamily f = make_explicit(raw);
      const std::int64_t n = f.explicit_size();
      auto support = minimal_support(f, n);
      REQUIRE_FALSE(support.empty());

      SpectrumReport full = point_spectrum(f, n);
      // union over the support covers every eigenvalue entry
      for (const auto& entry : full.eigenvalues) {
        bool covered = false;
        for (std::int64_t idx : support) {
          for (const Complex& v : eigenvalues(f.block(idx)).values)
            if (std::abs(v - entry.value) <= 2.0 * entry.tolerance) covered = true;
        }
        CHECK(covered);
      }
      // dropping any retained index loses some eigenvalue
      for (std::size_t drop = 0; drop < support.size(); ++drop) {
        bool lost = false;
        for (const auto& entry : full.eigenvalues) {
          bool covered = false;
          for (std::size_t k = 0; k < support.size(); ++k) {
            if (k == drop) continue;
            for (const Complex& v : eigenvalues(f.block(support[k])).values)
              if (std::abs(v - entry.value) <= 2.0 * entry.tolerance) covered = true;
          }
          if (!covered) lost = true;
        }
        CHECK(lost);
      }
    }
  }
}
