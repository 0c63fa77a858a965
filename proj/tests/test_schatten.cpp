#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "blockspec/errors.hpp"
#include "blockspec/fixtures.hpp"
#include "blockspec/kernel.hpp"
#include "blockspec/schatten.hpp"
#include "test_util.hpp"

using namespace blockspec;
using Complex = std::complex<double>;

namespace {

BlockFamily fixture(FixtureSpec::Name name) {
  FixtureSpec spec;
  spec.name = name;
  return make_fixture(spec);
}

BlockMatrix diag_block(std::vector<double> values) {
  const int d = static_cast<int>(values.size());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return BlockMatrix::make(std::move(m));
}

}  // namespace

TEST_CASE("compactness verdicts") {
  SUBCASE("explicit families are compact") {
    BlockFamily f = make_explicit({diag_block({1.0}), diag_block({2.0, 3.0})});
    CHECK(compactness_verdict(f, 2).kind == CompactnessVerdict::Kind::Compact);
  }

  SUBCASE("scalar ones is not compact") {
    CompactnessVerdict v = compactness_verdict(fixture(FixtureSpec::Name::ScalarOnes), 10);
    REQUIRE(v.kind == CompactnessVerdict::Kind::NotCompact);
    CHECK(v.norm_lower_bound > 0.0);
    for (double w : v.witness_norms) CHECK(w >= v.norm_lower_bound);
  }

  SUBCASE("harmonic diagonal is compact") {
    CHECK(compactness_verdict(fixture(FixtureSpec::Name::HarmonicDiag), 10).kind ==
          CompactnessVerdict::Kind::Compact);
  }

  SUBCASE("diag_accumulating is not compact (norms tend to one)") {
    CHECK(compactness_verdict(fixture(FixtureSpec::Name::DiagAccumulating), 10).kind ==
          CompactnessVerdict::Kind::NotCompact);
  }

  SUBCASE("certificate-free generators stay unknown with prefix norms") {
    BlockFamily f = make_generator([](std::int64_t n) {
      ComplexMatrix m(1, 1);
      m(0, 0) = 1.0 / double(n);
      return BlockMatrix::make(std::move(m));
    });
    CompactnessVerdict v = compactness_verdict(f, 8);
    REQUIRE(v.kind == CompactnessVerdict::Kind::Unknown);
    CHECK(v.prefix_norms.size() == 8);
  }
}

TEST_CASE("merged singular values") {
  SUBCASE("two diagonal blocks") {
    BlockFamily f = make_explicit({diag_block({3.0}), diag_block({1.0, 2.0})});
    SingularMerge m = merged_singular_values(f, 3, 2);
    REQUIRE(m.top.size() == 3);
    CHECK(m.top[0].value == doctest::Approx(3.0));
    CHECK(m.top[1].value == doctest::Approx(2.0));
    CHECK(m.top[2].value == doctest::Approx(1.0));
    CHECK(m.top[0].block == 1);
    CHECK(m.top[1].block == 2);
    CHECK(m.certified);
  }

  SUBCASE("nilpotent example family: top three then zeros") {
    FixtureSpec spec;
    spec.name = FixtureSpec::Name::Nilpotent2;
    spec.alpha_list = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
    BlockFamily f = make_fixture(spec);
    SingularMerge m = merged_singular_values(f, 6, 3);
    REQUIRE(m.top.size() == 6);
    CHECK(m.top[0].value == doctest::Approx(3.0));
    CHECK(m.top[1].value == doctest::Approx(2.0));
    CHECK(m.top[2].value == doctest::Approx(1.0));
    CHECK(m.top[3].value == doctest::Approx(0.0));
  }

  SUBCASE("random families match the assembled SVD as multisets") {
    for (const auto& raw : testutil::random_corpus(20, 5150)) {
      BlockFamily f = make_explicit(raw);
      ComplexMatrix big = testutil::assemble_raw(raw);
      std::vector<double> oracle = detail::singular_values(big);
      SingularMerge m =
          merged_singular_values(f, static_cast<std::int64_t>(oracle.size()), f.explicit_size());
      REQUIRE(m.top.size() == oracle.size());
      double scale = std::max(1.0, oracle.front());
      for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(std::abs(m.top[i].value - oracle[i]) <= 1e-8 * scale);
    }
  }

  SUBCASE("generator merges certify via the envelope") {
    SingularMerge m = merged_singular_values(fixture(FixtureSpec::Name::HarmonicDiag), 5, 20);
    REQUIRE(m.top.size() == 5);
    CHECK(m.top[0].value == doctest::Approx(1.0));
    CHECK(m.certified);  // b(21) = 1/21 < fifth value 1/5

    SingularMerge uncovered =
        merged_singular_values(fixture(FixtureSpec::Name::HarmonicDiag), 25, 20);
    CHECK_FALSE(uncovered.certified);  // tail could still contribute below rank 20
  }
}

TEST_CASE("Schatten decisions") {
  SUBCASE("p below one is a domain error") {
    CHECK_THROWS_AS(schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 0.5, 10),
                    DomainError);
  }

  SUBCASE("harmonic diagonal at p = 2: member with pi^2/6 inside the bracket") {
    SchattenDecision d = schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 2.0, 100);
    REQUIRE(d.kind == SchattenDecision::Kind::Member);
    const double basel = std::numbers::pi * std::numbers::pi / 6.0;
    CHECK(d.series.lo <= basel);
    CHECK(d.series.hi >= basel);
    CHECK(d.series.hi - d.series.lo <= 1e-2);
    CHECK(d.norm.hi >= std::sqrt(basel));
  }

  SUBCASE("harmonic diagonal at p = 1: the harmonic series diverges") {
    SchattenDecision d = schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 1.0, 100);
    REQUIRE(d.kind == SchattenDecision::Kind::NotMember);
    CHECK_FALSE(d.witness_partials.empty());
    CHECK(std::is_sorted(d.witness_partials.begin(), d.witness_partials.end()));
  }

  SUBCASE("zero family is a member of every class with norm zero") {
    BlockFamily f = make_explicit({diag_block({0.0, 0.0}), diag_block({0.0})});
    for (double p : {1.0, 2.0, 7.5}) {
      SchattenDecision d = schatten_decision(f, p, 2);
      REQUIRE(d.kind == SchattenDecision::Kind::Member);
      CHECK(d.series.lo == 0.0);
      CHECK(d.series.hi == 0.0);
    }
  }

  SUBCASE("verdicts are withheld for non-compact families") {
    SchattenDecision d = schatten_decision(fixture(FixtureSpec::Name::ScalarOnes), 2.0, 10);
    CHECK(d.kind == SchattenDecision::Kind::Unknown);
  }

  SUBCASE("exclusions remove inspected blocks from the series") {
    BlockFamily f = make_explicit({diag_block({2.0}), diag_block({5.0}), diag_block({1.0})});
    SchattenDecision all = schatten_decision(f, 2.0, 3);
    SchattenDecision without = schatten_decision(f, 2.0, 3, {2});
    CHECK(all.series.lo == doctest::Approx(4.0 + 25.0 + 1.0));
    CHECK(without.series.lo == doctest::Approx(4.0 + 1.0));
  }

  SUBCASE("rearrangement invariance on a finite family") {
    auto raw = testutil::random_corpus(1, 999).front();
    while (raw.size() < 6) raw.push_back(raw.front());
    BlockFamily base = make_explicit(raw);
    SchattenDecision reference = schatten_decision(base, 2.0, base.explicit_size());

    std::mt19937_64 rng(4242);
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 20; ++trial) {
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<ComplexMatrix> permuted;
      for (std::size_t i : order) permuted.push_back(raw[i]);
      BlockFamily f = make_explicit(permuted);
      SchattenDecision d = schatten_decision(f, 2.0, f.explicit_size());
      CHECK(std::abs(std::sqrt(d.series.lo) - std::sqrt(reference.series.lo)) <=
            1e-10 * std::sqrt(reference.series.lo));
    }
  }

  SUBCASE("monotone in p for contraction families") {
    // blocks scaled to norms <= 1: membership at p implies membership at p' > p
    SchattenDecision at2 = schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 2.0, 50);
    SchattenDecision at3 = schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 3.0, 50);
    SchattenDecision at4 = schatten_decision(fixture(FixtureSpec::Name::HarmonicDiag), 4.5, 50);
    CHECK(at2.kind == SchattenDecision::Kind::Member);
    CHECK(at3.kind == SchattenDecision::Kind::Member);
    CHECK(at4.kind == SchattenDecision::Kind::Member);
    CHECK(at3.series.hi <= at2.series.hi);
  }

  SUBCASE("measure independence: weights never change the verdict") {
    BlockFamily counting = make_explicit({diag_block({2.0}), diag_block({0.5})});
    BlockFamily weighted = make_explicit({diag_block({2.0}), diag_block({0.5})},
                                         MeasureSpec::weights({0.1, 17.0}));
    SchattenDecision a = schatten_decision(counting, 2.0, 2);
    SchattenDecision b = schatten_decision(weighted, 2.0, 2);
    CHECK(a.kind == b.kind);
    CHECK(a.series.lo == b.series.lo);
    CHECK(a.series.hi == b.series.hi);
  }
}
