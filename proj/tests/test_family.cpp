#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "blockspec/errors.hpp"
#include "blockspec/family.hpp"
#include "blockspec/family_json.hpp"
#include "blockspec/kernel.hpp"

using namespace blockspec;

namespace {

BlockMatrix scalar(double v) {
  ComplexMatrix m(1, 1);
  m(0, 0) = v;
  return BlockMatrix::make(std::move(m));
}

BlockMatrix nilpotent(double alpha) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = alpha;
  BlockFlags flags;
  flags.nilpotency_order = 2;
  return BlockMatrix::make(std::move(m), flags);
}

}  // namespace

TEST_CASE("make_explicit basics") {
  BlockFamily f = make_explicit({scalar(2.0), scalar(3.0)});
  CHECK(f.is_explicit());
  CHECK(f.explicit_size() == 2);
  CHECK(f.block(1).entries()(0, 0).real() == doctest::Approx(2.0));
  CHECK(f.block(2).entries()(0, 0).real() == doctest::Approx(3.0));

  CHECK_THROWS_AS(make_explicit(std::vector<BlockMatrix>{}), ConstructionError);
}

TEST_CASE("nilpotent blocks of the 2x2 example family") {
  BlockFamily f = make_explicit({nilpotent(1.0), nilpotent(2.0), nilpotent(3.0)});
  CHECK(f.explicit_size() == 3);
  for (std::int64_t n = 1; n <= 3; ++n) {
    CHECK(operator_norm(f.block(n)) == doctest::Approx(double(n)));
    CHECK(f.block(n).flags().nilpotency_order == 2);
  }
}

TEST_CASE("construction error names the offending index") {
  std::vector<ComplexMatrix> raw(1, ComplexMatrix(1, 1));
  raw[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    make_explicit(raw);
    FAIL("expected ConstructionError");
  } catch (const ConstructionError& e) {
    CHECK(std::string(e.what()).find("index 0") != std::string::npos);
  }
}

TEST_CASE("flag validation") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 3.0;
  BlockFlags wrong;
  wrong.nilpotency_order = 3;  // A^2 is already zero
  CHECK_THROWS_AS(BlockMatrix::make(m, wrong), ConstructionError);

  BlockFlags not_normal;
  not_normal.normal = true;
  CHECK_THROWS_AS(BlockMatrix::make(m, not_normal), ConstructionError);

  ComplexMatrix diag(2, 2);
  diag << 1.0, 0.0, 0.0, std::complex<double>(0.0, -2.0);
  BlockFlags normal;
  normal.normal = true;
  CHECK_NOTHROW(BlockMatrix::make(diag, normal));
}

TEST_CASE("measure weights must be positive") {
  CHECK_THROWS_AS(MeasureSpec::weights({1.0, 0.0}), ConstructionError);
  CHECK_THROWS_AS(MeasureSpec::weights({1.0, -2.0}), ConstructionError);
  CHECK_NOTHROW(MeasureSpec::weights({0.5, 2.0, 7.0}));
}

TEST_CASE("truncate clamps explicit families and reports it") {
  BlockFamily f = make_explicit({scalar(1.0), scalar(2.0), scalar(3.0)});
  Truncation two = truncate(f, 2);
  CHECK(two.blocks.size() == 2);
  CHECK_FALSE(two.clamped);

  Truncation ten = truncate(f, 10);
  CHECK(ten.blocks.size() == 3);
  CHECK(ten.clamped);
}

TEST_CASE("generator truncation and purity") {
  BlockFamily f = make_generator([](std::int64_t n) { return scalar(1.0 / double(n)); });
  Truncation four = truncate(f, 4);
  REQUIRE(four.blocks.size() == 4);
  CHECK(four.blocks[0].entries()(0, 0).real() == doctest::Approx(1.0));
  CHECK(four.blocks[3].entries()(0, 0).real() == doctest::Approx(0.25));
  CHECK_FALSE(four.clamped);

  // purity: bitwise identical re-evaluation
  CHECK(f.block(7) == f.block(7));

  // prefix property: truncate(f, N) is a prefix of truncate(f, M), N <= M
  Truncation six = truncate(f, 6);
  for (std::size_t i = 0; i < four.blocks.size(); ++i)
    CHECK(four.blocks[i] == six.blocks[i]);
}

TEST_CASE("tail certificate validation") {
  auto gen = [](std::int64_t n) { return scalar(1.0 / double(n)); };

  TailCertificate good;
  good.upper = Envelope::parse("1/n");
  CHECK_NOTHROW(make_generator(gen, good));

  TailCertificate increasing;
  increasing.upper = Envelope::parse("n");
  CHECK_THROWS_AS(make_generator(gen, increasing), ConstructionError);

  TailCertificate below_norms;
  below_norms.upper = Envelope::parse("1/(2*n)");
  CHECK_THROWS_AS(make_generator(gen, below_norms), ConstructionError);

  TailCertificate bad_lower;
  bad_lower.lower = Envelope::parse("2/n");  // above the true norms
  CHECK_THROWS_AS(make_generator(gen, bad_lower), ConstructionError);

  TailCertificate empty;
  CHECK_THROWS_AS(make_generator(gen, empty), ConstructionError);
}

TEST_CASE("family JSON round trips") {
  SUBCASE("explicit with [re,im] entries") {
    BlockFamily f = load_family_text(R"({
      "kind": "explicit",
      "blocks": [[[[2,0]]], [[[3,0]]]],
      "measure": "counting"
    })");
    CHECK(f.is_explicit());
    CHECK(f.explicit_size() == 2);
    CHECK(f.block(2).entries()(0, 0).real() == doctest::Approx(3.0));
  }

  SUBCASE("explicit with flagged block object") {
    BlockFamily f = load_family_text(R"({
      "kind": "explicit",
      "blocks": [{"entries": [[0, 0], [3, 0]], "nilpotency_order": 2}]
    })");
    CHECK(f.block(1).flags().nilpotency_order == 2);
  }

  SUBCASE("generator by fixture name with tail override") {
    BlockFamily f = load_family_text(R"({
      "kind": "generator",
      "name": "harmonic_diag",
      "tail": {"N0": 1, "upper": "1/n", "lower": "1/n", "dim_bound": 1}
    })");
    CHECK(f.is_generator());
    REQUIRE(f.tail().has_value());
    CHECK(f.tail()->upper.has_value());
    CHECK(f.tail()->singular.empty());  // override replaced the fixture envelopes
  }

  SUBCASE("weights measure") {
    BlockFamily f = load_family_text(R"({
      "kind": "explicit",
      "blocks": [[[1]]],
      "measure": [0.25, 4.0]
    })");
    CHECK_FALSE(f.measure().is_counting());
  }

  SUBCASE("malformed input") {
    CHECK_THROWS_AS(load_family_text("not json"), ParseError);
    CHECK_THROWS_AS(load_family_text(R"({"kind":"explicit","blocks":[]})"), ParseError);
    CHECK_THROWS_AS(load_family_text(R"({"kind":"wat"})"), ParseError);
    CHECK_THROWS_AS(load_family_text(R"({"kind":"explicit","blocks":[[[1,2],[3]]]})"),
                    ParseError);
    CHECK_THROWS_AS(load_family_text(R"({"kind":"generator","name":"nope"})"), ParseError);
  }
}
