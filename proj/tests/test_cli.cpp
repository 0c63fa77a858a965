#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockspec/cli.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;

  json report() const { return json::parse(out); }
};

CliResult run_cli(const std::vector<std::string>& argv, const std::string& stdin_text = "") {
  std::vector<const char*> raw;
  raw.push_back("blockspec");
  for (const std::string& a : argv) raw.push_back(a.c_str());
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  int code = blockspec::cli::run(static_cast<int>(raw.size()), raw.data(), out, err, in);
  return {code, out.str(), err.str()};
}

std::string write_temp_family(const std::string& name, const std::string& text) {
  std::string path = "/tmp/blockspec_test_" + name + ".json";
  std::ofstream f(path);
  f << text;
  return path;
}

const char* kTwoScalars = R"({"kind":"explicit","blocks":[[[[2,0]]],[[[3,0]]]]})";

}  // namespace

TEST_CASE("spectrum subcommand on a family file") {
  std::string path = write_temp_family("two_scalars", kTwoScalars);
  CliResult r = run_cli({"spectrum", "--family", path, "--truncate", "10"});
  REQUIRE(r.exit_code == 0);
  json verdict = r.report().at("verdict");
  CHECK(verdict.at("completeness") == "exact");
  REQUIRE(verdict.at("eigenvalues").size() == 2);
  CHECK(verdict.at("eigenvalues")[0].at("value")[0] == doctest::Approx(2.0));
  CHECK(verdict.at("eigenvalues")[1].at("blocks")[0] == 2);
}

TEST_CASE("family accepted on standard input") {
  CliResult r = run_cli({"spectrum", "--family", "-", "--truncate", "2"}, kTwoScalars);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report().at("verdict").at("eigenvalues").size() == 2);
}

TEST_CASE("classify on the accumulating fixture is continuous") {
  CliResult r = run_cli({"classify", "--fixture", "diag_accumulating", "--tau", "1.0,0.0",
                         "--truncate", "50"});
  REQUIRE(r.exit_code == 0);
  json verdict = r.report().at("verdict");
  CHECK(verdict.at("kind") == "continuous");
  CHECK(verdict.at("witness_norms").size() > 0);
}

TEST_CASE("check subcommand: oracle passes on nilpotent2") {
  CliResult r = run_cli({"check", "--fixture", "nilpotent2", "--alpha", "1,2,3", "--powers",
                         "10", "--truncate", "3"});
  REQUIRE(r.exit_code == 0);
  json verdict = r.report().at("verdict");
  REQUIRE(verdict.at("checks").size() == 4);
  for (const auto& c : verdict.at("checks")) CHECK(c.at("pass") == true);
}

TEST_CASE("schatten verdicts and the unknown exit contract") {
  SUBCASE("member with interval") {
    CliResult r = run_cli({"schatten", "--fixture", "harmonic_diag", "--p", "2", "--truncate",
                           "100"});
    REQUIRE(r.exit_code == 0);
    json verdict = r.report().at("verdict");
    CHECK(verdict.at("kind") == "member");
    CHECK(verdict.at("series").at("hi").get<double>() >= 1.6449);
  }

  SUBCASE("unknown is a result, not a failure") {
    CliResult r = run_cli({"schatten", "--fixture", "scalar_ones", "--p", "2", "--truncate",
                           "10"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.report().at("verdict").at("kind") == "unknown");
  }
}

TEST_CASE("powerbound and polybound subcommands") {
  CliResult power = run_cli({"powerbound", "--fixture", "nilpotent2", "--alpha-expr", "n",
                             "--truncate", "10", "--powers", "8"});
  REQUIRE(power.exit_code == 0);
  CHECK(power.report().at("verdict").at("family") == "unbounded");

  CliResult poly = run_cli({"polybound", "--fixture", "nilpotent2", "--alpha", "3",
                            "--truncate", "1"});
  REQUIRE(poly.exit_code == 0);
  json entry = poly.report().at("verdict").at("per_block").at("1");
  CHECK(entry.at("lo").get<double>() >= 3.0 - 1e-9);
  CHECK(entry.at("hi").get<double>() <= 4.0 + 1e-9);
}

TEST_CASE("resolvent-sup at an eigenvalue reports the error verdict with exit 1") {
  std::string path = write_temp_family("point_err", kTwoScalars);
  CliResult r = run_cli({"resolvent-sup", "--family", path, "--tau", "3,0", "--truncate", "2"});
  CHECK(r.exit_code == 1);
  CHECK(r.report().at("verdict").at("kind") == "point-spectrum-error");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({}).exit_code == 2);
  CHECK(run_cli({"frobnicate"}).exit_code == 2);
  CHECK(run_cli({"spectrum"}).exit_code == 2);  // neither --family nor --fixture
  CHECK(run_cli({"spectrum", "--family"}).exit_code == 2);
  CHECK(run_cli({"spectrum", "--fixture", "nope"}).exit_code == 2);
  CHECK(run_cli({"classify", "--fixture", "scalar_ones"}).exit_code == 2);  // missing --tau
  CHECK(run_cli({"schatten", "--fixture", "harmonic_diag", "--p", "0.5"}).exit_code == 2);
  CHECK(run_cli({"spectrum", "--family", "/nonexistent/file.json"}).exit_code == 2);

  CliResult malformed = run_cli({"spectrum", "--family", "-", "--truncate", "2"}, "{broken");
  CHECK(malformed.exit_code == 2);
  CHECK(malformed.err.find("JSON") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs") {
  std::vector<std::string> argv{"powerbound", "--fixture", "nilpotent2", "--alpha-expr",
                                "1/n", "--truncate", "6", "--powers", "6"};
  CliResult first = run_cli(argv);
  CliResult second = run_cli(argv);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == second.out);

  // the polynomial trials are seeded, so polybound is reproducible too
  std::vector<std::string> poly{"polybound", "--fixture", "nilpotent2", "--alpha", "2",
                                "--truncate", "1", "--seed", "99"};
  CHECK(run_cli(poly).out == run_cli(poly).out);
}

TEST_CASE("fixtures listing and help") {
  CliResult fixtures = run_cli({"fixtures"});
  REQUIRE(fixtures.exit_code == 0);
  CHECK(fixtures.report().at("verdict").at("fixtures").size() == 5);

  CliResult help = run_cli({"help"});
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("Subcommands") != std::string::npos);
}

TEST_CASE("timing is opt-in to keep default reports deterministic") {
  CliResult plain = run_cli({"compact", "--fixture", "harmonic_diag", "--truncate", "5"});
  CHECK_FALSE(plain.report().contains("wall_time_ms"));
  CliResult timed =
      run_cli({"compact", "--fixture", "harmonic_diag", "--truncate", "5", "--timing"});
  CHECK(timed.report().contains("wall_time_ms"));
}

TEST_CASE("resolvent-sup and minimal-support subcommands") {
  CliResult sup = run_cli({"resolvent-sup", "--fixture", "harmonic_diag", "--tau", "5,0",
                           "--truncate", "10"});
  REQUIRE(sup.exit_code == 0);
  CHECK(sup.report().at("verdict").at("kind") == "finite");
  CHECK(sup.report().at("verdict").at("bound").at("hi").get<double>() <= 0.2500001);

  std::string path = write_temp_family(
      "dups", R"({"kind":"explicit","blocks":[[[[1,0]]],[[[1,0]]],[[[2,0]]]]})");
  CliResult support = run_cli({"minimal-support", "--family", path, "--truncate", "3"});
  REQUIRE(support.exit_code == 0);
  CHECK(support.report().at("verdict").at("indices") == json::array({1, 3}));
}

TEST_CASE("pretty mode renders text instead of JSON") {
  CliResult r = run_cli({"compact", "--fixture", "harmonic_diag", "--truncate", "5",
                         "--pretty"});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("subcommand : compact") != std::string::npos);
  CHECK_THROWS(json::parse(r.out));
}
