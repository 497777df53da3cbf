#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "heatsg/cli.hpp"

using namespace heatsg;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& row) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (char ch : row) {
    if (ch == '"') {
      in_quotes = !in_quotes;
    } else if (ch == ',' && !in_quotes) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Column `name` of every data row of a CSV report.
std::vector<std::string> column(const std::string& report, const std::string& name) {
  std::vector<std::string> values;
  std::vector<std::string> header;
  for (const auto& line : lines_of(report)) {
    if (line.starts_with("#")) continue;
    if (header.empty()) {
      header = fields_of(line);
      continue;
    }
    const auto row = fields_of(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) values.push_back(row.at(i));
    }
  }
  return values;
}

std::string header_value(const std::string& report, const std::string& key) {
  const std::string prefix = "# " + key + ": ";
  for (const auto& line : lines_of(report)) {
    if (line.starts_with(prefix)) return line.substr(prefix.size());
  }
  return {};
}

// Minimal POSIX-style word splitting: spaces and single quotes.
std::vector<std::string> shell_split(const std::string& cmd) {
  std::vector<std::string> words;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    const char ch = cmd[i];
    if (ch == '\'') {
      quoted = !quoted;
      any = true;
    } else if (ch == ' ' && !quoted) {
      if (any) words.push_back(cur);
      cur.clear();
      any = false;
    } else {
      cur += ch;
      any = true;
    }
  }
  if (any) words.push_back(cur);
  return words;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "heatsg_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("spec parsers") {
  CHECK(cli::parse_datum("hermite-fn:0,2").describe() == "hermite-fn:0,2");
  CHECK(cli::parse_datum("box:-1,1").describe() == "box:-1,1");
  CHECK(cli::parse_datum("zero").is_zero());
  CHECK(cli::parse_datum("gaussian:1,0.5").value(Point{0.0}) == 1.0);
  CHECK(cli::parse_datum("tabulated:-1/0,0/1,1/0").value(Point{0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(cli::parse_datum("box:1"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_datum("nope:1"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_datum("gaussian"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_datum("hermite-fn:1.5"), std::invalid_argument);

  CHECK(cli::parse_weight("gaussian:-4") == WeightSpec::gaussian(-4.0));
  CHECK(cli::parse_weight("stretched-exp:1,3") == WeightSpec::stretched_exp(1.0, 3.0));
  CHECK(cli::parse_weight("power:2;tilt:0.5").tilt() == 0.5);
  CHECK_THROWS_AS(cli::parse_weight("power:1,2"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_weight("power:1;tilted:2"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_weight("cubic:1"), std::invalid_argument);

  CHECK(cli::parse_list("1,-2.5,3e-1") == std::vector<double>{1.0, -2.5, 0.3});
  CHECK_THROWS_AS(cli::parse_list("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_list("1,x"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_list("inf"), std::invalid_argument);
}

TEST_CASE("eval") {
  SUBCASE("ground state under the Mehler flow") {
    const auto r = run_cli({"eval", "--kind", "hermite", "--datum", "hermite-fn:0", "--x", "0",
                            "--t", "1", "--n", "1"});
    REQUIRE(r.code == cli::kOk);
    const double expect = std::exp(-1.0) * std::pow(std::numbers::pi, -0.25);
    CHECK(std::stod(column(r.out, "value").at(0)) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(column(r.out, "error_estimate").size() == 1);
    CHECK(column(r.out, "evals_used").size() == 1);
  }
  SUBCASE("same value through the Meda parameter") {
    const auto r = run_cli({"eval", "--kind", "hermite", "--datum", "hermite-fn:0", "--x", "0",
                            "--s", std::to_string(std::tanh(1.0))});
    REQUIRE(r.code == cli::kOk);
    CHECK(std::stod(column(r.out, "value").at(0)) ==
          doctest::Approx(std::exp(-1.0) * std::pow(std::numbers::pi, -0.25)).epsilon(1e-6));
  }
  SUBCASE("box at small time") {
    const auto r = run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--x", "0",
                            "--t", "0.01"});
    REQUIRE(r.code == cli::kOk);
    CHECK(std::abs(std::stod(column(r.out, "value").at(0)) - std::erf(5.0)) <= 1e-8);
  }
  SUBCASE("quartic growth diverges") {
    const auto r = run_cli({"eval", "--kind", "classical", "--datum", "quartic-exp:0.5", "--x",
                            "0", "--t", "1"});
    CHECK(r.code == cli::kDivergent);
    CHECK(column(r.out, "divergent").at(0) == "true");
  }
  SUBCASE("both or neither time flag") {
    CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--t", "1", "--s", "0.5"})
              .code == cli::kUsage);
    CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1"}).code == cli::kUsage);
  }
  SUBCASE("point and dimension") {
    const auto r = run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--x", "0.5",
                            "--n", "2", "--t", "0.1"});
    REQUIRE(r.code == cli::kOk);
    CHECK(column(r.out, "x").at(0) == "0.5 0.5");
    CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--x", "0,1", "--n", "3",
                   "--t", "0.1"})
              .code == cli::kUsage);
    CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--x", "0,0,0,0", "--t",
                   "0.1"})
              .code == cli::kUsage);
  }
}

TEST_CASE("weight") {
  SUBCASE("constant weight norm") {
    const auto r = run_cli({"weight", "--family", "constant:1", "--p", "2", "--n", "1", "--t0",
                            "0.25"});
    REQUIRE(r.code == cli::kOk);
    CHECK(column(r.out, "member").at(0) == "true");
    CHECK(std::stod(column(r.out, "norm").at(0)) ==
          doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-6));
  }
  SUBCASE("cubic decay is not a member") {
    const auto r = run_cli({"weight", "--family", "stretched-exp:1,3", "--p", "2", "--n", "1"});
    CHECK(r.code == cli::kNonMember);
    CHECK(column(r.out, "member").at(0) == "false");
  }
  SUBCASE("gaussian threshold") {
    const auto r = run_cli({"weight", "--family", "gaussian:-4", "--p", "2", "--n", "1"});
    REQUIRE(r.code == cli::kOk);
    CHECK(std::stod(column(r.out, "threshold_M").at(0)) == doctest::Approx(2.0));
    CHECK_FALSE(column(r.out, "witness_t0").at(0).empty());
  }
  SUBCASE("bad family or exponent") {
    CHECK(run_cli({"weight", "--family", "cubic:1", "--p", "2"}).code == cli::kUsage);
    CHECK(run_cli({"weight", "--family", "constant:1", "--p", "0.5"}).code == cli::kUsage);
    CHECK(run_cli({"weight", "--family", "constant:-1", "--p", "2"}).code == cli::kUsage);
  }
}

TEST_CASE("converge") {
  SUBCASE("box at an interior point") {
    const auto r = run_cli({"converge", "--kind", "classical", "--datum", "box:-1,1", "--x", "0"});
    REQUIRE(r.code == cli::kOk);
    const auto err = column(r.out, "abs_err");
    REQUIRE(err.size() == 10);
    CHECK(std::stod(err.back()) < 1e-3);
    CHECK(lines_of(r.out).at(5) == "k,t_k,u,f,abs_err");
  }
  SUBCASE("fixed point of the shifted flow") {
    const auto r = run_cli({"converge", "--kind", "hermite-shifted", "--datum", "hermite-fn:0",
                            "--n", "1", "--x", "0"});
    REQUIRE(r.code == cli::kOk);
    for (const auto& e : column(r.out, "abs_err")) CHECK(std::stod(e) <= 1e-9);
  }
  SUBCASE("quartic datum") {
    const auto r = run_cli({"converge", "--kind", "classical", "--datum", "quartic-exp:0.5"});
    CHECK(r.code == cli::kDivergent);
    CHECK(column(r.out, "k").empty());
    CHECK(lines_of(r.out).back() == "k,t_k,u,f,abs_err");
  }
  SUBCASE("too few steps to reach the threshold") {
    const auto r = run_cli({"converge", "--kind", "classical", "--datum", "box:-1,1", "--x",
                            "0.9", "--steps", "1"});
    CHECK(r.code == cli::kNotConverged);
  }
}

TEST_CASE("maximal") {
  const auto r = run_cli({"maximal", "--kind", "classical", "--datum", "box:-1,1", "--x", "0.5",
                          "--grid", "6"});
  REQUIRE(r.code == cli::kOk);
  const auto sup = column(r.out, "running_sup");
  REQUIRE(sup.size() == 6);
  for (std::size_t j = 1; j < sup.size(); ++j) CHECK(std::stod(sup[j]) >= std::stod(sup[j - 1]));
  CHECK(std::stod(sup.back()) <= 1.0 + 1e-9);
  CHECK(run_cli({"maximal", "--kind", "classical", "--datum", "quartic-exp:1"}).code ==
        cli::kDivergent);
}

TEST_CASE("verify") {
  SUBCASE("small run") {
    const auto r = run_cli({"verify", "check_remark_upper", "--samples", "10"});
    REQUIRE(r.code == cli::kOk);
    CHECK(column(r.out, "passed").at(0) == "true");
    CHECK(column(r.out, "samples").at(0) == "10");
  }
  SUBCASE("parts are listed under their check") {
    const auto r = run_cli({"verify", "check_lemma_lower", "--samples", "40"});
    REQUIRE(r.code == cli::kOk);
    const auto parts = column(r.out, "part");
    CHECK(parts == std::vector<std::string>{"", "case1", "case2", "prefactor"});
  }
  SUBCASE("unknown names") {
    CHECK(run_cli({"verify", "bogus"}).code == cli::kUsage);
    CHECK(run_cli({"verify", "check_remark_upper", "bogus"}).code == cli::kUsage);
    CHECK(run_cli({"verify"}).code == cli::kUsage);
  }
}

TEST_CASE("malformed command lines") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(run_cli({"eval", "--kind"}).code == cli::kUsage);
  CHECK(run_cli({"eval", "--unknown", "1"}).code == cli::kUsage);
  CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--t", "abc"}).code ==
        cli::kUsage);
  CHECK(run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--t", "1", "--format",
                 "xml"})
            .code == cli::kUsage);
  CHECK(run_cli({"verify", "all", "--samples", "0"}).code == cli::kUsage);
  const auto bad = run_cli({"eval", "--kind", "nope", "--datum", "box:-1,1", "--t", "1"});
  CHECK(bad.code == cli::kUsage);
  CHECK(bad.err.find("nope") != std::string::npos);
  const auto help = run_cli({"eval", "--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("--datum") != std::string::npos);
}

TEST_CASE("reports round-trip through their recorded command") {
  const std::vector<std::vector<std::string>> cases = {
      {"eval", "--kind", "ou", "--datum", "hermite-poly:2", "--x", "0.3,-0.2", "--t", "0.4"},
      {"weight", "--family", "power:2;tilt:0.5", "--p", "1.5", "--format", "json"},
      {"converge", "--kind", "hermite", "--datum", "tabulated:-1/0,0/1,1/0", "--x", "0.1",
       "--steps", "8"},
      {"verify", "check_kernel_forms", "check_ou_markov", "--samples", "20", "--seed", "3"},
  };
  for (const auto& args : cases) {
    CAPTURE(args.front());
    const auto first = run_cli(args);
    REQUIRE(first.code == cli::kOk);
    std::string command;
    if (args.back() == "json") {
      const auto at = first.out.find("\"command\": \"") + 12;
      command = first.out.substr(at, first.out.find('"', at) - at);
    } else {
      command = header_value(first.out, "command");
    }
    auto words = shell_split(command);
    REQUIRE(words.size() > 1);
    CHECK(words.front() == "heatsg");
    words.erase(words.begin());
    const auto second = run_cli(words);
    CHECK(second.code == first.code);
    CHECK(second.out == first.out);
  }
}

TEST_CASE("config file") {
  const auto path = scratch("config.json");
  {
    std::ofstream f(path);
    f << R"({"kind": "classical", "datum": "box:-1,1", "x": [0.25], "t": 0.5, "rel-tol": 1e-10})";
  }
  SUBCASE("values fill missing flags") {
    const auto r = run_cli({"eval", "--config", path.string()});
    REQUIRE(r.code == cli::kOk);
    CHECK(column(r.out, "t").at(0) == "0.5");
    CHECK(header_value(r.out, "config").find("\"rel-tol\":1e-10") != std::string::npos);
  }
  SUBCASE("flags override the file") {
    const auto r = run_cli({"eval", "--config", path.string(), "--t", "0.125"});
    REQUIRE(r.code == cli::kOk);
    CHECK(column(r.out, "t").at(0) == "0.125");
  }
  SUBCASE("bad files") {
    CHECK(run_cli({"eval", "--config", scratch("missing.json").string()}).code == cli::kUsage);
    const auto junk = scratch("junk.json");
    std::ofstream(junk) << R"({"kind": "classical", "colour": "blue"})";
    CHECK(run_cli({"eval", "--config", junk.string()}).code == cli::kUsage);
    std::ofstream(junk) << "{not json";
    CHECK(run_cli({"eval", "--config", junk.string()}).code == cli::kUsage);
  }
}

TEST_CASE("--out writes the report and nothing else") {
  const auto path = scratch("report.csv");
  std::filesystem::remove(path);
  const auto r = run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--t", "0.5",
                          "--out", path.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.empty());
  std::ifstream in(path);
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body.starts_with("# tool: heatsg"));
  CHECK_FALSE(std::filesystem::exists(path.string() + ".partial"));
  const auto stdout_run = run_cli({"eval", "--kind", "classical", "--datum", "box:-1,1", "--t",
                                   "0.5"});
  CHECK(stdout_run.out == body);
}

TEST_CASE("json layout") {
  const auto r = run_cli({"verify", "check_remark_upper", "--samples", "5", "--format", "json"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.starts_with("{\n  \"header\": {"));
  CHECK(r.out.find("\"records\": [") != std::string::npos);
  CHECK(r.out.find("\"schema_version\": 1") != std::string::npos);
}
