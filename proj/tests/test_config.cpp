#include "degen/config.hpp"
#include "doctest.h"

using namespace degen;

TEST_CASE("toml subset") {
  auto j = parse_toml(R"(
# comment
seed = 42
name = "a\tb"
lit = 'C:\path'
x = -1.5e-3
big = +inf
flag = true

[grid]
dim = 3
arr = [[1, 2],
       [3, 4],]
"quoted key" = 1
dotted.key = "v"
)");
  CHECK(j["seed"] == 42);
  CHECK(j["name"] == "a\tb");
  CHECK(j["lit"] == "C:\\path");
  CHECK(j["x"].get<double>() == doctest::Approx(-1.5e-3));
  CHECK(std::isinf(j["big"].get<double>()));
  CHECK(j["flag"] == true);
  CHECK(j["grid"]["dim"] == 3);
  CHECK(j["grid"]["arr"][1][0] == 3);
  CHECK(j["grid"]["quoted key"] == 1);
  CHECK(j["grid"]["dotted"]["key"] == "v");
}

TEST_CASE("toml errors") {
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = {b = 1}"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[[t]]\na = 1"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = \"open"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = 1979-05-27"), ConfigError);
  CHECK_THROWS_AS(parse_toml("= 3"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = [1, 2"), ConfigError);
}

TEST_CASE("problem configuration") {
  auto cfg = ProblemConfig::from_json(parse_toml(R"(
[grid]
N = 16
M = 32
[coefficients]
a = 2
c = "-1 - t"
f = "x1"
boundary = 0
[solve]
mode = "continuation"
ratio = 0.25
)"));
  CHECK(cfg.grid.N == 16);
  CHECK(cfg.solve.mode == SolveMode::continuation);
  CHECK(cfg.solve.ratio == 0.25);
  auto prob = build_problem(cfg);
  Point p{0.5, 0.5, 0};
  CHECK(prob.coeffs.a(0, 0, p) == 2.0);
  CHECK(prob.coeffs.a(0, 1, p) == 0.0);
  CHECK(prob.coeffs.c(p) == doctest::Approx(-1.5));
  CHECK(prob.grid->node_count() == 17 * 33);
}

TEST_CASE("manufactured configuration") {
  auto cfg = ProblemConfig::from_json(parse_toml(R"(
[grid]
N = 8
M = 16
[manufactured]
case = "log"
s = 1
b = 1
)"));
  auto prob = build_problem(cfg);
  REQUIRE(prob.manufactured);
  REQUIRE(prob.exact);
  CHECK(prob.coeffs.c({0, 0, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("configuration errors") {
  auto bad = [](const char* text) { return ProblemConfig::from_json(parse_toml(text)); };
  CHECK_THROWS_AS(bad("[grid]\nN = 8\n"), ConfigError);  // no problem section
  CHECK_THROWS_AS(bad("[coefficients]\nboundary = 0\n"), ConfigError);  // c missing
  CHECK_THROWS_AS(bad("[coefficients]\nc = -1\nboundary = 0\nf = 0\n[manufactured]\ns = 1.5\n"),
                  ConfigError);
  CHECK_THROWS_AS(bad("[coefficients]\nc = -1\nboundary = 0\nf = 0\ncolour = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad("[grid]\nN = \"eight\"\n[manufactured]\n"), ConfigError);
  CHECK_THROWS_AS(bad("[manufactured]\n[solve]\nmode = \"sideways\"\n"), ConfigError);
  CHECK_THROWS(build_problem(bad("[coefficients]\nc = \"-1 +\"\nboundary = 0\nf = 0\n")));
  CHECK_NOTHROW(ProblemConfig::from_json(parse_toml(""), {}, false));
}
