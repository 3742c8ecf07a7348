#include <random>
#include <vector>

#include "degen/acceptance.hpp"
#include "degen/expr.hpp"
#include "doctest.h"

using namespace degen;

namespace {
double at(const std::string& text, std::vector<double> p) {
  return Expr::parse(text, 2).eval(p);
}

// Random well-formed expression over (x1, t).
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 2);
  static const char* funcs[] = {"sin", "cos", "exp", "abs"};
  static const char* ops[] = {"+", "-", "*", "/"};
  switch (pick(rng)) {
    case 0: return "x1";
    case 1: return "t";
    case 2: return std::to_string(std::uniform_int_distribution<int>(1, 9)(rng));
    case 3: return "-" + random_expr(rng, depth - 1);
    case 4: return std::string(funcs[rng() % 4]) + "(" + random_expr(rng, depth - 1) + ")";
    case 5: return "(" + random_expr(rng, depth - 1) + ")^2";
    default:
      return random_expr(rng, depth - 1) + ops[rng() % 4] + random_expr(rng, depth - 1);
  }
}
}  // namespace

TEST_CASE("parse and evaluate examples") {
  CHECK(at("2*t + x1", {1, 0.5}) == doctest::Approx(2.0));
  CHECK(at("t^2*exp(x1)", {0, 0.5}) == doctest::Approx(0.25));
  CHECK(at("1 - 2^2", {0, 0}) == doctest::Approx(-3.0));
  CHECK(at("x1/(1+t)", {0.5, 1}) == doctest::Approx(0.25));
  CHECK(at("2^3^2", {0, 0}) == doctest::Approx(512.0));
  CHECK(at("-t^2", {0, 3}) == doctest::Approx(-9.0));
  CHECK(at("2^-1", {0, 0}) == doctest::Approx(0.5));
  CHECK(at("8/4/2", {0, 0}) == doctest::Approx(1.0));
  CHECK(at("1-2-3", {0, 0}) == doctest::Approx(-4.0));
  CHECK(at("2*pi", {0, 0}) == doctest::Approx(2 * 3.141592653589793));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    Expr::parse("t +", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
  try {
    Expr::parse("t + foo", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(Expr::parse("x2 + t", 2), ParseError);  // x2 is undeclared in 2D
  CHECK_NOTHROW(Expr::parse("x2 + t", 3));
  CHECK_THROWS_AS(Expr::parse("sin(t, x1)", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin()", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("(t", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("", 2), ParseError);
  CHECK_THROWS(Expr::parse("t", 4));
}

TEST_CASE("domain errors are raised, not propagated as NaN") {
  CHECK_THROWS_AS(at("log(t)", {0, 0}), EvalError);
  CHECK_THROWS_AS(at("sqrt(x1)", {-1, 0}), EvalError);
  CHECK_THROWS_AS(at("1/t", {0, 0}), EvalError);
  try {
    at("1 + log(t)", {0, 0});
  } catch (const EvalError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS(Expr::parse("t", 2).eval(std::vector<double>{1, 2, 3}));
}

TEST_CASE("precedence table") {
  const auto& cases = parser_precedence_cases();
  CHECK(cases.size() >= 30);
  for (const auto& [text, paren] : cases) {
    INFO(text);
    auto a = Expr::parse(text, 3);
    auto b = Expr::parse(paren, 3);
    CHECK(structurally_equal(a.root(), b.root()));
  }
}

TEST_CASE("print then parse is idempotent") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    auto text = random_expr(rng, 4);
    INFO(text);
    auto e1 = Expr::parse(text, 2);
    auto e2 = Expr::parse(e1.to_string(), 2);
    CHECK(structurally_equal(e1.root(), e2.root()));
    CHECK(e2.to_string() == e1.to_string());
  }
}

TEST_CASE("well-formed expressions evaluate without crashing") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  int evaluated = 0;
  for (int i = 0; i < 1000; ++i) {
    auto e = Expr::parse(random_expr(rng, 5), 2);
    std::vector<double> p{u(rng), 0.5 * (u(rng) + 1)};
    try {
      double v = e.eval(p);
      CHECK(std::isfinite(v));
      ++evaluated;
    } catch (const EvalError&) {
    }
  }
  CHECK(evaluated > 900);
}

TEST_CASE("random byte strings parse or fail with a located error") {
  auto out = fuzz_parser(10000, 3);
  CHECK(out.inputs == 10000);
  CHECK(out.crashes == 0);
  CHECK(out.bad_offsets == 0);
  CHECK(out.accepted + out.rejected == out.inputs);
}

TEST_CASE("polynomial degree") {
  CHECK(Expr::parse("1 + t", 2).polynomial_degree() == 1);
  CHECK(Expr::parse("x1*t - t^2", 2).polynomial_degree() == 2);
  CHECK(Expr::parse("sin(t)", 2).polynomial_degree() == -1);
  CHECK(Expr::parse("3", 2).polynomial_degree() == 0);
}
