#include "degen/manufactured.hpp"
#include "degen/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace degen;
using degen::test::grid;

TEST_CASE("root condition examples") {
  auto r = root_condition_c(1, 0, 1.5);
  CHECK(r.c == doctest::Approx(-0.75));
  CHECK_FALSE(r.warning);
  CHECK(root_condition_c(1, 1, 1).c == doctest::Approx(-1.0));
  auto z = root_condition_c(1, 0, 1);
  CHECK(z.c == 0.0);
  CHECK(z.warning);
}

TEST_CASE("monomial pairs") {
  auto g = grid(2, 8, 16, 2.0);
  auto one = case1_pair(1, 0, 1.5, Expr(1.0), g);
  for (std::size_t k = 0; k < g->node_count(); ++k) {
    CHECK(one.f[k] == 0.0);
    CHECK(one.u[k] == doctest::Approx(std::pow(g->t(k), 1.5)));
  }
  auto lin = case1_pair(1, 0, 1.5, Expr::parse("1 + t", 2), g);
  for (std::size_t k = 0; k < g->node_count(); ++k)
    CHECK(lin.f[k] == doctest::Approx(3 * std::pow(g->t(k), 2.5)).epsilon(1e-12));
  auto mc = ManufacturedCase::make(CaseTag::monomial, 1, 0, 1.5, Expr::parse("1 + t", 2), 2);
  CHECK(mc.u0({0.2, 0, 0}) == 0.0);
  CHECK(mc.f({0.2, 0, 0}) == 0.0);
}

TEST_CASE("logarithmic pairs") {
  auto g = grid(2, 8, 16, 2.0);
  auto p = case2_pair(1, 1, 1, Expr(1.0), g);
  for (std::size_t k = 0; k < g->node_count(); ++k) {
    double t = g->t(k);
    CHECK(p.u[k] == doctest::Approx(t > 0 ? t * std::log(t) : 0.0));
    CHECK(p.f[k] == doctest::Approx(2 * t));
  }
  for (double a : {0.5, 2.0})
    for (double b : {-0.5, 1.0})
      for (double s : {1.0, 2.0, 3.0}) {
        auto q = case2_pair(a, b, s, Expr(1.0), g);
        for (std::size_t k = 0; k < g->node_count(); ++k)
          CHECK(q.f[k] == doctest::Approx((a * (2 * s - 1) + b) * std::pow(g->t(k), s)));
      }
  CHECK_THROWS_AS(case2_pair(1, 0, 1.5, Expr(1.0), g), std::invalid_argument);
}

TEST_CASE("normal traces") {
  auto c1 = ManufacturedCase::make(CaseTag::monomial, 1, 0, 1.5, Expr(1.0), 2);
  auto tr = c1.exact_normal_trace();
  REQUIRE(tr.exists);
  CHECK(tr.value({0.3, 0, 0}) == 0.0);
  auto c2 = ManufacturedCase::make(CaseTag::log, 1, 1, 1, Expr(1.0), 2);
  CHECK_FALSE(c2.exact_normal_trace().exists);
  auto c3 = ManufacturedCase::make(CaseTag::monomial, 1, 1, 1, Expr(1.0), 2);
  auto tr3 = c3.exact_normal_trace();
  REQUIRE(tr3.exists);
  CHECK(tr3.value({-0.4, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("manufactured pairs satisfy the discrete equation to truncation order") {
  auto psi = Expr::parse("1 + 0.5*x1^2 + t", 2);
  for (auto tag : {CaseTag::monomial, CaseTag::log}) {
    double s = tag == CaseTag::log ? 2.0 : 2.5;
    auto mc = ManufacturedCase::make(tag, 1.0, 0.5, s, psi, 2);
    CHECK(mc.root_residual() == doctest::Approx(0.0));
    auto err = [&](int m) {
      auto g = grid(2, m, m, 1.0);
      auto pair = sample_pair(mc, g);
      auto r = residual(mc.coefficients(), pair.u, pair.f);
      double e = 0;
      for (std::size_t k = 0; k < g->node_count(); ++k)
        if (g->t(k) >= 0.25 && !g->on_lateral_or_top(g->unravel(k))) e = std::max(e, std::abs(r[k]));
      return e;
    };
    double ratio = err(32) / err(64);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
}
