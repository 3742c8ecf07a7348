#include <algorithm>
#include <random>

#include "degen/manufactured.hpp"
#include "degen/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace degen;
using degen::test::grid;

namespace {
OperatorCoefficients admissible_a() {
  return OperatorCoefficients(
      2, {Expr::parse("2 + x1^2", 2), Expr::parse("0.3*t", 2), Expr::parse("0.3*t", 2), Expr::parse("1 + t", 2)},
      {Expr(0.0), Expr(0.0)}, Expr(-1.0));
}

double sup_err(const ScalarField& u, const std::function<double(const Point&)>& exact) {
  double e = 0;
  for (std::size_t k = 0; k < u.size(); ++k) e = std::max(e, std::abs(u[k] - exact(u.grid().point(k))));
  return e;
}
}  // namespace

TEST_CASE("constant solution is reproduced") {
  auto g = grid(2, 16, 32, 2.0);
  auto op = admissible_a();
  auto f = ScalarField::constant(g, -1.0);
  auto bd = BoundaryData::from_function(*g, [](const Point&) { return 1.0; });
  SolveConfig cfg;
  auto sol = solve_direct(op, f, bd, cfg);
  CHECK(sup_err(sol.u, [](const Point&) { return 1.0; }) <= 1e-10);
  CHECK(sol.report.sup_bound_respected);

  cfg.mode = SolveMode::continuation;
  auto cont = solve_continuation(op, f, bd, cfg);
  CHECK(cont.report.steps.size() == 2);
  CHECK(cont.report.converged);
  for (const auto& s : cont.report.steps) CHECK(std::abs(s.sup_norm - 1.0) <= 1e-10);
}

TEST_CASE("zero data gives the zero solution") {
  auto g = grid(2, 8, 16, 2.0);
  auto op = admissible_a();
  auto f = ScalarField::constant(g, 0.0);
  auto bd = BoundaryData::from_function(*g, [](const Point&) { return 0.0; });
  auto sol = solve_direct(op, f, bd, SolveConfig{});
  CHECK(sol.u.max_abs() == 0.0);
}

TEST_CASE("manufactured t^1.5: direct error and agreement with continuation") {
  auto g = grid(2, 128, 256, 2.0);
  auto mc = ManufacturedCase::make(CaseTag::monomial, 1, 0, 1.5, Expr(1.0), 2);
  auto pair = sample_pair(mc, g);
  auto bd = BoundaryData::from_field(pair.u);
  SolveConfig cfg;
  cfg.mode = SolveMode::both;
  cfg.max_steps = 40;
  auto sol = solve(mc.coefficients(), pair.f, bd, cfg);
  CHECK(sup_err(sol.u, [](const Point& p) { return std::pow(p[1], 1.5); }) <= 5e-3);
  REQUIRE(sol.report.mode_agreement_gap);
  CHECK(*sol.report.mode_agreement_gap <= 1e-6);
  CHECK(sol.report.sup_bound_respected);
  for (const auto& s : sol.report.steps) CHECK(s.sup_norm <= sol.report.sup_bound * (1 + 1e-12));
}

TEST_CASE("linear solvers agree (uniqueness regression)") {
  auto g = grid(2, 32, 64, 2.0);
  auto op = admissible_a();
  auto f = ScalarField::sample(g, [](const Point& p) { return std::cos(2 * p[0]) - p[1]; });
  auto bd = BoundaryData::from_function(*g, [](const Point& p) { return p[0] * p[0]; });
  auto sys = assemble(op, *g, 0.0, f, bd);
  LinearSolveInfo i1, i2, i3;
  auto x1 = solve_linear(sys, 1e-13, LinearSolverKind::krylov, i1);
  auto x2 = solve_linear(sys, 1e-13, LinearSolverKind::sparse_lu, i2);
  std::vector<double> guess(sys.n, 0.5);
  auto x3 = solve_linear(sys, 1e-13, LinearSolverKind::krylov, i3, &guess);
  CHECK(degen::test::max_abs_diff(x1, x2) <= 1e-9);
  CHECK(degen::test::max_abs_diff(x3, x2) <= 1e-9);
  CHECK(i2.relative_residual <= 1e-13);
}

TEST_CASE("discrete comparison: f <= 0 and nonnegative data give u >= 0") {
  auto g = grid(2, 32, 64, 2.0);
  auto op = OperatorCoefficients::constant(2, 1.0, 0.5, -1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u01(0, 1);
  std::vector<double> fv(g->node_count());
  for (auto& v : fv) v = -u01(rng);
  ScalarField f(g, fv);
  auto bd = BoundaryData::from_function(*g, [](const Point& p) { return 1 + p[0]; });
  auto sol = solve_direct(op, f, bd, SolveConfig{});
  double mn = *std::min_element(sol.u.values().begin(), sol.u.values().end());
  CHECK(mn >= -1e-10);
}

TEST_CASE("residual examples") {
  auto g = grid(2, 16, 32, 2.0);
  auto op = admissible_a();
  auto one = ScalarField::constant(g, 1.0);
  auto r = residual(op, one, ScalarField::constant(g, -1.0));
  for (double v : r.values()) CHECK(std::abs(v) <= 1e-10);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> rv(g->node_count());
  for (auto& v : rv) v = u(rng);
  auto rr = residual(op, ScalarField(g, rv), ScalarField::constant(g, 0.0));
  CHECK(rr.max_abs() > 1.0);
}

TEST_CASE("residual of t^1.5 converges at second order away from t = 0") {
  auto op = OperatorCoefficients::constant(2, 1.0, 0.0, -0.75);
  auto err = [&](int m) {
    auto g = grid(2, 8, m, 2.0);
    auto u = ScalarField::sample(g, [](const Point& p) { return std::pow(p[1], 1.5); });
    auto r = residual(op, u, ScalarField::constant(g, 0.0));
    double e = 0;
    for (std::size_t k = 0; k < g->node_count(); ++k)
      if (g->t(k) >= 0.1 && !g->on_lateral_or_top(g->unravel(k))) e = std::max(e, std::abs(r[k]));
    return e;
  };
  double ratio = err(64) / err(128);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("parallel residual matches the serial reference") {
  auto g = grid(3, 8, 12, 2.0);
  auto op = OperatorCoefficients::constant(3, 1.0, 0.3, -2.0);
  auto u = ScalarField::sample(g, [](const Point& p) { return std::sin(p[0] + p[1]) * p[2]; });
  auto f = ScalarField::sample(g, [](const Point& p) { return p[2]; });
  auto a = residual(op, u, f);
  auto b = serial::residual(op, u, f);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("preconditions and configuration") {
  auto g = grid(2, 8, 8, 2.0);
  auto f = ScalarField::constant(g, 0.0);
  auto bd = BoundaryData::from_function(*g, [](const Point&) { return 0.0; });
  CHECK_THROWS_AS(solve(OperatorCoefficients::constant(2, 1, 0, 0.5), f, bd, SolveConfig{}),
                  ConditionError);
  SolveConfig bad;
  bad.ratio = 1.5;
  CHECK_THROWS(bad.validate());
  CHECK(solve_mode_from_string("both") == SolveMode::both);
  CHECK_THROWS(solve_mode_from_string("sideways"));
}
