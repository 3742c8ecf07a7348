#include <random>

#include "degen/barriers.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace degen;

TEST_CASE("construction preconditions") {
  auto g = Grid::make(2, 8, 8, 2.0);
  auto op = OperatorCoefficients::constant(2, 1, 0, -1);
  CHECK_THROWS(construct_barrier(op, g, -0.1, 0.5));
  CHECK_THROWS(construct_barrier(op, g, 0.5, 0.5));
  auto spec = construct_barrier(op, g, 0.0, 0.5);
  CHECK(spec.eps > 0);
  CHECK(spec.K >= 0);
  CHECK(spec.c_sigma == doctest::Approx(1.0));
  CHECK(spec.c_mu == doctest::Approx(1.25));
  CHECK_FALSE(spec.audit.empty());
}

TEST_CASE("eval_barrier polynomial case") {
  BarrierSpec spec;
  spec.sigma = 0;
  spec.mu = 2;
  spec.eps = 1;
  spec.K = 0;
  auto v = eval_barrier(spec, {0, 0.5, 0}, 2);
  CHECK(v.value == doctest::Approx(0.25));
  CHECK(v.grad[0] == doctest::Approx(0.0));
  CHECK(v.grad[1] == doctest::Approx(1.0));
  CHECK(v.hess[0][0] == doctest::Approx(2.0));
  CHECK(v.hess[1][1] == doctest::Approx(2.0));
  spec.K = 1;
  auto w = eval_barrier(spec, {0, 0.5, 0}, 2);
  CHECK(w.value - v.value == doctest::Approx(0.25));
  CHECK(w.grad[1] - v.grad[1] == doctest::Approx(1.0));
  CHECK(w.hess[1][1] - v.hess[1][1] == doctest::Approx(2.0));
}

TEST_CASE("barrier gradient agrees with central differences") {
  BarrierSpec spec;
  spec.sigma = 0.2;
  spec.mu = 0.7;
  spec.eps = 0.3;
  spec.K = 2.0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(-1, 1), ut(0.05, 1);
  for (int i = 0; i < 100; ++i) {
    Point p{ux(rng), ux(rng), ut(rng)};
    auto v = eval_barrier(spec, p, 3);
    for (int a = 0; a < 3; ++a) {
      double h = 1e-6;
      Point pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      double fd = (eval_barrier(spec, pp, 3).value - eval_barrier(spec, pm, 3).value) / (2 * h);
      CHECK(std::abs(fd - v.grad[a]) <= 1e-6 * std::max(1.0, std::abs(v.grad[a])));
    }
  }
}

TEST_CASE("constructed barrier passes certification") {
  auto g = Grid::make(2, 16, 16, 2.0);
  auto op = OperatorCoefficients::constant(2, 1, 0, -1);
  auto spec = construct_barrier(op, g, 0.0, 0.5);
  auto sample = barrier_sample(2, 64, 200, 1e-8);
  auto cert = verify_barrier(op, spec, sample);
  CHECK(cert.passed);
  CHECK(cert.worst_ratio <= -0.5 * spec.c_sigma);

  auto op3 = OperatorCoefficients::constant(3, 1, 0, -1);
  auto g3 = Grid::make(3, 8, 8, 2.0);
  auto spec3 = construct_barrier(op3, g3, 0.0, 0.5);
  CHECK(verify_barrier(op3, spec3, barrier_sample(3, 16, 40, 1e-8)).passed);
}

TEST_CASE("barrier with K forced to zero fails and localizes the worst point") {
  auto g = Grid::make(2, 16, 16, 2.0);
  auto op = OperatorCoefficients::constant(2, 1, 0, -1);
  auto spec = construct_barrier(op, g, 0.0, 1.5);
  spec.K = 0.0;
  auto cert = verify_barrier(op, spec, barrier_sample(2, 64, 200, 1e-8));
  CHECK_FALSE(cert.passed);
  CHECK(cert.worst_ratio > -0.5 * spec.c_sigma);
  CHECK(cert.worst_point[1] > 0.0);
}

TEST_CASE("pure normal power: L t^mu = Q(mu) t^mu") {
  BarrierSpec spec;
  spec.sigma = 0.5;
  spec.mu = 0.5;
  spec.eps = 1;
  spec.K = 0;
  auto op = OperatorCoefficients::constant(2, 1, 0, -1);
  for (double t : {1e-6, 1e-3, 0.1, 0.9}) {
    Point p{0.4, t, 0};
    double lhs = apply_operator_to_barrier(op, spec, p);
    double q = eval_Q(op, p, 0.5);
    CHECK(lhs == doctest::Approx(q * std::pow(t, 0.5)).epsilon(1e-10));
    CHECK(lhs <= -1.25 * std::pow(t, 0.5) * (1 - 1e-12));
  }
}

TEST_CASE("parallel certification matches the serial reference") {
  auto g = Grid::make(2, 16, 16, 2.0);
  auto op = OperatorCoefficients(
      2, {Expr::parse("1 + 0.2*x1^2", 2), Expr(0.0), Expr(0.0), Expr::parse("1 + t", 2)},
      {Expr(0.1), Expr(0.2)}, Expr::parse("-1 - t", 2));
  auto spec = construct_barrier(op, g, 0.0, 0.5);
  auto sample = barrier_sample(2, 40, 60, 1e-8);
  auto a = verify_barrier(op, spec, sample);
  auto b = serial::verify_barrier(op, spec, sample);
  CHECK(a.worst_ratio == b.worst_ratio);
  CHECK(a.worst_point == b.worst_point);
  CHECK(a.passed == b.passed);
}
