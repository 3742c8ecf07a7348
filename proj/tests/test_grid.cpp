#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace degen;
using degen::test::grid;

TEST_CASE("normal coordinates: uniform and graded") {
  auto g1 = Grid::make(2, 4, 4, 1.0);
  std::vector<double> want1{0, 0.25, 0.5, 0.75, 1};
  auto c1 = g1.normal_coords();
  REQUIRE(c1.size() == 5);
  for (int j = 0; j < 5; ++j) CHECK(c1[j] == doctest::Approx(want1[j]).epsilon(1e-15));

  auto g2 = Grid::make(2, 4, 4, 2.0);
  std::vector<double> want2{0, 0.0625, 0.25, 0.5625, 1};
  for (int j = 0; j < 5; ++j) CHECK(g2.normal_coords()[j] == doctest::Approx(want2[j]).epsilon(1e-15));
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(Grid::make(2, 4, 0, 1.0), GridError);
  CHECK_THROWS_AS(Grid::make(4, 4, 4, 1.0), GridError);
  CHECK_THROWS_AS(Grid::make(2, 4, 4, 0.5), GridError);
}

TEST_CASE("index and unravel are inverse; normal index fastest") {
  auto g = Grid::make(3, 4, 5, 1.5);
  CHECK(g.stride(2) == 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) CHECK(g.index(g.unravel(k)) == k);
  CHECK(g.t(1) == doctest::Approx(g.normal_coords()[1]));
}

TEST_CASE("face nodes cover the lateral and top boundary") {
  auto g = Grid::make(2, 4, 6, 2.0);
  std::size_t total = 0;
  for (const auto& face : g.dirichlet_faces()) {
    for (auto node : g.face_nodes(face)) {
      CHECK(g.on_lateral_or_top(g.unravel(node)));
      ++total;
    }
  }
  CHECK(total >= 2 * 5 + 7);
}

TEST_CASE("fd_gradient examples") {
  auto gu = grid(2, 8, 8, 1.0);
  auto seven = ScalarField::constant(gu, 7.0);
  for (const auto& comp : fd_gradient(seven))
    for (double v : comp.values()) CHECK(std::abs(v) < 1e-12);

  auto lin = ScalarField::sample(gu, [](const Point& p) { return p[1]; });
  auto dlin = fd_gradient(lin);
  for (double v : dlin[1].values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  auto gg = grid(2, 8, 16, 2.0);
  auto sq = ScalarField::sample(gg, [](const Point& p) { return p[1] * p[1]; });
  auto dt = fd_gradient(sq)[1];
  for (std::size_t k = 0; k < gg->node_count(); ++k) CHECK(std::abs(dt[k] - 2 * gg->t(k)) <= 1e-10);
}

TEST_CASE("fd_hessian examples") {
  auto gu = grid(2, 8, 8, 1.0);
  auto xt = ScalarField::sample(gu, [](const Point& p) { return p[0] * p[1]; });
  auto h = fd_hessian(xt);
  for (double v : h[0][1].values()) CHECK(std::abs(v - 1.0) <= 1e-10);
  for (double v : h[1][0].values()) CHECK(std::abs(v - 1.0) <= 1e-10);

  auto c = fd_hessian(ScalarField::constant(gu, 3.0));
  for (const auto& row : c)
    for (const auto& e : row)
      for (double v : e.values()) CHECK(std::abs(v) < 1e-9);

  auto gg = grid(2, 8, 16, 2.0);
  auto sq = ScalarField::sample(gg, [](const Point& p) { return p[1] * p[1]; });
  auto hsq = fd_hessian(sq);
  for (double v : hsq[1][1].values()) CHECK(std::abs(v - 2.0) <= 1e-10);
}

TEST_CASE("second-order consistency on a smooth function") {
  auto err = [](int m) {
    auto g = grid(2, m, m, 2.0);
    auto u = ScalarField::sample(g, [](const Point& p) { return std::sin(p[0]) * std::exp(p[1]); });
    auto d = fd_gradient(u)[1];
    double e = 0.0;
    for (std::size_t k = 0; k < g->node_count(); ++k) {
      auto p = g->point(k);
      e = std::max(e, std::abs(d[k] - std::sin(p[0]) * std::exp(p[1])));
    }
    return e;
  };
  double ratio = err(32) / err(64);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("interpolate examples") {
  auto g = grid(2, 4, 4, 2.0);
  auto x1 = ScalarField::sample(g, [](const Point& p) { return p[0]; });
  auto xs = g->coords(0);
  auto ts = g->normal_coords();
  double mid = 0.5 * (xs[1] + xs[2]);
  CHECK(interpolate(x1, {mid, 0.5 * (ts[1] + ts[2]), 0}) == doctest::Approx(mid).epsilon(1e-14));

  auto bump = ScalarField::sample(g, [](const Point& p) { return std::cos(3 * p[0]) + p[1] * p[1]; });
  for (std::size_t k = 0; k < g->node_count(); ++k) CHECK(interpolate(bump, g->point(k)) == bump[k]);

  auto tf = ScalarField::sample(g, [](const Point& p) { return p[1]; });
  CHECK(std::abs(interpolate(tf, {0.1, 0.3, 0}) - 0.3) <= 1e-14);
  CHECK_THROWS_AS(interpolate(tf, {0.0, 1.5, 0}), GridError);
}

TEST_CASE("scalar fields reject non-finite values") {
  auto g = grid(2, 4, 4, 1.0);
  std::vector<double> v(g->node_count(), 0.0);
  v[1] = std::nan("");
  CHECK_THROWS(ScalarField(g, v));
}

TEST_CASE("csv and json round trips") {
  auto g = grid(3, 4, 4, 2.0);
  auto u = ScalarField::sample(g, [](const Point& p) { return p[0] - 2 * p[1] + std::exp(p[2]); });
  std::stringstream ss;
  write_field_csv(ss, u);
  auto back = read_field_csv(ss, g);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(back[k] == u[k]);

  auto g2 = Grid::from_json(g->to_json());
  CHECK(g2.node_count() == g->node_count());
  CHECK(g2.gamma() == g->gamma());
}
