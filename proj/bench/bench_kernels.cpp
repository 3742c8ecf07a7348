// Serial reference vs OpenMP kernels. Usage: bench_kernels [N M repeats]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "degen/analysis.hpp"
#include "degen/barriers.hpp"
#include "degen/solver.hpp"

using namespace degen;

namespace {
double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-16s %12.4f %12.4f %8.2fx\n", name, serial * 1e3, parallel * 1e3, serial / parallel);
}
}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 256;
  int m = argc > 2 ? std::atoi(argv[2]) : 512;
  int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  auto grid = std::make_shared<const Grid>(Grid::make(2, n, m, 2.0));
  OperatorCoefficients op(
      2, {Expr::parse("1 + 0.5*x1^2", 2), Expr::parse("0.2*t", 2), Expr::parse("0.2*t", 2),
          Expr::parse("1.5 + 0.5*sin(x1)*t", 2)},
      {Expr::parse("0.3*x1", 2), Expr::parse("0.5*t", 2)}, Expr(-1.0));
  auto f = ScalarField::sample(grid, [](const Point& p) { return std::cos(p[0]) * p[1]; });
  auto u = ScalarField::sample(grid, [](const Point& p) { return std::sin(p[0]) * std::sqrt(p[1]); });
  auto bd = BoundaryData::from_function(*grid, [](const Point& p) { return p[0]; });
  auto spec = construct_barrier(op, *grid, 0.0, 0.5);
  auto sample = barrier_sample(2, 320, 320, 1e-8);
  auto region = Region::whole(*grid);

  std::printf("grid %dx%d, %d thread(s), best of %d\n", n, m, omp_get_max_threads(), repeats);
  std::printf("%-16s %12s %12s %9s\n", "kernel", "serial ms", "openmp ms", "speedup");
  row("assemble", best_of(repeats, [&] { serial::assemble(op, *grid, 0.0, f, bd); }),
      best_of(repeats, [&] { assemble(op, *grid, 0.0, f, bd); }));
  row("residual", best_of(repeats, [&] { serial::residual(op, u, f); }),
      best_of(repeats, [&] { residual(op, u, f); }));
  row("verify_barrier", best_of(repeats, [&] { serial::verify_barrier(op, spec, sample); }),
      best_of(repeats, [&] { verify_barrier(op, spec, sample); }));
  row("holder_seminorm", best_of(repeats, [&] { serial::holder_seminorm(u, 0.5, region, 20000, 1); }),
      best_of(repeats, [&] { holder_seminorm(u, 0.5, region, 20000, 1); }));
}
