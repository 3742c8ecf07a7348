#pragma once

#include <cmath>
#include <memory>

#include "degen/grid.hpp"

namespace degen::test {

inline std::shared_ptr<const Grid> grid(int dim, int n, int m, double gamma) {
  return std::make_shared<const Grid>(Grid::make(dim, n, m, gamma));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace degen::test
