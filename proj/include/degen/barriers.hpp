#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "degen/grid.hpp"
#include "degen/operator.hpp"
#include "json.hpp"

namespace degen {

/// One bounding step in the derivation of the barrier constants.
struct BoundStep {
  std::string term;
  double value = 0.0;
};

/// Supersolution psi = t^sigma (eps|x'|^2 + t^2)^{(mu-sigma)/2} + K t^mu.
struct BarrierSpec {
  double sigma = 0.0;
  double mu = 1.0;
  double eps = 1.0;
  double K = 0.0;
  double c_sigma = 0.0;
  double c_mu = 0.0;
  double C1 = 0.0;           // tangential part: L2 psi_hat <= C1 sqrt(eps) w
  double C2 = 0.0;           // normal part: I1 <= -7/8 c_sigma E^2 + C2 t^4
  double delta_split = 1.0;  // region split t <= delta_split * E^{1/2}
  std::vector<BoundStep> audit;

  nlohmann::json to_json() const;
};

/// Explicit conservative constants. Coefficient sup norms and the margins
/// c_sigma = -sup Q(sigma), c_mu = -sup Q(mu) are sampled on `grid`.
BarrierSpec construct_barrier(const OperatorCoefficients& coeffs, const Grid& grid, double sigma,
                              double mu);

struct BarrierValue {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

/// Analytic value, gradient and Hessian of the barrier at a point with t > 0.
BarrierValue eval_barrier(const BarrierSpec& spec, const Point& p, int dim);

/// Comparison weight w = t^sigma (eps|x'|^2 + t^2)^{(mu-sigma)/2}.
double barrier_weight(const BarrierSpec& spec, const Point& p, int dim);

/// L applied to the barrier at p, via the analytic derivatives.
double apply_operator_to_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                 const Point& p);

/// Tangential lattice (per axis, endpoints included) times log-spaced t levels in [t_min, 1].
std::vector<Point> barrier_sample(int dim, int tangential_per_axis, int normal_levels,
                                  double t_min);

struct BarrierCertificate {
  double sigma = 0.0, mu = 0.0, eps = 0.0, K = 0.0, c_sigma = 0.0, c_mu = 0.0;
  double worst_ratio = 0.0;
  Point worst_point{};
  std::size_t sample_size = 0;
  double threshold = 0.0;  // -c_sigma / 2
  double t_min = 0.0;
  bool passed = false;
  int dim = 2;

  nlohmann::json to_json() const;
};

/// Worst ratio L(barrier)/w over the sample; PASS iff it is <= -c_sigma/2.
BarrierCertificate verify_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                  std::span<const Point> sample);

namespace serial {
BarrierCertificate verify_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                  std::span<const Point> sample);
}  // namespace serial

}  // namespace degen
