#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "degen/grid.hpp"
#include "degen/operator.hpp"
#include "json.hpp"

namespace degen {

/// Too few usable samples, an empty region or an out-of-range window.
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed t-interval used by the fits. When omitted, fits use [t_3, 0.1],
/// skipping the two smallest positive levels.
struct FitWindow {
  double lo = 0.0;
  double hi = 0.1;
};

FitWindow default_window(const Grid& grid);

inline constexpr int kMinFitNodes = 6;
inline constexpr double kZeroDifference = 1e-13;

/// Least-squares fit log y = log C + p log t.
struct DecayFit {
  std::string quantity;
  bool exact = false;  // every difference was numerically zero
  double exponent = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  FitWindow window;
  Point anchor{};
  int nodes_used = 0;
  int nodes_excluded = 0;
  std::vector<double> t;       // profile, all window levels
  std::vector<double> values;  // |y| at each level

  nlohmann::json to_json() const;
};

/// Power-law fit of |y| against t. Entries with |y| < 1e-13 are dropped;
/// all dropped gives the exact sentinel, fewer than 6 kept throws.
DecayFit fit_power_law(std::span<const double> t, std::span<const double> y);

/// Field values along the normal line through the anchor at every mesh level in the window.
std::vector<double> normal_line(const ScalarField& field, const Point& anchor,
                                std::span<const double> levels);

/// Mesh levels t_j inside the window; throws when the window leaves (0, 0.5].
std::vector<double> window_levels(const Grid& grid, const FitWindow& window);

/// Fit of |u(x'_0, t) - u_0| over the window. u_0 defaults to the value of
/// the field at (x'_0, 0).
DecayFit fit_boundary_decay(const ScalarField& u, const Point& anchor,
                            std::optional<double> u0 = std::nullopt,
                            std::optional<FitWindow> window = std::nullopt);

struct WeightedDecay {
  DecayFit gradient;  // t |Du|, Euclidean
  DecayFit hessian;   // t^2 |D^2 u|, Frobenius
  double t_trace = 0.0;
  double gradient_trace = 0.0;  // values at the smallest positive level
  double hessian_trace = 0.0;

  nlohmann::json to_json() const;
};

/// t|Du| and t^2|D^2u| as nodal fields.
ScalarField weighted_gradient(const ScalarField& u);
ScalarField weighted_hessian(const ScalarField& u);

WeightedDecay weighted_derivative_decay(const ScalarField& u, const Point& anchor,
                                        std::optional<FitWindow> window = std::nullopt);

/// Axis-aligned box; axes beyond the grid dimension are ignored.
struct Region {
  Point lo{-1.0, -1.0, 0.0};
  Point hi{1.0, 1.0, 1.0};

  static Region whole(const Grid& grid);
  bool contains(const Point& p, int dim) const;
};

struct HolderEstimate {
  double alpha = 0.0;
  double value = 0.0;  // sampled lower bound of the seminorm
  std::size_t lattice_pairs = 0;
  std::size_t random_pairs = 0;
  Point x{}, y{};      // pair attaining the value
  std::uint64_t seed = 0;

  nlohmann::json to_json(int dim) const;
};

/// Sampled sup |w(x) - w(y)| / |x - y|^alpha over node pairs on grid lines
/// (offsets 1, 2, 4, ... and the extreme pair) and `sample_pairs` random
/// pairs with interpolated values.
HolderEstimate holder_seminorm(const ScalarField& field, double alpha, const Region& region,
                               std::size_t sample_pairs, std::uint64_t seed = 0);

/// Random pairs only, for closed-form functions.
HolderEstimate holder_seminorm(const std::function<double(const Point&)>& fn, int dim,
                               double alpha, const Region& region, std::size_t sample_pairs,
                               std::uint64_t seed = 0);

namespace serial {
HolderEstimate holder_seminorm(const ScalarField& field, double alpha, const Region& region,
                               std::size_t sample_pairs, std::uint64_t seed = 0);
}  // namespace serial

struct NormComponent {
  std::string name;
  double sup = 0.0;
  double seminorm = 0.0;
  bool seminorm_counted = true;
};

/// |u|_{C^{k,alpha}} + sum_{i=1,2} |t^i D^{k+i} u|_{C^alpha}, tensor norms
/// taken as the max over components.
struct WeightedNorm {
  int k = 0;
  double alpha = 0.0;
  double value = 0.0;
  std::vector<NormComponent> components;
  std::size_t sample_pairs = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

WeightedNorm weighted_norm_C_k_alpha_2(const ScalarField& u, int k, double alpha,
                                       std::size_t sample_pairs = 2000, std::uint64_t seed = 0);

struct RefinementStudy {
  std::vector<WeightedNorm> levels;
  std::vector<std::string> diverging;  // components growing >= 5% at every refinement

  nlohmann::json to_json() const;
};

RefinementStudy weighted_norm_refinement(const std::vector<ScalarField>& fields, int k,
                                         double alpha, std::size_t sample_pairs = 2000,
                                         std::uint64_t seed = 0);

struct NormalTraceCheck {
  std::vector<Point> points;  // boundary nodes, t = 0
  std::vector<double> formula;
  std::vector<double> fd;
  double max_discrepancy = 0.0;
  double max_formula = 0.0;
  double max_fd = 0.0;
  Point worst{};
  double margin = 0.0;  // -max(b_n + c) on the boundary

  nlohmann::json to_json(int dim) const;
};

/// u_1 = (d_t f - d_t c u - b_beta d_beta u)/(b_n + c) at t = 0 against the
/// one-sided difference of u. Lateral boundary nodes are skipped.
NormalTraceCheck normal_trace_check(const OperatorCoefficients& coeffs, const ScalarField& u,
                               const ScalarField& f, double margin = 1e-12);

struct TangentialBound {
  double sup = 0.0;
  Point at{};
  std::size_t nodes = 0;

  nlohmann::json to_json(int dim) const;
};

TangentialBound tangential_bound_check(const ScalarField& u, const Region& inner);

struct LogFactor {
  double s = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::string verdict;  // log, clean or inconclusive
  int nodes_used = 0;
  std::vector<double> excluded;  // t levels where t^s underflowed
  FitWindow window;

  nlohmann::json to_json() const;
};

inline constexpr double kLogSlopeThreshold = 0.1;
inline constexpr double kLogRSquared = 0.99;
inline constexpr double kCleanSlope = 0.02;

/// Regression of u(x'_0, t)/t^s against log t.
LogFactor detect_log_factor(const ScalarField& u, const Point& anchor, double s,
                            std::optional<FitWindow> window = std::nullopt);

/// Same regression on explicit samples.
LogFactor classify_log_factor(std::span<const double> t, std::span<const double> u, double s);

/// (t, value) rows with 17 significant digits.
void write_profile_csv(std::ostream& os, std::span<const double> t,
                       std::span<const double> values);

}  // namespace degen
