#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "degen/analysis.hpp"
#include "degen/grid.hpp"
#include "degen/manufactured.hpp"
#include "degen/operator.hpp"
#include "degen/solver.hpp"
#include "json.hpp"

namespace degen {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by problem files: tables ([a] and [a.b]),
/// bare or quoted keys, basic and literal strings, integers, floats,
/// booleans and (nested, multi-line) arrays. Inline tables and dates are
/// rejected.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);

struct GridConfig {
  int dim = 2;
  int N = 64;
  int M = 128;
  double gamma = 2.0;
};

/// Expression-defined problem. a defaults to the identity and b to zero.
struct CoefficientConfig {
  std::vector<std::string> a;  // row-major dim x dim
  std::vector<std::string> b;
  std::string c;
  std::optional<std::string> f;
  std::optional<std::filesystem::path> f_file;
  std::string boundary = "0";
};

struct ManufacturedConfig {
  CaseTag tag = CaseTag::monomial;
  double a = 1.0;
  double b = 0.0;
  double s = 1.5;
  std::string psi = "1";
};

struct AnalysisConfig {
  std::vector<std::string> operations;
  Point anchor{};
  std::optional<FitWindow> window;
  double alpha = 0.5;
  int k = 0;
  std::size_t sample_pairs = 2000;
  std::optional<double> s;
  std::optional<Region> inner;
  std::optional<std::filesystem::path> u_file;
};

struct BarrierConfig {
  double sigma = 0.0;
  double mu = 0.5;
  int tangential = 320;
  int levels = 320;
  double t_min = 1e-8;
};

struct ProblemConfig {
  GridConfig grid;
  std::optional<CoefficientConfig> coefficients;
  std::optional<ManufacturedConfig> manufactured;
  SolveConfig solve;
  AnalysisConfig analysis;
  std::optional<BarrierConfig> barrier;
  std::uint64_t seed = 0;
  nlohmann::json acceptance = nlohmann::json::object();

  /// Relative paths are resolved against base_dir. Exactly one of
  /// [coefficients] and [manufactured] must be present unless
  /// `require_problem` is false.
  static ProblemConfig from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {},
                                 bool require_problem = true);
};

ProblemConfig load_config(const std::filesystem::path& path, bool require_problem = true);

/// Everything a solve needs, built from a config.
struct Problem {
  std::shared_ptr<const Grid> grid;
  OperatorCoefficients coeffs;
  ScalarField f;
  BoundaryData boundary;
  std::optional<ManufacturedCase> manufactured;
  std::optional<ScalarField> exact;
};

std::shared_ptr<const Grid> build_grid(const GridConfig& g);
OperatorCoefficients build_coefficients(const CoefficientConfig& c, int dim);
Problem build_problem(const ProblemConfig& cfg);

}  // namespace degen
