#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "degen/grid.hpp"
#include "degen/operator.hpp"
#include "json.hpp"

namespace degen {

/// Linear solver non-convergence or a singular assembly.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, nlohmann::json details)
      : std::runtime_error(what), details_(std::move(details)) {}
  const nlohmann::json& details() const { return details_; }

 private:
  nlohmann::json details_;
};

enum class SolveMode { direct, continuation, both };
enum class LinearSolverKind { automatic, krylov, sparse_lu };

SolveMode solve_mode_from_string(const std::string& s);
const char* to_string(SolveMode mode);

struct SolveConfig {
  SolveMode mode = SolveMode::direct;
  double delta0 = 1.0;
  double ratio = 0.5;
  int max_steps = 25;
  double linear_tol = 1e-12;
  double stop_tol = 1e-8;
  LinearSolverKind linear = LinearSolverKind::automatic;

  void validate() const;
};

struct LinearSolveInfo {
  std::string method;
  int iterations = 0;
  double relative_residual = 0.0;  // ||Ax - b|| / (||A|| ||x|| + ||b||), inf norms
  std::vector<std::string> history;
};

/// Krylov (BiCGSTAB + ILUT) with a sparse direct fallback; `automatic`
/// falls back when the Krylov residual misses the tolerance.
std::vector<double> solve_linear(const SparseSystem& sys, double tol, LinearSolverKind kind,
                                 LinearSolveInfo& info,
                                 const std::vector<double>* guess = nullptr);

struct ContinuationStep {
  double delta = 0.0;
  double sup_norm = 0.0;
  double linear_residual = 0.0;
  std::optional<double> diff_prev;
  std::string method;
};

struct SolveReport {
  std::string mode;
  std::vector<ContinuationStep> steps;  // one entry (delta = 0) for direct mode
  double sup_bound = 0.0;               // ||f||_inf / c0 + max boundary magnitude
  bool sup_bound_respected = true;
  bool converged = true;                // continuation stop tolerance reached
  bool nonmonotone_differences = false;
  std::optional<double> mode_agreement_gap;
  std::optional<std::string> direct_failure;

  nlohmann::json to_json() const;
};

struct Solution {
  ScalarField u;
  SolveReport report;
};

/// Degenerate system (delta = 0) with the algebraic row c u = f at t = 0.
Solution solve_direct(const OperatorCoefficients& coeffs, const ScalarField& f,
                      const BoundaryData& boundary, const SolveConfig& config);

/// L + delta Laplacian for delta_k = delta0 * ratio^k, u = f/c at t = 0,
/// warm-started; stops when successive iterates differ by < stop_tol.
Solution solve_continuation(const OperatorCoefficients& coeffs, const ScalarField& f,
                            const BoundaryData& boundary, const SolveConfig& config);

/// Dispatch on config.mode. `both` returns the direct solution with the
/// agreement gap filled in; a direct-mode failure falls back to continuation.
Solution solve(const OperatorCoefficients& coeffs, const ScalarField& f,
               const BoundaryData& boundary, const SolveConfig& config);

/// |t^2 a_ij D_ij u + t b_i D_i u + c u - f| at interior nodes, 0 on boundary rows.
ScalarField residual(const OperatorCoefficients& coeffs, const ScalarField& u,
                     const ScalarField& f);

namespace serial {
ScalarField residual(const OperatorCoefficients& coeffs, const ScalarField& u,
                     const ScalarField& f);
}  // namespace serial

}  // namespace degen
