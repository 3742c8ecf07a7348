#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degen/expr.hpp"
#include "degen/grid.hpp"
#include "degen/operator.hpp"
#include "json.hpp"

namespace degen {

// Exact solution/right-hand-side pairs for L = a t^2 Laplacian + b t d_t + c
// on the flat model (defining function t), where c is tied to s by the root
// condition a s(s-1) + b s + c = 0.

enum class CaseTag { monomial, log, mixed };

const char* to_string(CaseTag tag);
CaseTag case_tag_from_string(const std::string& s);

struct RootCondition {
  double c = 0.0;
  std::optional<std::string> warning;
};

/// c = -(a s(s-1) + b s). Warns when the result is not negative.
RootCondition root_condition_c(double a, double b, double s);

struct PsiDerivatives {
  double value = 0.0;
  double dt = 0.0;
  double laplacian = 0.0;
};

/// Exact central differences for syntactic polynomials of degree <= 2,
/// Richardson-extrapolated central differences otherwise.
PsiDerivatives psi_derivatives(const Expr& psi, const Point& p, int dim);

struct NormalTrace {
  bool exists = false;
  std::function<double(const Point&)> value;  // argument is a point with t = 0
  std::string reason;
};

class ManufacturedCase {
 public:
  /// monomial: u = psi t^s; log / mixed: u = psi t^s log t (mixed allows
  /// non-integer s). Throws std::invalid_argument on a bad (tag, s).
  static ManufacturedCase make(CaseTag tag, double a, double b, double s, Expr psi, int dim);

  CaseTag tag() const { return tag_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double s() const { return s_; }
  int dim() const { return dim_; }
  const Expr& psi() const { return psi_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double root_residual() const { return a_ * s_ * (s_ - 1.0) + b_ * s_ + c_; }
  /// a(2s-1) + b, the coefficient of the non-logarithmic t^s term of f.
  double log_coefficient() const { return a_ * (2.0 * s_ - 1.0) + b_; }

  double u(const Point& p) const;
  double f(const Point& p) const;
  /// Boundary trace u(x', 0) = (f/c)(x', 0); zero for every case here.
  double u0(const Point& p) const;
  /// Closed-form d_t u for t > 0.
  double dt_u(const Point& p) const;
  NormalTrace exact_normal_trace() const;

  OperatorCoefficients coefficients() const;
  nlohmann::json descriptor() const;

 private:
  CaseTag tag_ = CaseTag::monomial;
  double a_ = 1.0, b_ = 0.0, c_ = 0.0, s_ = 1.0;
  int dim_ = 2;
  Expr psi_;
  std::vector<std::string> warnings_;
};

struct FieldPair {
  ScalarField u;
  ScalarField f;
};

FieldPair sample_pair(const ManufacturedCase& mc, std::shared_ptr<const Grid> grid);

/// Monomial case: u = psi t^s, f = t^{s+1} [(2as+b) d_t psi + a t Laplacian psi].
FieldPair case1_pair(double a, double b, double s, const Expr& psi,
                     std::shared_ptr<const Grid> grid);

/// Logarithmic case for positive integer s: u = psi t^s log t.
FieldPair case2_pair(double a, double b, double s, const Expr& psi,
                     std::shared_ptr<const Grid> grid);

}  // namespace degen
