#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "degen/expr.hpp"
#include "degen/grid.hpp"
#include "json.hpp"

namespace degen {

/// A structural hypothesis of the operator fails (c >= 0 where negativity is
/// required, b_n + c >= 0 for the normal-trace formula, ...).
class ConditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Coefficients of L = t^2 a_ij d_ij + t b_i d_i + c on the half-cube.
/// a is stored as given (row-major n x n); every consumer uses the
/// symmetric part (a_ij + a_ji)/2.
class OperatorCoefficients {
 public:
  OperatorCoefficients(int dim, std::vector<Expr> a, std::vector<Expr> b, Expr c);

  /// a = a_diag * I, b = b_normal * e_n, constant c.
  static OperatorCoefficients constant(int dim, double a_diag, double b_normal, double c);

  int dim() const { return dim_; }
  const Expr& a_expr(int i, int j) const { return a_[i * dim_ + j]; }
  const Expr& b_expr(int i) const { return b_[i]; }
  const Expr& c_expr() const { return c_; }

  double a(int i, int j, const Point& p) const;
  double b(int i, const Point& p) const;
  double c(const Point& p) const;

 private:
  std::span<const double> coords(const Point& p) const { return {p.data(), std::size_t(dim_)}; }

  int dim_;
  std::vector<Expr> a_;
  std::vector<Expr> b_;
  Expr c_;
};

/// Sampled ellipticity and sign bounds over every grid node.
struct CoefficientCertificate {
  double lambda = 0.0;       // min eigenvalue of sym(a)
  double Lambda = 0.0;       // max eigenvalue of sym(a)
  double gershgorin_lower = 0.0;
  double gershgorin_upper = 0.0;
  double c0 = 0.0;           // -sup c
  double max_asymmetry = 0.0;
  std::size_t samples = 0;
  bool elliptic() const { return lambda > 0.0; }
  bool negative() const { return c0 > 0.0; }
  nlohmann::json to_json() const;
};

CoefficientCertificate certify(const OperatorCoefficients& coeffs, const Grid& grid);

/// Eigenvalues of a symmetric 2x2 or 3x3 matrix (row-major), ascending.
std::vector<double> symmetric_eigenvalues(std::span<const double> m, int n);

/// Q(mu) = mu(mu-1) a_nn + mu b_n + c at a point.
double eval_Q(const OperatorCoefficients& coeffs, const Point& p, double mu);

struct IndicialRoots {
  double minus = 0.0;
  double plus = 0.0;
};

/// Real roots of Q at a boundary point. Requires c < 0 there.
IndicialRoots indicial_roots(const OperatorCoefficients& coeffs, const Point& boundary_point);

struct BoundaryRootSample {
  Point point{};
  double c = 0.0;
  double q = 0.0;  // Q(exponent)
  std::optional<IndicialRoots> roots;
};

struct CharacteristicReport {
  double exponent = 0.0;
  double c0 = 0.0;               // -sup c over all nodes
  double c_exponent = 0.0;       // -sup Q(exponent) over all nodes
  Point worst_c_point{};
  Point worst_q_point{};
  std::size_t samples = 0;
  std::vector<BoundaryRootSample> boundary;
  bool passed() const { return c0 > 0.0 && c_exponent > 0.0; }
  nlohmann::json to_json(int dim) const;
};

CharacteristicReport verify_conditions(const OperatorCoefficients& coeffs, const Grid& grid,
                                       double exponent);

/// Operator acting on t^kappa * v: (a, b_i - 2 kappa a_in, Q(-kappa)).
OperatorCoefficients conjugate_by_power(const OperatorCoefficients& coeffs, double kappa);

/// Operator acting on d_t u: (a, b_i + 2 a_in, c + b_n).
OperatorCoefficients shift_normal_derivative(const OperatorCoefficients& coeffs);

/// Dirichlet values on the lateral and top faces, one slice per face in
/// Grid::face_nodes order.
class BoundaryData {
 public:
  void set(const Face& face, std::vector<double> values);
  const std::vector<double>* find(const Face& face) const;

  static BoundaryData from_function(const Grid& grid,
                                    const std::function<double(const Point&)>& fn);
  static BoundaryData from_field(const ScalarField& field);

  double max_abs() const;

 private:
  std::vector<std::pair<Face, std::vector<double>>> slices_;
};

/// Compressed-row linear system A u = rhs, one row per grid node.
struct SparseSystem {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
  std::vector<double> rhs;

  std::vector<double> apply(std::span<const double> x) const;
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_eigen() const;
  /// "row col value" per line, zero-based, 17 significant digits.
  void write_coo(std::ostream& os) const;
};

/// Discretize L + delta*Laplacian. Rows at t = 0 are algebraic: c u = f when
/// delta = 0 and u = f/c when delta > 0. Lateral/top rows are Dirichlet.
SparseSystem assemble(const OperatorCoefficients& coeffs, const Grid& grid, double delta,
                      const ScalarField& f, const BoundaryData& boundary);

namespace serial {
SparseSystem assemble(const OperatorCoefficients& coeffs, const Grid& grid, double delta,
                      const ScalarField& f, const BoundaryData& boundary);
}  // namespace serial

}  // namespace degen
