#include "degen/operator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace degen {

OperatorCoefficients::OperatorCoefficients(int dim, std::vector<Expr> a, std::vector<Expr> b,
                                           Expr c)
    : dim_(dim), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("operator dimension must be 2 or 3");
  if (a_.size() != static_cast<std::size_t>(dim * dim))
    throw std::invalid_argument("a must have n*n entries");
  if (b_.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("b must have n entries");
  auto check = [&](const Expr& e) {
    if (e.dim() != 0 && e.dim() != dim)
      throw std::invalid_argument("coefficient expression has the wrong dimension");
  };
  for (const auto& e : a_) check(e);
  for (const auto& e : b_) check(e);
  check(c_);
}

OperatorCoefficients OperatorCoefficients::constant(int dim, double a_diag, double b_normal,
                                                    double c) {
  std::vector<Expr> a(dim * dim, Expr(0.0));
  for (int i = 0; i < dim; ++i) a[i * dim + i] = Expr(a_diag);
  std::vector<Expr> b(dim, Expr(0.0));
  b[dim - 1] = Expr(b_normal);
  return OperatorCoefficients(dim, std::move(a), std::move(b), Expr(c));
}

double OperatorCoefficients::a(int i, int j, const Point& p) const {
  if (i == j) return a_[i * dim_ + i].eval(coords(p));
  return 0.5 * (a_[i * dim_ + j].eval(coords(p)) + a_[j * dim_ + i].eval(coords(p)));
}

double OperatorCoefficients::b(int i, const Point& p) const { return b_[i].eval(coords(p)); }

double OperatorCoefficients::c(const Point& p) const { return c_.eval(coords(p)); }

std::vector<double> symmetric_eigenvalues(std::span<const double> m, int n) {
  if (n == 2) {
    const double a = m[0], b = 0.5 * (m[1] + m[2]), d = m[3];
    const double mean = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), b);
    return {mean - r, mean + r};
  }
  // Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method).
  auto at = [&](int i, int j) { return 0.5 * (m[i * 3 + j] + m[j * 3 + i]); };
  const double p1 = at(0, 1) * at(0, 1) + at(0, 2) * at(0, 2) + at(1, 2) * at(1, 2);
  const double q = (at(0, 0) + at(1, 1) + at(2, 2)) / 3.0;
  if (p1 == 0.0) {
    std::vector<double> e{at(0, 0), at(1, 1), at(2, 2)};
    std::sort(e.begin(), e.end());
    return e;
  }
  const double p2 = (at(0, 0) - q) * (at(0, 0) - q) + (at(1, 1) - q) * (at(1, 1) - q) +
                    (at(2, 2) - q) * (at(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  double bm[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) bm[i][j] = (at(i, j) - (i == j ? q : 0.0)) / p;
  const double det = bm[0][0] * (bm[1][1] * bm[2][2] - bm[1][2] * bm[2][1]) -
                     bm[0][1] * (bm[1][0] * bm[2][2] - bm[1][2] * bm[2][0]) +
                     bm[0][2] * (bm[1][0] * bm[2][1] - bm[1][1] * bm[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  std::vector<double> e{e1, e2, e3};
  std::sort(e.begin(), e.end());
  return e;
}

nlohmann::json CoefficientCertificate::to_json() const {
  return {{"lambda", lambda},
          {"Lambda", Lambda},
          {"gershgorin_lower", gershgorin_lower},
          {"gershgorin_upper", gershgorin_upper},
          {"c0", c0},
          {"max_asymmetry", max_asymmetry},
          {"samples", samples},
          {"elliptic", elliptic()},
          {"negative", negative()},
          {"note", "bounds sampled at grid nodes only"}};
}

CoefficientCertificate certify(const OperatorCoefficients& coeffs, const Grid& grid) {
  const int n = coeffs.dim();
  if (n != grid.dim()) throw std::invalid_argument("operator and grid dimensions differ");
  CoefficientCertificate cert;
  cert.lambda = cert.gershgorin_lower = std::numeric_limits<double>::infinity();
  cert.Lambda = cert.gershgorin_upper = -std::numeric_limits<double>::infinity();
  double sup_c = -std::numeric_limits<double>::infinity();
  std::vector<double> m(n * n);
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.point(k);
    std::span<const double> x(p.data(), n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i * n + j] = coeffs.a(i, j, p);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        cert.max_asymmetry =
            std::max(cert.max_asymmetry, std::abs(coeffs.a_expr(i, j).eval(x) -
                                                  coeffs.a_expr(j, i).eval(x)));
    const auto eig = symmetric_eigenvalues(m, n);
    cert.lambda = std::min(cert.lambda, eig.front());
    cert.Lambda = std::max(cert.Lambda, eig.back());
    for (int i = 0; i < n; ++i) {
      double radius = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) radius += std::abs(m[i * n + j]);
      cert.gershgorin_lower = std::min(cert.gershgorin_lower, m[i * n + i] - radius);
      cert.gershgorin_upper = std::max(cert.gershgorin_upper, m[i * n + i] + radius);
    }
    sup_c = std::max(sup_c, coeffs.c(p));
  }
  cert.c0 = -sup_c;
  cert.samples = grid.node_count();
  return cert;
}

double eval_Q(const OperatorCoefficients& coeffs, const Point& p, double mu) {
  const int n = coeffs.dim() - 1;
  return mu * (mu - 1.0) * coeffs.a(n, n, p) + mu * coeffs.b(n, p) + coeffs.c(p);
}

IndicialRoots indicial_roots(const OperatorCoefficients& coeffs, const Point& boundary_point) {
  const int n = coeffs.dim() - 1;
  const double a = coeffs.a(n, n, boundary_point);
  const double c = coeffs.c(boundary_point);
  if (!(c < 0.0))
    throw ConditionError("boundary negativity violated: c = " + std::to_string(c) +
                         " >= 0 at the boundary point");
  if (!(a > 0.0)) throw ConditionError("a_nn must be positive at the boundary point");
  // Q(mu) = a mu^2 + (b_n - a) mu + c; larger-magnitude root first, the
  // other from the product c/a.
  const double bq = coeffs.b(n, boundary_point) - a;
  const double disc = bq * bq - 4.0 * a * c;
  const double q = -0.5 * (bq + std::copysign(std::sqrt(disc), bq));
  const double r1 = q / a;
  const double r2 = c / q;
  return {std::min(r1, r2), std::max(r1, r2)};
}

nlohmann::json CharacteristicReport::to_json(int dim) const {
  auto pt = [dim](const Point& p) { return std::vector<double>(p.begin(), p.begin() + dim); };
  nlohmann::json j{{"exponent", exponent},
                   {"c0", c0},
                   {"c_exponent", c_exponent},
                   {"worst_c_point", pt(worst_c_point)},
                   {"worst_q_point", pt(worst_q_point)},
                   {"samples", samples},
                   {"passed", passed()}};
  double lo_minus = std::numeric_limits<double>::infinity(), hi_minus = -lo_minus;
  double lo_plus = lo_minus, hi_plus = -lo_minus;
  std::size_t failures = 0;
  for (const auto& s : boundary) {
    if (!s.roots) {
      ++failures;
      continue;
    }
    lo_minus = std::min(lo_minus, s.roots->minus);
    hi_minus = std::max(hi_minus, s.roots->minus);
    lo_plus = std::min(lo_plus, s.roots->plus);
    hi_plus = std::max(hi_plus, s.roots->plus);
  }
  j["boundary_samples"] = boundary.size();
  j["root_failures"] = failures;
  if (failures < boundary.size()) {
    j["mu_minus_range"] = {lo_minus, hi_minus};
    j["mu_plus_range"] = {lo_plus, hi_plus};
  }
  return j;
}

CharacteristicReport verify_conditions(const OperatorCoefficients& coeffs, const Grid& grid,
                                       double exponent) {
  if (!(exponent > 0.0)) throw std::invalid_argument("exponent must be positive");
  CharacteristicReport r;
  r.exponent = exponent;
  double sup_c = -std::numeric_limits<double>::infinity();
  double sup_q = sup_c;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.point(k);
    const double c = coeffs.c(p);
    const double q = eval_Q(coeffs, p, exponent);
    if (c > sup_c) {
      sup_c = c;
      r.worst_c_point = p;
    }
    if (q > sup_q) {
      sup_q = q;
      r.worst_q_point = p;
    }
    if (grid.unravel(k)[grid.normal_axis()] == 0) {
      BoundaryRootSample s{p, c, q, std::nullopt};
      try {
        s.roots = indicial_roots(coeffs, p);
      } catch (const ConditionError&) {
      }
      r.boundary.push_back(s);
    }
  }
  r.c0 = -sup_c;
  r.c_exponent = -sup_q;
  r.samples = grid.node_count();
  return r;
}

OperatorCoefficients conjugate_by_power(const OperatorCoefficients& coeffs, double kappa) {
  const int n = coeffs.dim();
  const int nn = n - 1;
  std::vector<Expr> a, b;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.push_back(coeffs.a_expr(i, j));
  if (kappa == 0.0) {
    for (int i = 0; i < n; ++i) b.push_back(coeffs.b_expr(i));
    return OperatorCoefficients(n, std::move(a), std::move(b), coeffs.c_expr());
  }
  for (int i = 0; i < n; ++i) {
    const Expr a_in = Expr(0.5) * (coeffs.a_expr(i, nn) + coeffs.a_expr(nn, i));
    b.push_back(coeffs.b_expr(i) - Expr(2.0 * kappa) * a_in);
  }
  // Q(-kappa) = kappa(kappa+1) a_nn - kappa b_n + c
  Expr c = Expr(kappa * (kappa + 1.0)) * coeffs.a_expr(nn, nn) -
           Expr(kappa) * coeffs.b_expr(nn) + coeffs.c_expr();
  return OperatorCoefficients(n, std::move(a), std::move(b), std::move(c));
}

OperatorCoefficients shift_normal_derivative(const OperatorCoefficients& coeffs) {
  const int n = coeffs.dim();
  const int nn = n - 1;
  std::vector<Expr> a, b;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.push_back(coeffs.a_expr(i, j));
  for (int i = 0; i < n; ++i) {
    const Expr a_in = Expr(0.5) * (coeffs.a_expr(i, nn) + coeffs.a_expr(nn, i));
    b.push_back(coeffs.b_expr(i) + Expr(2.0) * a_in);
  }
  return OperatorCoefficients(n, std::move(a), std::move(b),
                              coeffs.c_expr() + coeffs.b_expr(nn));
}

void BoundaryData::set(const Face& face, std::vector<double> values) {
  for (auto& [f, v] : slices_)
    if (f == face) {
      v = std::move(values);
      return;
    }
  slices_.emplace_back(face, std::move(values));
}

const std::vector<double>* BoundaryData::find(const Face& face) const {
  for (const auto& [f, v] : slices_)
    if (f == face) return &v;
  return nullptr;
}

BoundaryData BoundaryData::from_function(const Grid& grid,
                                         const std::function<double(const Point&)>& fn) {
  BoundaryData bd;
  for (const Face& face : grid.dirichlet_faces()) {
    std::vector<double> v;
    for (std::size_t k : grid.face_nodes(face)) v.push_back(fn(grid.point(k)));
    bd.set(face, std::move(v));
  }
  return bd;
}

BoundaryData BoundaryData::from_field(const ScalarField& field) {
  BoundaryData bd;
  const Grid& grid = field.grid();
  for (const Face& face : grid.dirichlet_faces()) {
    std::vector<double> v;
    for (std::size_t k : grid.face_nodes(face)) v.push_back(field[k]);
    bd.set(face, std::move(v));
  }
  return bd;
}

double BoundaryData::max_abs() const {
  double m = 0.0;
  for (const auto& [f, v] : slices_)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> SparseSystem::apply(std::span<const double> x) const {
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q) acc += val[q] * x[col[q]];
    y[r] = acc;
  }
  return y;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> SparseSystem::to_eigen() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(val.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q)
      trips.emplace_back(static_cast<int>(r), static_cast<int>(col[q]), val[q]);
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(static_cast<int>(n), static_cast<int>(n));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

void SparseSystem::write_coo(std::ostream& os) const {
  os << std::setprecision(17);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q)
      os << r << ' ' << col[q] << ' ' << val[q] << '\n';
}

namespace {

constexpr int kMaxRow = 27;

struct RowBuf {
  int count = 0;
  std::array<std::size_t, kMaxRow> col{};
  std::array<double, kMaxRow> val{};
  double rhs = 0.0;
};

struct AssemblyContext {
  const OperatorCoefficients& coeffs;
  const Grid& grid;
  double delta;
  std::span<const double> f;
  std::vector<double> dirichlet;  // NaN where not a Dirichlet node
};

AssemblyContext make_context(const OperatorCoefficients& coeffs, const Grid& grid, double delta,
                             const ScalarField& f, const BoundaryData& boundary) {
  if (!(delta >= 0.0)) throw std::invalid_argument("regularization delta must be >= 0");
  if (coeffs.dim() != grid.dim()) throw std::invalid_argument("operator/grid dimension mismatch");
  if (f.size() != grid.node_count()) throw std::invalid_argument("f does not live on this grid");
  AssemblyContext ctx{coeffs, grid, delta, f.values(),
                      std::vector<double>(grid.node_count(),
                                          std::numeric_limits<double>::quiet_NaN())};
  for (const Face& face : grid.dirichlet_faces()) {
    const auto* slice = boundary.find(face);
    const auto nodes = grid.face_nodes(face);
    if (!slice || slice->size() != nodes.size())
      throw std::invalid_argument("missing boundary data for face (axis " +
                                  std::to_string(face.axis) +
                                  (face.upper ? ", upper)" : ", lower)"));
    for (std::size_t q = 0; q < nodes.size(); ++q) ctx.dirichlet[nodes[q]] = (*slice)[q];
  }
  return ctx;
}

void assemble_row(const AssemblyContext& ctx, std::size_t node, RowBuf& row) {
  const Grid& g = ctx.grid;
  const int n = g.dim();
  const MultiIndex idx = g.unravel(node);
  const Point p = g.point(node);
  row.count = 0;

  if (idx[n - 1] == 0) {
    const double c = ctx.coeffs.c(p);
    if (c == 0.0) throw ConditionError("c vanishes on the boundary t = 0; system is singular");
    row.col[0] = node;
    if (ctx.delta == 0.0) {
      row.val[0] = c;
      row.rhs = ctx.f[node];
    } else {
      row.val[0] = 1.0;
      row.rhs = ctx.f[node] / c;
    }
    row.count = 1;
    return;
  }
  if (g.on_lateral_or_top(idx)) {
    row.col[0] = node;
    row.val[0] = 1.0;
    row.rhs = ctx.dirichlet[node];
    row.count = 1;
    return;
  }

  // Interior: every stencil is the central one, so the row lives in the
  // 3^n block around the node.
  double blk[kMaxRow] = {};
  int pow3[3] = {1, 1, 1};
  for (int a = n - 2; a >= 0; --a) pow3[a] = pow3[a + 1] * 3;
  const int center = (pow3[0] * 3 - 1) / 2;
  const double t = p[n - 1];
  const double t2 = t * t;

  for (int k = 0; k < n; ++k) {
    const Stencil& s2 = g.d2(k, idx[k]);
    const double w2 = t2 * ctx.coeffs.a(k, k, p) + ctx.delta;
    for (int q = 0; q < 3; ++q) blk[center + (q - 1) * pow3[k]] += w2 * s2.w[q];
    const Stencil& s1 = g.d1(k, idx[k]);
    const double w1 = t * ctx.coeffs.b(k, p);
    for (int q = 0; q < 3; ++q) blk[center + (q - 1) * pow3[k]] += w1 * s1.w[q];
  }
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      const double wkl = 2.0 * t2 * ctx.coeffs.a(k, l, p);
      if (wkl == 0.0) continue;
      const Stencil& sk = g.d1(k, idx[k]);
      const Stencil& sl = g.d1(l, idx[l]);
      for (int q = 0; q < 3; ++q)
        for (int r = 0; r < 3; ++r)
          blk[center + (q - 1) * pow3[k] + (r - 1) * pow3[l]] += wkl * sk.w[q] * sl.w[r];
    }
  blk[center] += ctx.coeffs.c(p);

  const int block = pow3[0] * 3;
  for (int b = 0; b < block; ++b) {
    if (blk[b] == 0.0) continue;
    std::ptrdiff_t offset = 0;
    int rem = b;
    for (int a = 0; a < n; ++a) {
      const int o = rem / pow3[a] - 1;
      rem %= pow3[a];
      offset += o * static_cast<std::ptrdiff_t>(g.stride(a));
    }
    row.col[row.count] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + offset);
    row.val[row.count] = blk[b];
    ++row.count;
  }
  row.rhs = ctx.f[node];
}

SparseSystem compress(std::vector<RowBuf>& rows) {
  SparseSystem sys;
  sys.n = rows.size();
  sys.row_ptr.resize(sys.n + 1, 0);
  for (std::size_t r = 0; r < sys.n; ++r) sys.row_ptr[r + 1] = sys.row_ptr[r] + rows[r].count;
  sys.col.resize(sys.row_ptr.back());
  sys.val.resize(sys.row_ptr.back());
  sys.rhs.resize(sys.n);
  for (std::size_t r = 0; r < sys.n; ++r) {
    std::copy_n(rows[r].col.begin(), rows[r].count, sys.col.begin() + sys.row_ptr[r]);
    std::copy_n(rows[r].val.begin(), rows[r].count, sys.val.begin() + sys.row_ptr[r]);
    sys.rhs[r] = rows[r].rhs;
  }
  return sys;
}

}  // namespace

SparseSystem assemble(const OperatorCoefficients& coeffs, const Grid& grid, double delta,
                      const ScalarField& f, const BoundaryData& boundary) {
  const AssemblyContext ctx = make_context(coeffs, grid, delta, f, boundary);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid.node_count());
  std::vector<RowBuf> rows(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      assemble_row(ctx, static_cast<std::size_t>(r), rows[r]);
    } catch (...) {
#pragma omp critical(degen_assemble_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return compress(rows);
}

namespace serial {

SparseSystem assemble(const OperatorCoefficients& coeffs, const Grid& grid, double delta,
                      const ScalarField& f, const BoundaryData& boundary) {
  const AssemblyContext ctx = make_context(coeffs, grid, delta, f, boundary);
  std::vector<RowBuf> rows(grid.node_count());
  for (std::size_t r = 0; r < rows.size(); ++r) assemble_row(ctx, r, rows[r]);
  return compress(rows);
}

}  // namespace serial

}  // namespace degen
