#include "degen/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace degen {

SolveMode solve_mode_from_string(const std::string& s) {
  if (s == "direct") return SolveMode::direct;
  if (s == "continuation") return SolveMode::continuation;
  if (s == "both") return SolveMode::both;
  throw std::invalid_argument("unknown solve mode '" + s + "'");
}

const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::direct: return "direct";
    case SolveMode::continuation: return "continuation";
    case SolveMode::both: return "both";
  }
  return "?";
}

void SolveConfig::validate() const {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must lie in (0, 1)");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(linear_tol > 0.0)) throw std::invalid_argument("linear tolerance must be positive");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("stop tolerance must be positive");
}

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double matrix_inf_norm(const SparseSystem& sys) {
  double m = 0.0;
  for (std::size_t i = 0; i < sys.n; ++i) {
    double row = 0.0;
    for (std::size_t k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) row += std::abs(sys.val[k]);
    m = std::max(m, row);
  }
  return m;
}

/// Normwise backward error ||Ax - b|| / (||A|| ||x|| + ||b||), infinity norms.
double true_residual(const SparseSystem& sys, std::span<const double> x) {
  const auto ax = sys.apply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < sys.n; ++i) r = std::max(r, std::abs(ax[i] - sys.rhs[i]));
  const double scale = matrix_inf_norm(sys) * inf_norm(x) + inf_norm(sys.rhs);
  return scale > 0.0 ? r / scale : r;
}

}  // namespace

std::vector<double> solve_linear(const SparseSystem& sys, double tol, LinearSolverKind kind,
                                 LinearSolveInfo& info, const std::vector<double>* guess) {
  info = {};
  const Eigen::Index n = static_cast<Eigen::Index>(sys.n);
  Eigen::Map<const Eigen::VectorXd> b(sys.rhs.data(), n);
  std::vector<double> x(sys.n, 0.0);
  if (inf_norm(sys.rhs) == 0.0) {
    info.method = "trivial";
    return x;
  }

  if (kind != LinearSolverKind::sparse_lu) {
    const RowMatrix A = sys.to_eigen();
    Eigen::BiCGSTAB<RowMatrix, Eigen::IncompleteLUT<double>> krylov;
    krylov.preconditioner().setDroptol(1e-5);
    krylov.preconditioner().setFillfactor(20);
    // Eigen stops on ||r||_2/||b||_2, which bounds the backward error checked below.
    krylov.setTolerance(tol);
    krylov.setMaxIterations(1000);
    krylov.compute(A);
    Eigen::VectorXd sol;
    if (krylov.info() == Eigen::Success) {
      if (guess && guess->size() == sys.n) {
        Eigen::Map<const Eigen::VectorXd> g(guess->data(), n);
        sol = krylov.solveWithGuess(b, g);
      } else {
        sol = krylov.solve(b);
      }
      info.iterations = static_cast<int>(krylov.iterations());
      std::copy(sol.data(), sol.data() + n, x.begin());
      info.relative_residual = true_residual(sys, x);
      info.history.push_back("bicgstab+ilut: iterations=" + std::to_string(info.iterations) +
                             " backward error=" + fmt_sci(info.relative_residual));
      info.method = "bicgstab+ilut";
      if (info.relative_residual <= tol && std::isfinite(info.relative_residual)) return x;
    } else {
      info.history.push_back("ilut factorization failed");
    }
    if (kind == LinearSolverKind::krylov)
      throw SolverError("Krylov solve did not reach the residual tolerance",
                        {{"history", info.history}});
  }

  const ColMatrix A = sys.to_eigen();
  Eigen::SparseLU<ColMatrix> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed (singular assembly?)",
                      {{"history", info.history}, {"lu", lu.lastErrorMessage()}});
  Eigen::VectorXd sol = lu.solve(b);
  std::copy(sol.data(), sol.data() + n, x.begin());
  info.method = "sparse_lu";
  info.relative_residual = true_residual(sys, x);
  info.history.push_back("sparse_lu: backward error=" + fmt_sci(info.relative_residual));
  if (!(info.relative_residual <= std::max(tol, 1e-10)))
    throw SolverError("sparse LU solve is inaccurate (ill-conditioned assembly)",
                      {{"history", info.history}});
  return x;
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json j{{"delta", s.delta},
                     {"sup_norm", s.sup_norm},
                     {"linear_residual", s.linear_residual},
                     {"method", s.method}};
    j["diff_prev"] = s.diff_prev ? nlohmann::json(*s.diff_prev) : nlohmann::json(nullptr);
    st.push_back(j);
  }
  nlohmann::json j{{"mode", mode},
                   {"steps", st},
                   {"sup_bound", sup_bound},
                   {"sup_bound_respected", sup_bound_respected},
                   {"converged", converged},
                   {"nonmonotone_differences", nonmonotone_differences}};
  j["mode_agreement_gap"] =
      mode_agreement_gap ? nlohmann::json(*mode_agreement_gap) : nlohmann::json(nullptr);
  if (direct_failure) j["direct_failure"] = *direct_failure;
  return j;
}

namespace {

double check_preconditions(const OperatorCoefficients& coeffs, const ScalarField& f,
                           const BoundaryData& boundary) {
  const CoefficientCertificate cert = certify(coeffs, f.grid());
  if (!cert.negative())
    throw ConditionError("c must be negative on the closed domain (sampled c0 = " +
                         std::to_string(cert.c0) + ")");
  if (!cert.elliptic())
    throw ConditionError("a_ij is not elliptic at every node (sampled lambda = " +
                         std::to_string(cert.lambda) + ")");
  (void)boundary;
  return cert.c0;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

Solution solve_direct(const OperatorCoefficients& coeffs, const ScalarField& f,
                      const BoundaryData& boundary, const SolveConfig& config) {
  config.validate();
  const double c0 = check_preconditions(coeffs, f, boundary);
  const SparseSystem sys = assemble(coeffs, f.grid(), 0.0, f, boundary);
  LinearSolveInfo info;
  std::vector<double> x = solve_linear(sys, config.linear_tol, config.linear, info);

  SolveReport rep;
  rep.mode = "direct";
  rep.sup_bound = f.max_abs() / c0 + boundary.max_abs();
  const double sup = inf_norm(x);
  rep.steps.push_back({0.0, sup, info.relative_residual, std::nullopt, info.method});
  rep.sup_bound_respected = sup <= rep.sup_bound * (1.0 + 1e-9) + 1e-12;
  return {ScalarField(f.grid_ptr(), std::move(x)), std::move(rep)};
}

Solution solve_continuation(const OperatorCoefficients& coeffs, const ScalarField& f,
                            const BoundaryData& boundary, const SolveConfig& config) {
  config.validate();
  const double c0 = check_preconditions(coeffs, f, boundary);
  SolveReport rep;
  rep.mode = "continuation";
  rep.sup_bound = f.max_abs() / c0 + boundary.max_abs();
  rep.converged = false;

  std::vector<double> prev;
  double delta = config.delta0;
  for (int k = 0; k < config.max_steps; ++k, delta *= config.ratio) {
    const SparseSystem sys = assemble(coeffs, f.grid(), delta, f, boundary);
    LinearSolveInfo info;
    std::vector<double> x =
        solve_linear(sys, config.linear_tol, config.linear, info, prev.empty() ? nullptr : &prev);
    ContinuationStep step{delta, inf_norm(x), info.relative_residual, std::nullopt, info.method};
    if (step.sup_norm > rep.sup_bound * (1.0 + 1e-9) + 1e-12) rep.sup_bound_respected = false;
    if (!prev.empty()) {
      step.diff_prev = sup_diff(x, prev);
      const auto& last = rep.steps.back().diff_prev;
      if (last && *step.diff_prev > *last) rep.nonmonotone_differences = true;
    }
    rep.steps.push_back(step);
    prev = std::move(x);
    if (step.diff_prev && *step.diff_prev < config.stop_tol) {
      rep.converged = true;
      break;
    }
  }
  return {ScalarField(f.grid_ptr(), std::move(prev)), std::move(rep)};
}

Solution solve(const OperatorCoefficients& coeffs, const ScalarField& f,
               const BoundaryData& boundary, const SolveConfig& config) {
  switch (config.mode) {
    case SolveMode::continuation: return solve_continuation(coeffs, f, boundary, config);
    case SolveMode::direct:
      try {
        return solve_direct(coeffs, f, boundary, config);
      } catch (const SolverError& e) {
        Solution s = solve_continuation(coeffs, f, boundary, config);
        s.report.direct_failure = e.what();
        return s;
      }
    case SolveMode::both: {
      Solution d = solve_direct(coeffs, f, boundary, config);
      Solution c = solve_continuation(coeffs, f, boundary, config);
      d.report.mode = "both";
      d.report.mode_agreement_gap = sup_diff(d.u.values(), c.u.values());
      d.report.converged = c.report.converged;
      d.report.nonmonotone_differences = c.report.nonmonotone_differences;
      d.report.sup_bound_respected =
          d.report.sup_bound_respected && c.report.sup_bound_respected;
      for (const auto& s : c.report.steps) d.report.steps.push_back(s);
      return d;
    }
  }
  throw std::logic_error("unreachable solve mode");
}

namespace {

double residual_at(const OperatorCoefficients& coeffs, const ScalarField& u,
                   const ScalarField& f, std::size_t node) {
  const Grid& g = u.grid();
  const MultiIndex idx = g.unravel(node);
  if (idx[g.normal_axis()] == 0 || g.on_lateral_or_top(idx)) return 0.0;
  const int n = g.dim();
  const Point p = g.point(node);
  const double t = p[n - 1];
  double second = 0.0, first = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) second += coeffs.a(k, l, p) * nodal_d2(g, u.values(), node, k, l);
    first += coeffs.b(k, p) * nodal_d1(g, u.values(), node, k);
  }
  return std::abs(t * t * second + t * first + coeffs.c(p) * u[node] - f[node]);
}

}  // namespace

ScalarField residual(const OperatorCoefficients& coeffs, const ScalarField& u,
                     const ScalarField& f) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
  std::vector<double> r(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    r[k] = residual_at(coeffs, u, f, static_cast<std::size_t>(k));
  return ScalarField(u.grid_ptr(), std::move(r));
}

namespace serial {

ScalarField residual(const OperatorCoefficients& coeffs, const ScalarField& u,
                     const ScalarField& f) {
  std::vector<double> r(u.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = residual_at(coeffs, u, f, k);
  return ScalarField(u.grid_ptr(), std::move(r));
}

}  // namespace serial

}  // namespace degen
