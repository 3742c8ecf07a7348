#include "degen/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace degen {

const char* to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::monomial: return "monomial";
    case CaseTag::log: return "log";
    case CaseTag::mixed: return "mixed";
  }
  return "?";
}

CaseTag case_tag_from_string(const std::string& s) {
  if (s == "monomial") return CaseTag::monomial;
  if (s == "log") return CaseTag::log;
  if (s == "mixed") return CaseTag::mixed;
  throw std::invalid_argument("unknown manufactured case '" + s +
                              "' (expected monomial, log or mixed)");
}

RootCondition root_condition_c(double a, double b, double s) {
  if (!(a > 0.0)) throw std::invalid_argument("root condition requires a > 0");
  if (!(s > 0.0)) throw std::invalid_argument("root condition requires s > 0");
  RootCondition r;
  r.c = -(a * s * (s - 1.0) + b * s);
  if (!(r.c < 0.0))
    r.warning = "c = " + std::to_string(r.c) + " violates the boundary negativity c < 0";
  return r;
}

PsiDerivatives psi_derivatives(const Expr& psi, const Point& p, int dim) {
  auto at = [&](int axis, double h) {
    Point q = p;
    q[axis] += h;
    return psi.eval(std::span<const double>(q.data(), dim));
  };
  PsiDerivatives d;
  d.value = psi.eval(std::span<const double>(p.data(), dim));
  const int deg = psi.polynomial_degree();
  const int tn = dim - 1;
  if (deg >= 0 && deg <= 2) {
    const double h = 0.5;
    d.dt = (at(tn, h) - at(tn, -h)) / (2.0 * h);
    for (int k = 0; k < dim; ++k) d.laplacian += (at(k, h) - 2.0 * d.value + at(k, -h)) / (h * h);
    return d;
  }
  const double h = 1e-2;
  auto d1 = [&](int axis, double step) { return (at(axis, step) - at(axis, -step)) / (2.0 * step); };
  auto d2 = [&](int axis, double step) {
    return (at(axis, step) - 2.0 * d.value + at(axis, -step)) / (step * step);
  };
  d.dt = (4.0 * d1(tn, h / 2) - d1(tn, h)) / 3.0;
  for (int k = 0; k < dim; ++k) d.laplacian += (4.0 * d2(k, h / 2) - d2(k, h)) / 3.0;
  return d;
}

ManufacturedCase ManufacturedCase::make(CaseTag tag, double a, double b, double s, Expr psi,
                                        int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (psi.dim() != 0 && psi.dim() != dim)
    throw std::invalid_argument("psi expression has the wrong dimension");
  ManufacturedCase mc;
  mc.tag_ = tag;
  mc.a_ = a;
  mc.b_ = b;
  mc.s_ = s;
  mc.dim_ = dim;
  mc.psi_ = std::move(psi);
  if (tag == CaseTag::log || tag == CaseTag::mixed) {
    if (s == 0.0) throw std::invalid_argument("s = 0 makes t^s log t unbounded");
  }
  const RootCondition rc = root_condition_c(a, b, s);
  mc.c_ = rc.c;
  if (rc.warning) mc.warnings_.push_back(*rc.warning);
  const bool integer = s == std::floor(s);
  if (tag == CaseTag::monomial && integer)
    mc.warnings_.push_back("integer s in the monomial case: the solution is smooth in t");
  if (tag == CaseTag::log && !integer)
    throw std::invalid_argument("the log case requires a positive integer s; use 'mixed'");
  if (tag == CaseTag::mixed && integer)
    mc.warnings_.push_back("integer s in the mixed case coincides with the log case");
  return mc;
}

double ManufacturedCase::u(const Point& p) const {
  const double t = p[dim_ - 1];
  if (t <= 0.0) return 0.0;
  const double psi = psi_.eval(std::span<const double>(p.data(), dim_));
  const double ts = std::pow(t, s_);
  return tag_ == CaseTag::monomial ? psi * ts : psi * ts * std::log(t);
}

double ManufacturedCase::f(const Point& p) const {
  const double t = p[dim_ - 1];
  if (t <= 0.0) return 0.0;
  const PsiDerivatives d = psi_derivatives(psi_, p, dim_);
  const double ts = std::pow(t, s_);
  // The root-condition term Q(s) psi t^s is kept so that f = L u holds
  // even when Q(s) is only zero up to rounding.
  const double smooth = root_residual() * d.value * ts +
                        t * ts * ((2.0 * a_ * s_ + b_) * d.dt + a_ * t * d.laplacian);
  if (tag_ == CaseTag::monomial) return smooth;
  return std::log(t) * smooth + ts * (log_coefficient() * d.value + 2.0 * a_ * t * d.dt);
}

double ManufacturedCase::u0(const Point&) const { return 0.0; }

double ManufacturedCase::dt_u(const Point& p) const {
  const double t = p[dim_ - 1];
  if (t <= 0.0) throw std::domain_error("dt_u is evaluated for t > 0 only");
  const PsiDerivatives d = psi_derivatives(psi_, p, dim_);
  const double ts = std::pow(t, s_);
  const double ts1 = std::pow(t, s_ - 1.0);
  if (tag_ == CaseTag::monomial) return d.dt * ts + s_ * d.value * ts1;
  const double lt = std::log(t);
  return d.dt * ts * lt + d.value * (s_ * ts1 * lt + ts1);
}

NormalTrace ManufacturedCase::exact_normal_trace() const {
  NormalTrace tr;
  if (s_ > 1.0) {
    tr.exists = true;
    tr.value = [](const Point&) { return 0.0; };
    return tr;
  }
  if (tag_ == CaseTag::monomial && s_ == 1.0) {
    tr.exists = true;
    const Expr psi = psi_;
    const int dim = dim_;
    tr.value = [psi, dim](const Point& p) {
      Point q = p;
      q[dim - 1] = 0.0;
      return psi.eval(std::span<const double>(q.data(), dim));
    };
    return tr;
  }
  tr.exists = false;
  tr.reason = tag_ == CaseTag::monomial
                  ? "t^s with s < 1 has an unbounded normal derivative"
                  : "t^s log t with s <= 1 has a logarithmic singularity in d_t u";
  return tr;
}

OperatorCoefficients ManufacturedCase::coefficients() const {
  return OperatorCoefficients::constant(dim_, a_, b_, c_);
}

nlohmann::json ManufacturedCase::descriptor() const {
  const NormalTrace tr = exact_normal_trace();
  return {{"case", to_string(tag_)},
          {"dim", dim_},
          {"a", a_},
          {"b", b_},
          {"c", c_},
          {"s", s_},
          {"psi", psi_.to_string()},
          {"root_residual", root_residual()},
          {"log_coefficient", log_coefficient()},
          {"normal_trace_exists", tr.exists},
          {"normal_trace_note", tr.reason},
          {"warnings", warnings_}};
}

FieldPair sample_pair(const ManufacturedCase& mc, std::shared_ptr<const Grid> grid) {
  if (grid->dim() != mc.dim()) throw std::invalid_argument("grid/case dimension mismatch");
  ScalarField u = ScalarField::sample(grid, [&](const Point& p) { return mc.u(p); });
  ScalarField f = ScalarField::sample(grid, [&](const Point& p) { return mc.f(p); });
  return {std::move(u), std::move(f)};
}

FieldPair case1_pair(double a, double b, double s, const Expr& psi,
                     std::shared_ptr<const Grid> grid) {
  const auto mc = ManufacturedCase::make(CaseTag::monomial, a, b, s, psi, grid->dim());
  return sample_pair(mc, std::move(grid));
}

FieldPair case2_pair(double a, double b, double s, const Expr& psi,
                     std::shared_ptr<const Grid> grid) {
  if (!(s > 0.0) || s != std::floor(s))
    throw std::invalid_argument("case 2 requires a positive integer s");
  const auto mc = ManufacturedCase::make(CaseTag::log, a, b, s, psi, grid->dim());
  return sample_pair(mc, std::move(grid));
}

}  // namespace degen
