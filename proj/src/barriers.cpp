#include "degen/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace degen {

namespace {

struct SupNorms {
  double a_tn = 0.0;     // sup |(a_{alpha n})_alpha|
  double a_tt = 0.0;     // sup spectral norm of the tangential block
  double trace_tt = 0.0; // sup |sum_alpha a_{alpha alpha}|
  double b_t = 0.0;      // sup |(b_alpha)_alpha|
  double mix = 0.0;      // sup |(2 sigma + 1) a_nn + b_n|
  double a_nn = 0.0;
  double sup_q_sigma = -std::numeric_limits<double>::infinity();
  double sup_q_mu = -std::numeric_limits<double>::infinity();
};

SupNorms sample_norms(const OperatorCoefficients& coeffs, const Grid& grid, double sigma,
                      double mu) {
  const int n = coeffs.dim();
  const int nn = n - 1;
  SupNorms s;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.point(k);
    double tn = 0.0, bt = 0.0, tr = 0.0;
    for (int al = 0; al < nn; ++al) {
      const double v = coeffs.a(al, nn, p);
      tn += v * v;
      const double b = coeffs.b(al, p);
      bt += b * b;
      tr += coeffs.a(al, al, p);
    }
    s.a_tn = std::max(s.a_tn, std::sqrt(tn));
    s.b_t = std::max(s.b_t, std::sqrt(bt));
    s.trace_tt = std::max(s.trace_tt, std::abs(tr));
    if (nn == 1) {
      s.a_tt = std::max(s.a_tt, std::abs(coeffs.a(0, 0, p)));
    } else {
      const double m[4] = {coeffs.a(0, 0, p), coeffs.a(0, 1, p), coeffs.a(1, 0, p),
                           coeffs.a(1, 1, p)};
      const auto e = symmetric_eigenvalues(m, 2);
      s.a_tt = std::max(s.a_tt, std::max(std::abs(e[0]), std::abs(e[1])));
    }
    const double ann = coeffs.a(nn, nn, p);
    s.a_nn = std::max(s.a_nn, std::abs(ann));
    s.mix = std::max(s.mix, std::abs((2.0 * sigma + 1.0) * ann + coeffs.b(nn, p)));
    s.sup_q_sigma = std::max(s.sup_q_sigma, eval_Q(coeffs, p, sigma));
    s.sup_q_mu = std::max(s.sup_q_mu, eval_Q(coeffs, p, mu));
  }
  return s;
}

}  // namespace

BarrierSpec construct_barrier(const OperatorCoefficients& coeffs, const Grid& grid, double sigma,
                              double mu) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("barrier requires sigma >= 0");
  if (!(mu > sigma)) throw std::invalid_argument("barrier requires mu > sigma");
  const SupNorms nrm = sample_norms(coeffs, grid, sigma, mu);

  BarrierSpec spec;
  spec.sigma = sigma;
  spec.mu = mu;
  spec.c_sigma = -nrm.sup_q_sigma;
  spec.c_mu = -nrm.sup_q_mu;
  if (!(spec.c_sigma > 0.0) || !(spec.c_mu > 0.0))
    throw ConditionError("barrier margins must be positive: c_sigma = " +
                         std::to_string(spec.c_sigma) + ", c_mu = " + std::to_string(spec.c_mu));

  const double d = mu - sigma;
  const double dd2 = std::abs(d * (d - 2.0));
  auto& audit = spec.audit;

  // I2 = d(d-2) t^2 (2 eps a_{an} x_a t + eps^2 a_{ab} x_a x_b)
  //    + d E (eps a_{aa} t^2 + eps (2 sigma a_{an} + b_a) t x_a),  E = eps|x'|^2 + t^2.
  // With sqrt(eps)|x'| t <= E/2, eps|x'|^2 <= E, t^2 <= E and eps <= 1:
  //   |d(d-2) 2 eps a_{an} x_a t^3|       <= sqrt(eps) |d(d-2)| |a_{.n}| E^2
  const double t1 = dd2 * nrm.a_tn;
  audit.push_back({"I2: |d(d-2)| sup|a_{alpha n}|", t1});
  //   |d(d-2) eps^2 a_{ab} x_a x_b t^2|   <= sqrt(eps) |d(d-2)| |a'| E^2
  const double t2 = dd2 * nrm.a_tt;
  audit.push_back({"I2: |d(d-2)| sup|a'| (tangential block)", t2});
  //   |d eps a_{aa} t^2 E|                <= sqrt(eps) d |tr a'| E^2
  const double t3 = d * nrm.trace_tt;
  audit.push_back({"I2: d sup|tr a'|", t3});
  //   |d eps (2 sigma a_{an} + b_a) x_a t E| <= sqrt(eps) d (2 sigma |a_{.n}| + |b'|)/2 E^2
  const double t4 = 0.5 * d * (2.0 * sigma * nrm.a_tn + nrm.b_t);
  audit.push_back({"I2: d (2 sigma sup|a_{alpha n}| + sup|b'|)/2", t4});
  spec.C1 = t1 + t2 + t3 + t4;

  // I1 = d(d-2) a_nn t^4 + Q(sigma) E^2 + d((2 sigma+1) a_nn + b_n) t^2 E.
  // Q(sigma) <= -c_sigma; Cauchy with weight eta = c_sigma/(8 d B):
  //   d B t^2 E <= (c_sigma/8) E^2 + 2 (d B)^2 / c_sigma t^4,  B = sup|(2 sigma+1) a_nn + b_n|.
  const double s1 = dd2 * nrm.a_nn;
  audit.push_back({"I1: |d(d-2)| sup|a_nn|", s1});
  const double dB = d * nrm.mix;
  const double s2 = 2.0 * dB * dB / spec.c_sigma;
  audit.push_back({"I1: 2 (d sup|(2 sigma+1) a_nn + b_n|)^2 / c_sigma", s2});
  spec.C2 = s1 + s2;

  // C1 sqrt(eps) <= c_sigma/8 turns -7/8 c_sigma into -3/4 c_sigma.
  spec.eps = spec.C1 > 0.0 ? std::min(1.0, std::pow(spec.c_sigma / (8.0 * spec.C1), 2)) : 1.0;
  // C2 delta^4 = c_sigma/4 gives -1/2 c_sigma where t <= delta E^{1/2}.
  // t <= E^{1/2} always, so delta >= 1 leaves nothing for K to cover.
  if (spec.C2 > 0.0)
    spec.delta_split = std::min(1.0, std::pow(spec.c_sigma / (4.0 * spec.C2), 0.25));
  else
    spec.delta_split = 1.0;
  spec.K = spec.C2 > 0.0 ? spec.C2 / (spec.c_mu * std::pow(spec.delta_split, d)) : 0.0;
  audit.push_back({"C1", spec.C1});
  audit.push_back({"C2", spec.C2});
  return spec;
}

nlohmann::json BarrierSpec::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : audit) steps.push_back({{"term", s.term}, {"value", s.value}});
  return {{"sigma", sigma},
          {"mu", mu},
          {"eps", eps},
          {"K", K},
          {"c_sigma", c_sigma},
          {"c_mu", c_mu},
          {"C1", C1},
          {"C2", C2},
          {"delta_split", delta_split},
          {"bounds", steps},
          {"note",
           "C1 includes the 2*sigma*a_{alpha n} term, so it depends on sigma as well as on mu "
           "and the coefficient sup norms"}};
}

double barrier_weight(const BarrierSpec& spec, const Point& p, int dim) {
  const double t = p[dim - 1];
  double xx = 0.0;
  for (int a = 0; a < dim - 1; ++a) xx += p[a] * p[a];
  const double E = spec.eps * xx + t * t;
  return std::pow(t, spec.sigma) * std::pow(E, 0.5 * (spec.mu - spec.sigma));
}

BarrierValue eval_barrier(const BarrierSpec& spec, const Point& p, int dim) {
  const int nn = dim - 1;
  const double t = p[nn];
  if (!(t > 0.0)) throw std::domain_error("barrier derivatives require t > 0");
  const double sg = spec.sigma;
  const double pw = 0.5 * (spec.mu - spec.sigma);

  std::array<double, 3> dE{};
  double E = t * t;
  for (int a = 0; a < nn; ++a) {
    E += spec.eps * p[a] * p[a];
    dE[a] = 2.0 * spec.eps * p[a];
  }
  dE[nn] = 2.0 * t;

  // g = t^sigma, h = E^pw.
  const double g = std::pow(t, sg);
  const double gt = sg == 0.0 ? 0.0 : sg * std::pow(t, sg - 1.0);
  const double gtt = (sg == 0.0 || sg == 1.0) ? 0.0 : sg * (sg - 1.0) * std::pow(t, sg - 2.0);
  const double h = std::pow(E, pw);
  const double h1 = pw * std::pow(E, pw - 1.0);
  const double h2 = pw * (pw - 1.0) * std::pow(E, pw - 2.0);

  BarrierValue v;
  v.value = g * h;
  std::array<double, 3> dh{};
  for (int i = 0; i < dim; ++i) dh[i] = h1 * dE[i];
  for (int i = 0; i < dim; ++i) v.grad[i] = g * dh[i] + (i == nn ? gt * h : 0.0);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double ddE = i != j ? 0.0 : (i == nn ? 2.0 : 2.0 * spec.eps);
      const double hij = h2 * dE[i] * dE[j] + h1 * ddE;
      double val = g * hij;
      if (i == nn) val += gt * dh[j];
      if (j == nn) val += gt * dh[i];
      if (i == nn && j == nn) val += gtt * h;
      v.hess[i][j] = val;
    }

  if (spec.K != 0.0) {
    const double m = spec.mu;
    v.value += spec.K * std::pow(t, m);
    v.grad[nn] += spec.K * m * std::pow(t, m - 1.0);
    if (m != 1.0) v.hess[nn][nn] += spec.K * m * (m - 1.0) * std::pow(t, m - 2.0);
  }
  return v;
}

double apply_operator_to_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                 const Point& p) {
  const int n = coeffs.dim();
  const BarrierValue v = eval_barrier(spec, p, n);
  const double t = p[n - 1];
  double second = 0.0, first = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) second += coeffs.a(i, j, p) * v.hess[i][j];
    first += coeffs.b(i, p) * v.grad[i];
  }
  return t * t * second + t * first + coeffs.c(p) * v.value;
}

std::vector<Point> barrier_sample(int dim, int tangential_per_axis, int normal_levels,
                                  double t_min) {
  if (tangential_per_axis < 2 || normal_levels < 2 || !(t_min > 0.0) || t_min >= 1.0)
    throw std::invalid_argument("invalid barrier sample parameters");
  std::vector<double> xs(tangential_per_axis), ts(normal_levels);
  for (int i = 0; i < tangential_per_axis; ++i)
    xs[i] = -1.0 + 2.0 * i / (tangential_per_axis - 1);
  const double lmin = std::log(t_min);
  for (int j = 0; j < normal_levels; ++j)
    ts[j] = std::exp(lmin * (1.0 - static_cast<double>(j) / (normal_levels - 1)));
  ts.front() = t_min;
  ts.back() = 1.0;
  std::vector<Point> pts;
  if (dim == 2) {
    pts.reserve(xs.size() * ts.size());
    for (double x : xs)
      for (double t : ts) pts.push_back({x, t, 0.0});
  } else {
    pts.reserve(xs.size() * xs.size() * ts.size());
    for (double x : xs)
      for (double y : xs)
        for (double t : ts) pts.push_back({x, y, t});
  }
  return pts;
}

nlohmann::json BarrierCertificate::to_json() const {
  return {{"sigma", sigma},
          {"mu", mu},
          {"eps", eps},
          {"K", K},
          {"c_sigma", c_sigma},
          {"c_mu", c_mu},
          {"worst_ratio", worst_ratio},
          {"worst_point", std::vector<double>(worst_point.begin(), worst_point.begin() + dim)},
          {"sample_size", sample_size},
          {"threshold", threshold},
          {"t_min", t_min},
          {"passed", passed},
          {"method", "dense sampling with analytic derivatives (not a formal proof)"}};
}

namespace {

BarrierCertificate make_certificate(const BarrierSpec& spec, std::span<const Point> sample,
                                    int dim) {
  BarrierCertificate cert;
  cert.sigma = spec.sigma;
  cert.mu = spec.mu;
  cert.eps = spec.eps;
  cert.K = spec.K;
  cert.c_sigma = spec.c_sigma;
  cert.c_mu = spec.c_mu;
  cert.threshold = -0.5 * spec.c_sigma;
  cert.sample_size = sample.size();
  cert.dim = dim;
  cert.t_min = std::numeric_limits<double>::infinity();
  for (const Point& p : sample) cert.t_min = std::min(cert.t_min, p[dim - 1]);
  return cert;
}

}  // namespace

BarrierCertificate verify_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                  std::span<const Point> sample) {
  const int dim = coeffs.dim();
  BarrierCertificate cert = make_certificate(spec, sample, dim);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(sample.size());
  double worst = -std::numeric_limits<double>::infinity();
  std::ptrdiff_t worst_at = -1;
#pragma omp parallel
  {
    double local = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t local_at = -1;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const Point& p = sample[k];
      double r = apply_operator_to_barrier(coeffs, spec, p) / barrier_weight(spec, p, dim);
      if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
      if (r > local) {
        local = r;
        local_at = k;
      }
    }
#pragma omp critical(degen_barrier_worst)
    if (local_at >= 0 && (local > worst || (local == worst && local_at < worst_at))) {
      worst = local;
      worst_at = local_at;
    }
  }
  cert.worst_ratio = worst;
  if (worst_at >= 0) cert.worst_point = sample[worst_at];
  cert.passed = worst_at >= 0 && worst <= cert.threshold;
  return cert;
}

namespace serial {

BarrierCertificate verify_barrier(const OperatorCoefficients& coeffs, const BarrierSpec& spec,
                                  std::span<const Point> sample) {
  const int dim = coeffs.dim();
  BarrierCertificate cert = make_certificate(spec, sample, dim);
  double worst = -std::numeric_limits<double>::infinity();
  std::ptrdiff_t worst_at = -1;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    double r = apply_operator_to_barrier(coeffs, spec, sample[k]) /
               barrier_weight(spec, sample[k], dim);
    if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
    if (r > worst) {
      worst = r;
      worst_at = static_cast<std::ptrdiff_t>(k);
    }
  }
  cert.worst_ratio = worst;
  if (worst_at >= 0) cert.worst_point = sample[worst_at];
  cert.passed = worst_at >= 0 && worst <= cert.threshold;
  return cert;
}

}  // namespace serial

}  // namespace degen
