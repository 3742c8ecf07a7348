#include "degen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace degen {

namespace {

nlohmann::json point_json(const Point& p, int dim) {
  return std::vector<double>(p.begin(), p.begin() + dim);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace

FitWindow default_window(const Grid& grid) {
  const auto t = grid.normal_coords();
  return {t[3], 0.1};
}

std::vector<double> window_levels(const Grid& grid, const FitWindow& window) {
  if (!(window.lo > 0.0 && window.lo < window.hi && window.hi <= 0.5))
    throw AnalysisError("fit window must satisfy 0 < lo < hi <= 0.5");
  const double slack = 1e-12 * window.hi;
  std::vector<double> levels;
  for (double t : grid.normal_coords())
    if (t >= window.lo - slack && t <= window.hi + slack) levels.push_back(t);
  return levels;
}

std::vector<double> normal_line(const ScalarField& field, const Point& anchor,
                                std::span<const double> levels) {
  const int n = field.grid().dim();
  std::vector<double> out;
  out.reserve(levels.size());
  for (double t : levels) {
    Point p = anchor;
    p[n - 1] = t;
    out.push_back(interpolate(field, p));
  }
  return out;
}

DecayFit fit_power_law(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  DecayFit fit;
  fit.t.assign(t.begin(), t.end());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = std::abs(y[i]);
    fit.values.push_back(v);
    if (v < kZeroDifference || !(t[i] > 0.0)) {
      ++fit.nodes_excluded;
      continue;
    }
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(v));
  }
  fit.nodes_used = static_cast<int>(lx.size());
  if (lx.empty() && !t.empty()) {
    fit.exact = true;
    fit.r_squared = 1.0;
    return fit;
  }
  if (fit.nodes_used < kMinFitNodes)
    throw AnalysisError("decay fit needs at least 6 usable nodes, got " +
                        std::to_string(fit.nodes_used));
  const LineFit lf = least_squares(lx, ly);
  fit.exponent = lf.slope;
  fit.constant = std::exp(lf.intercept);
  fit.r_squared = lf.r_squared;
  return fit;
}

nlohmann::json DecayFit::to_json() const {
  nlohmann::json j{{"operation", "decay_fit"},
                   {"quantity", quantity},
                   {"exact", exact},
                   {"window", {window.lo, window.hi}},
                   {"anchor", {anchor[0], anchor[1]}},
                   {"nodes_used", nodes_used},
                   {"nodes_excluded", nodes_excluded}};
  if (exact) {
    j["exponent"] = nullptr;
    j["constant"] = nullptr;
    j["r_squared"] = nullptr;
  } else {
    j["exponent"] = exponent;
    j["constant"] = constant;
    j["r_squared"] = r_squared;
  }
  return j;
}

DecayFit fit_boundary_decay(const ScalarField& u, const Point& anchor, std::optional<double> u0,
                            std::optional<FitWindow> window) {
  const Grid& g = u.grid();
  const FitWindow w = window.value_or(default_window(g));
  Point base = anchor;
  base[g.dim() - 1] = 0.0;
  const double ref = u0.value_or(interpolate(u, base));
  if (!std::isfinite(ref)) throw AnalysisError("boundary value u0 is not finite");
  const auto levels = window_levels(g, w);
  auto line = normal_line(u, base, levels);
  for (double& v : line) v -= ref;
  DecayFit fit = fit_power_law(levels, line);
  fit.quantity = "u - u0";
  fit.window = w;
  fit.anchor = base;
  return fit;
}

ScalarField weighted_gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  const auto grad = fd_gradient(u);
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (const auto& c : grad) s += c[k] * c[k];
    out[k] = g.t(k) * std::sqrt(s);
  }
  return ScalarField(u.grid_ptr(), std::move(out));
}

ScalarField weighted_hessian(const ScalarField& u) {
  const Grid& g = u.grid();
  const auto hess = fd_hessian(u);
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (const auto& row : hess)
      for (const auto& c : row) s += c[k] * c[k];
    const double t = g.t(k);
    out[k] = t * t * std::sqrt(s);
  }
  return ScalarField(u.grid_ptr(), std::move(out));
}

WeightedDecay weighted_derivative_decay(const ScalarField& u, const Point& anchor,
                                        std::optional<FitWindow> window) {
  const Grid& g = u.grid();
  const FitWindow w = window.value_or(default_window(g));
  Point base = anchor;
  base[g.dim() - 1] = 0.0;
  const auto levels = window_levels(g, w);
  const ScalarField wg = weighted_gradient(u);
  const ScalarField wh = weighted_hessian(u);

  WeightedDecay out;
  out.gradient = fit_power_law(levels, normal_line(wg, base, levels));
  out.gradient.quantity = "t|Du|";
  out.hessian = fit_power_law(levels, normal_line(wh, base, levels));
  out.hessian.quantity = "t^2|D^2u|";
  for (DecayFit* f : {&out.gradient, &out.hessian}) {
    f->window = w;
    f->anchor = base;
  }
  out.t_trace = g.normal_coords()[1];
  const double tr[1] = {out.t_trace};
  out.gradient_trace = normal_line(wg, base, tr)[0];
  out.hessian_trace = normal_line(wh, base, tr)[0];
  return out;
}

nlohmann::json WeightedDecay::to_json() const {
  return {{"operation", "weighted_derivative_decay"},
          {"gradient", gradient.to_json()},
          {"hessian", hessian.to_json()},
          {"t_trace", t_trace},
          {"gradient_trace", gradient_trace},
          {"hessian_trace", hessian_trace}};
}

Region Region::whole(const Grid& grid) {
  Region r;
  for (int a = 0; a < grid.dim(); ++a) {
    r.lo[a] = grid.coords(a).front();
    r.hi[a] = grid.coords(a).back();
  }
  return r;
}

bool Region::contains(const Point& p, int dim) const {
  for (int a = 0; a < dim; ++a)
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  return true;
}

nlohmann::json HolderEstimate::to_json(int dim) const {
  return {{"operation", "holder_seminorm"},
          {"alpha", alpha},
          {"value", value},
          {"lower_bound", true},
          {"lattice_pairs", lattice_pairs},
          {"random_pairs", random_pairs},
          {"seed", seed},
          {"x", point_json(x, dim)},
          {"y", point_json(y, dim)}};
}

namespace {

struct Best {
  double value = -1.0;
  std::uint64_t id = std::numeric_limits<std::uint64_t>::max();
  Point x{}, y{};

  void offer(double v, std::uint64_t pid, const Point& px, const Point& py) {
    if (v > value || (v == value && pid < id)) {
      value = v;
      id = pid;
      x = px;
      y = py;
    }
  }
  void merge(const Best& o) {
    if (o.id != std::numeric_limits<std::uint64_t>::max()) offer(o.value, o.id, o.x, o.y);
  }
};

double distance(const Point& x, const Point& y, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += (x[a] - y[a]) * (x[a] - y[a]);
  return std::sqrt(s);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

/// Node index ranges of a box region, per axis.
struct LatticeRanges {
  std::array<int, 3> lo{}, hi{};
  std::size_t count = 1;
};

LatticeRanges lattice_ranges(const Grid& g, const Region& region) {
  LatticeRanges r;
  for (int a = 0; a < g.dim(); ++a) {
    const auto x = g.coords(a);
    int lo = -1, hi = -1;
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
      if (x[i] >= region.lo[a] && x[i] <= region.hi[a]) {
        if (lo < 0) lo = i;
        hi = i;
      }
    }
    if (lo < 0) throw AnalysisError("region contains no grid nodes");
    r.lo[a] = lo;
    r.hi[a] = hi;
    r.count *= static_cast<std::size_t>(hi - lo + 1);
  }
  return r;
}

MultiIndex lattice_index(const LatticeRanges& r, int dim, std::size_t ordinal) {
  MultiIndex idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    const std::size_t len = static_cast<std::size_t>(r.hi[a] - r.lo[a] + 1);
    idx[a] = r.lo[a] + static_cast<int>(ordinal % len);
    ordinal /= len;
  }
  return idx;
}

/// Lattice pairs from one node: offsets 1, 2, 4, ... along each axis, then
/// the extreme pair. Ids are unique and ordered.
template <class Offer>
std::size_t lattice_pairs_from(const Grid& g, const LatticeRanges& r, std::span<const double> w,
                               double alpha, std::size_t ordinal, Offer&& offer) {
  const int n = g.dim();
  const MultiIndex idx = lattice_index(r, n, ordinal);
  const std::size_t node = g.index(idx);
  const Point px = g.point(node);
  std::size_t count = 0;
  for (int a = 0; a < n; ++a) {
    const int room = r.hi[a] - idx[a];
    int slot = 0;
    auto visit = [&](int off, int s) {
      MultiIndex jdx = idx;
      jdx[a] += off;
      const std::size_t other = g.index(jdx);
      const Point py = g.point(other);
      const double v = std::abs(w[node] - w[other]) / std::pow(distance(px, py, n), alpha);
      offer(v, (static_cast<std::uint64_t>(ordinal) * 3 + a) * 64 + s, px, py);
      ++count;
    };
    int off = 1;
    for (; off < room; off *= 2) visit(off, slot++);
    if (room > 0) visit(room, 63);
  }
  return count;
}

std::vector<std::pair<Point, Point>> random_pairs(const Region& region, int dim,
                                                  std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (int a = 0; a < dim; ++a) dist.emplace_back(region.lo[a], region.hi[a]);
  std::vector<std::pair<Point, Point>> out(count);
  for (auto& [x, y] : out) {
    for (int a = 0; a < dim; ++a) x[a] = dist[a](rng);
    for (int a = 0; a < dim; ++a) y[a] = dist[a](rng);
  }
  return out;
}

HolderEstimate finish(double alpha, const Best& best, std::size_t lattice, std::size_t random,
                      std::uint64_t seed) {
  HolderEstimate e;
  e.alpha = alpha;
  e.value = std::max(best.value, 0.0);
  e.x = best.x;
  e.y = best.y;
  e.lattice_pairs = lattice;
  e.random_pairs = random;
  e.seed = seed;
  return e;
}

constexpr std::uint64_t kRandomIdBase = std::uint64_t{1} << 62;

}  // namespace

HolderEstimate holder_seminorm(const ScalarField& field, double alpha, const Region& region,
                               std::size_t sample_pairs, std::uint64_t seed) {
  check_alpha(alpha);
  const Grid& g = field.grid();
  const int n = g.dim();
  const LatticeRanges r = lattice_ranges(g, region);
  const auto rp = random_pairs(region, n, sample_pairs, seed);
  const auto w = field.values();

  Best best;
  std::size_t lattice = 0, random = 0;
#pragma omp parallel
  {
    Best local;
    std::size_t lc = 0, rc = 0;
    auto offer = [&](double v, std::uint64_t id, const Point& x, const Point& y) {
      local.offer(v, id, x, y);
    };
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(r.count); ++k)
      lc += lattice_pairs_from(g, r, w, alpha, static_cast<std::size_t>(k), offer);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(rp.size()); ++k) {
      const auto& [x, y] = rp[k];
      const double d = distance(x, y, n);
      if (d == 0.0) continue;
      const double v = std::abs(interpolate(field, x) - interpolate(field, y)) / std::pow(d, alpha);
      local.offer(v, kRandomIdBase + static_cast<std::uint64_t>(k), x, y);
      ++rc;
    }
#pragma omp critical
    {
      best.merge(local);
      lattice += lc;
      random += rc;
    }
  }
  return finish(alpha, best, lattice, random, seed);
}

HolderEstimate holder_seminorm(const std::function<double(const Point&)>& fn, int dim,
                               double alpha, const Region& region, std::size_t sample_pairs,
                               std::uint64_t seed) {
  check_alpha(alpha);
  for (int a = 0; a < dim; ++a)
    if (!(region.lo[a] <= region.hi[a])) throw AnalysisError("empty region");
  if (sample_pairs == 0) throw AnalysisError("no sample pairs requested");
  const auto rp = random_pairs(region, dim, sample_pairs, seed);
  Best best;
  std::size_t random = 0;
  for (std::size_t k = 0; k < rp.size(); ++k) {
    const auto& [x, y] = rp[k];
    const double d = distance(x, y, dim);
    if (d == 0.0) continue;
    best.offer(std::abs(fn(x) - fn(y)) / std::pow(d, alpha), k, x, y);
    ++random;
  }
  return finish(alpha, best, 0, random, seed);
}

namespace serial {

HolderEstimate holder_seminorm(const ScalarField& field, double alpha, const Region& region,
                               std::size_t sample_pairs, std::uint64_t seed) {
  check_alpha(alpha);
  const Grid& g = field.grid();
  const int n = g.dim();
  const LatticeRanges r = lattice_ranges(g, region);
  const auto rp = random_pairs(region, n, sample_pairs, seed);
  const auto w = field.values();
  Best best;
  auto offer = [&](double v, std::uint64_t id, const Point& x, const Point& y) {
    best.offer(v, id, x, y);
  };
  std::size_t lattice = 0, random = 0;
  for (std::size_t k = 0; k < r.count; ++k)
    lattice += lattice_pairs_from(g, r, w, alpha, k, offer);
  for (std::size_t k = 0; k < rp.size(); ++k) {
    const auto& [x, y] = rp[k];
    const double d = distance(x, y, n);
    if (d == 0.0) continue;
    best.offer(std::abs(interpolate(field, x) - interpolate(field, y)) / std::pow(d, alpha),
               kRandomIdBase + k, x, y);
    ++random;
  }
  return finish(alpha, best, lattice, random, seed);
}

}  // namespace serial

namespace {

NormComponent tensor_component(const std::string& name, const std::vector<ScalarField>& fields,
                               double alpha, std::size_t pairs, std::uint64_t seed,
                               bool seminorm_counted) {
  NormComponent c;
  c.name = name;
  c.seminorm_counted = seminorm_counted;
  for (const auto& f : fields) {
    c.sup = std::max(c.sup, f.max_abs());
    const Region whole = Region::whole(f.grid());
    c.seminorm = std::max(c.seminorm, holder_seminorm(f, alpha, whole, pairs, seed).value);
  }
  return c;
}

ScalarField times_power_of_t(const ScalarField& f, int power) {
  const Grid& g = f.grid();
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::pow(g.t(k), power) * f[k];
  return ScalarField(f.grid_ptr(), std::move(out));
}

/// Distinct components of D^order u (order 1..3), symmetric entries once.
std::vector<ScalarField> derivatives(const ScalarField& u, int order) {
  const int n = u.grid().dim();
  if (order == 1) return fd_gradient(u);
  const auto hess = fd_hessian(u);
  std::vector<ScalarField> second;
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) second.push_back(hess[k][l]);
  if (order == 2) return second;
  std::vector<ScalarField> third;
  for (const auto& h : second)
    for (auto& g : fd_gradient(h)) third.push_back(std::move(g));
  return third;
}

std::vector<ScalarField> weighted(const std::vector<ScalarField>& fields, int power) {
  std::vector<ScalarField> out;
  for (const auto& f : fields) out.push_back(times_power_of_t(f, power));
  return out;
}

}  // namespace

WeightedNorm weighted_norm_C_k_alpha_2(const ScalarField& u, int k, double alpha,
                                       std::size_t sample_pairs, std::uint64_t seed) {
  if (k != 0 && k != 1) throw std::invalid_argument("weighted norm supports k = 0 or 1");
  check_alpha(alpha);
  WeightedNorm norm;
  norm.k = k;
  norm.alpha = alpha;
  norm.sample_pairs = sample_pairs;
  norm.seed = seed;
  norm.components.push_back(tensor_component("u", {u}, alpha, sample_pairs, seed, k == 0));
  if (k == 1)
    norm.components.push_back(
        tensor_component("Du", derivatives(u, 1), alpha, sample_pairs, seed, true));
  norm.components.push_back(tensor_component(k == 0 ? "tDu" : "tD2u",
                                             weighted(derivatives(u, k + 1), 1), alpha,
                                             sample_pairs, seed, true));
  norm.components.push_back(tensor_component(k == 0 ? "t2D2u" : "t2D3u",
                                             weighted(derivatives(u, k + 2), 2), alpha,
                                             sample_pairs, seed, true));
  for (const auto& c : norm.components) norm.value += c.sup + (c.seminorm_counted ? c.seminorm : 0.0);
  return norm;
}

nlohmann::json WeightedNorm::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components)
    comps.push_back({{"name", c.name},
                     {"sup", c.sup},
                     {"seminorm", c.seminorm},
                     {"seminorm_counted", c.seminorm_counted}});
  return {{"operation", "weighted_norm_C_k_alpha_2"},
          {"k", k},
          {"alpha", alpha},
          {"value", value},
          {"lower_bound", true},
          {"components", comps},
          {"sample_pairs", sample_pairs},
          {"seed", seed}};
}

RefinementStudy weighted_norm_refinement(const std::vector<ScalarField>& fields, int k,
                                         double alpha, std::size_t sample_pairs,
                                         std::uint64_t seed) {
  if (fields.size() < 2) throw AnalysisError("refinement study needs at least two grids");
  RefinementStudy study;
  for (const auto& f : fields)
    study.levels.push_back(weighted_norm_C_k_alpha_2(f, k, alpha, sample_pairs, seed));
  const std::size_t nc = study.levels.front().components.size();
  for (std::size_t c = 0; c < nc; ++c) {
    auto total = [&](const WeightedNorm& w) {
      const auto& comp = w.components[c];
      return comp.sup + (comp.seminorm_counted ? comp.seminorm : 0.0);
    };
    bool grows = true;
    for (std::size_t l = 1; l < study.levels.size(); ++l)
      if (!(total(study.levels[l]) >= 1.05 * total(study.levels[l - 1]))) grows = false;
    if (grows) study.diverging.push_back(study.levels.front().components[c].name);
  }
  return study;
}

nlohmann::json RefinementStudy::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) lv.push_back(l.to_json());
  return {{"operation", "weighted_norm_refinement"},
          {"levels", lv},
          {"diverging", diverging},
          {"divergence_flag", !diverging.empty()}};
}

NormalTraceCheck normal_trace_check(const OperatorCoefficients& coeffs, const ScalarField& u,
                               const ScalarField& f, double margin) {
  const Grid& g = u.grid();
  if (f.size() != u.size()) throw std::invalid_argument("u and f live on different grids");
  const int n = g.dim();
  const int tn = n - 1;

  NormalTraceCheck out;
  double worst_q1 = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    if (g.unravel(node)[tn] != 0) continue;
    const Point p = g.point(node);
    worst_q1 = std::max(worst_q1, coeffs.b(tn, p) + coeffs.c(p));
  }
  out.margin = -worst_q1;
  if (!(worst_q1 < -margin))
    throw ConditionError("b_n + c must be negative on t = 0 for the normal-derivative formula (max " +
                         std::to_string(worst_q1) + ")");

  const ScalarField cf = ScalarField::sample(u.grid_ptr(), [&](const Point& p) { return coeffs.c(p); });
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const MultiIndex idx = g.unravel(node);
    if (idx[tn] != 0) continue;
    bool lateral = false;
    for (int a = 0; a < tn; ++a)
      if (idx[a] == 0 || idx[a] == g.axis_size(a) - 1) lateral = true;
    if (lateral) continue;
    const Point p = g.point(node);
    double tangential = 0.0;
    for (int a = 0; a < tn; ++a) tangential += coeffs.b(a, p) * nodal_d1(g, u.values(), node, a);
    const double num = nodal_d1(g, f.values(), node, tn) -
                       nodal_d1(g, cf.values(), node, tn) * u[node] - tangential;
    const double u1 = num / (coeffs.b(tn, p) + coeffs.c(p));
    const double fd = nodal_d1(g, u.values(), node, tn);
    out.points.push_back(p);
    out.formula.push_back(u1);
    out.fd.push_back(fd);
    out.max_formula = std::max(out.max_formula, std::abs(u1));
    out.max_fd = std::max(out.max_fd, std::abs(fd));
    if (std::abs(u1 - fd) > out.max_discrepancy || out.points.size() == 1) {
      out.max_discrepancy = std::abs(u1 - fd);
      out.worst = p;
    }
  }
  if (out.points.empty()) throw AnalysisError("no interior boundary nodes");
  return out;
}

nlohmann::json NormalTraceCheck::to_json(int dim) const {
  return {{"operation", "normal_trace_check"},
          {"nodes", points.size()},
          {"max_discrepancy", max_discrepancy},
          {"max_formula", max_formula},
          {"max_fd", max_fd},
          {"worst", point_json(worst, dim)},
          {"margin", margin}};
}

TangentialBound tangential_bound_check(const ScalarField& u, const Region& inner) {
  const Grid& g = u.grid();
  const int n = g.dim();
  for (int a = 0; a < n - 1; ++a)
    if (!(inner.lo[a] > g.coords(a).front() && inner.hi[a] < g.coords(a).back()))
      throw AnalysisError("inner region must be separated from the lateral boundary");
  const auto grad = fd_gradient(u);
  TangentialBound out;
  bool first = true;
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const Point p = g.point(node);
    if (!inner.contains(p, n)) continue;
    double s = 0.0;
    for (int a = 0; a < n - 1; ++a) s += grad[a][node] * grad[a][node];
    s = std::sqrt(s);
    ++out.nodes;
    if (first || s > out.sup) {
      out.sup = s;
      out.at = p;
      first = false;
    }
  }
  if (out.nodes == 0) throw AnalysisError("inner region contains no grid nodes");
  return out;
}

nlohmann::json TangentialBound::to_json(int dim) const {
  return {{"operation", "tangential_bound_check"},
          {"sup", sup},
          {"at", point_json(at, dim)},
          {"nodes", nodes}};
}

LogFactor classify_log_factor(std::span<const double> t, std::span<const double> u, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("log-factor detection requires s > 0");
  if (t.size() != u.size()) throw std::invalid_argument("classify_log_factor: size mismatch");
  LogFactor out;
  out.s = s;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ts = std::pow(t[i], s);
    const double r = u[i] / ts;
    if (!(ts > std::numeric_limits<double>::min()) || !std::isfinite(r)) {
      out.excluded.push_back(t[i]);
      continue;
    }
    x.push_back(std::log(t[i]));
    y.push_back(r);
  }
  out.nodes_used = static_cast<int>(x.size());
  if (out.nodes_used < kMinFitNodes)
    throw AnalysisError("log-factor regression needs at least 6 usable nodes, got " +
                        std::to_string(out.nodes_used));
  const LineFit lf = least_squares(x, y);
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.r_squared = lf.r_squared;
  if (std::abs(out.slope) > kLogSlopeThreshold && out.r_squared >= kLogRSquared)
    out.verdict = "log";
  else if (std::abs(out.slope) <= kCleanSlope)
    out.verdict = "clean";
  else
    out.verdict = "inconclusive";
  return out;
}

LogFactor detect_log_factor(const ScalarField& u, const Point& anchor, double s,
                            std::optional<FitWindow> window) {
  const Grid& g = u.grid();
  const FitWindow w = window.value_or(default_window(g));
  if (w.hi > 0.2) throw AnalysisError("log-factor window must lie in (0, 0.2]");
  const auto levels = window_levels(g, w);
  LogFactor out = classify_log_factor(levels, normal_line(u, anchor, levels), s);
  out.window = w;
  return out;
}

nlohmann::json LogFactor::to_json() const {
  return {{"operation", "detect_log_factor"},
          {"s", s},
          {"slope", slope},
          {"intercept", intercept},
          {"r_squared", r_squared},
          {"verdict", verdict},
          {"nodes_used", nodes_used},
          {"excluded", excluded},
          {"window", {window.lo, window.hi}}};
}

void write_profile_csv(std::ostream& os, std::span<const double> t,
                       std::span<const double> values) {
  os << std::setprecision(17) << "t,value\n";
  for (std::size_t i = 0; i < t.size() && i < values.size(); ++i)
    os << t[i] << ',' << values[i] << '\n';
}

}  // namespace degen
