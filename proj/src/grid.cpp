#include "degen/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace degen {

std::vector<double> fd_weights(double z, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size()) - 1;
  const int m = order;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

namespace {

Stencil make_stencil(std::span<const double> x, int i, int first, int count, int order) {
  Stencil s;
  s.first = first;
  s.count = count;
  auto w = fd_weights(x[i], x.subspan(first, count), order);
  std::copy(w.begin(), w.end(), s.w.begin());
  return s;
}

}  // namespace

Grid Grid::make(int dim, int n_tangential, int m_normal, double gamma) {
  if (dim != 2 && dim != 3) throw GridError("grid dimension must be 2 or 3");
  if (n_tangential < 4) throw GridError("tangential resolution N must be >= 4");
  if (m_normal < 4) throw GridError("normal resolution M must be >= 4");
  if (!(gamma >= 1.0) || !std::isfinite(gamma))
    throw GridError("grading exponent must be >= 1 (mesh may not coarsen toward t = 0)");

  Grid g;
  g.dim_ = dim;
  g.n_tangential_ = n_tangential;
  g.m_normal_ = m_normal;
  g.gamma_ = gamma;
  for (int a = 0; a < dim - 1; ++a) {
    auto& x = g.coords_[a];
    x.resize(n_tangential + 1);
    for (int i = 0; i <= n_tangential; ++i) x[i] = -1.0 + 2.0 * i / n_tangential;
    x.back() = 1.0;
  }
  auto& t = g.coords_[dim - 1];
  t.resize(m_normal + 1);
  for (int j = 0; j <= m_normal; ++j)
    t[j] = gamma == 1.0 ? static_cast<double>(j) / m_normal
                        : std::pow(static_cast<double>(j) / m_normal, gamma);
  t.front() = 0.0;
  t.back() = 1.0;

  std::size_t s = 1;
  for (int a = dim - 1; a >= 0; --a) {
    g.strides_[a] = s;
    s *= g.coords_[a].size();
  }
  g.node_count_ = s;
  g.build_stencils();
  return g;
}

void Grid::build_stencils() {
  for (int a = 0; a < dim_; ++a) {
    std::span<const double> x = coords_[a];
    const int n = static_cast<int>(x.size());
    d1_[a].resize(n);
    d2_[a].resize(n);
    for (int i = 0; i < n; ++i) {
      const int f1 = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
      d1_[a][i] = make_stencil(x, i, f1, 3, 1);
      if (i == 0)
        d2_[a][i] = make_stencil(x, i, 0, 4, 2);
      else if (i == n - 1)
        d2_[a][i] = make_stencil(x, i, n - 4, 4, 2);
      else
        d2_[a][i] = make_stencil(x, i, i - 1, 3, 2);
    }
  }
}

std::size_t Grid::index(const MultiIndex& idx) const {
  std::size_t k = 0;
  for (int a = 0; a < dim_; ++a) k += strides_[a] * static_cast<std::size_t>(idx[a]);
  return k;
}

MultiIndex Grid::unravel(std::size_t node) const {
  MultiIndex idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(node / strides_[a]);
    node %= strides_[a];
  }
  return idx;
}

Point Grid::point(std::size_t node) const {
  const MultiIndex idx = unravel(node);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = coords_[a][idx[a]];
  return p;
}

std::vector<Face> Grid::dirichlet_faces() const {
  std::vector<Face> faces;
  for (int a = 0; a < dim_ - 1; ++a) {
    faces.push_back({a, false});
    faces.push_back({a, true});
  }
  faces.push_back({dim_ - 1, true});
  return faces;
}

std::vector<std::size_t> Grid::face_nodes(const Face& face) const {
  if (face.axis < 0 || face.axis >= dim_) throw GridError("face axis out of range");
  const int fixed = face.upper ? axis_size(face.axis) - 1 : 0;
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < node_count_; ++k)
    if (unravel(k)[face.axis] == fixed) nodes.push_back(k);
  return nodes;
}

bool Grid::on_lateral_or_top(const MultiIndex& idx) const {
  for (int a = 0; a < dim_ - 1; ++a)
    if (idx[a] == 0 || idx[a] == axis_size(a) - 1) return true;
  return idx[dim_ - 1] == axis_size(dim_ - 1) - 1;
}

nlohmann::json Grid::to_json() const {
  return {{"dim", dim_}, {"gamma", gamma_}, {"N", n_tangential_}, {"M", m_normal_}};
}

Grid Grid::from_json(const nlohmann::json& j) {
  return make(j.at("dim").get<int>(), j.at("N").get<int>(), j.at("M").get<int>(),
              j.at("gamma").get<double>());
}

ScalarField::ScalarField(std::shared_ptr<const Grid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw GridError("field requires a grid");
  if (values_.size() != grid_->node_count())
    throw GridError("field value count does not match node count");
  for (double v : values_)
    if (!std::isfinite(v)) throw GridError("field values must be finite");
}

ScalarField ScalarField::sample(std::shared_ptr<const Grid> grid,
                                const std::function<double(const Point&)>& fn) {
  std::vector<double> v(grid->node_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid->point(k));
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField ScalarField::constant(std::shared_ptr<const Grid> grid, double value) {
  const std::size_t n = grid->node_count();
  return ScalarField(std::move(grid), std::vector<double>(n, value));
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double nodal_d1(const Grid& grid, std::span<const double> u, std::size_t node, int axis) {
  const MultiIndex idx = grid.unravel(node);
  const Stencil& s = grid.d1(axis, idx[axis]);
  const std::size_t base = node - grid.stride(axis) * idx[axis];
  double acc = 0.0;
  for (int q = 0; q < s.count; ++q) acc += s.w[q] * u[base + grid.stride(axis) * (s.first + q)];
  return acc;
}

double nodal_d2(const Grid& grid, std::span<const double> u, std::size_t node, int k, int l) {
  const MultiIndex idx = grid.unravel(node);
  if (k == l) {
    const Stencil& s = grid.d2(k, idx[k]);
    const std::size_t base = node - grid.stride(k) * idx[k];
    double acc = 0.0;
    for (int q = 0; q < s.count; ++q) acc += s.w[q] * u[base + grid.stride(k) * (s.first + q)];
    return acc;
  }
  // Tensor product of the two first-derivative stencils; symmetric in (k, l).
  const Stencil& sk = grid.d1(k, idx[k]);
  const Stencil& sl = grid.d1(l, idx[l]);
  const std::size_t base = node - grid.stride(k) * idx[k] - grid.stride(l) * idx[l];
  double acc = 0.0;
  for (int p = 0; p < sk.count; ++p)
    for (int q = 0; q < sl.count; ++q)
      acc += sk.w[p] * sl.w[q] *
             u[base + grid.stride(k) * (sk.first + p) + grid.stride(l) * (sl.first + q)];
  return acc;
}

std::vector<ScalarField> fd_gradient(const ScalarField& field) {
  const Grid& g = field.grid();
  std::vector<ScalarField> out;
  out.reserve(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    std::vector<double> d(g.node_count());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = nodal_d1(g, field.values(), k, a);
    out.emplace_back(field.grid_ptr(), std::move(d));
  }
  return out;
}

std::vector<std::vector<ScalarField>> fd_hessian(const ScalarField& field) {
  const Grid& g = field.grid();
  const int n = g.dim();
  std::vector<std::vector<ScalarField>> out(n);
  std::vector<std::vector<std::vector<double>>> h(n, std::vector<std::vector<double>>(n));
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      h[k][l].resize(g.node_count());
      for (std::size_t q = 0; q < g.node_count(); ++q)
        h[k][l][q] = nodal_d2(g, field.values(), q, k, l);
    }
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      out[k].emplace_back(field.grid_ptr(), k <= l ? h[k][l] : h[l][k]);
  return out;
}

double interpolate(const ScalarField& field, const Point& point) {
  const Grid& g = field.grid();
  const int n = g.dim();
  std::array<int, 3> cell{};
  std::array<double, 3> frac{};
  for (int a = 0; a < n; ++a) {
    auto x = g.coords(a);
    const double p = point[a];
    if (!(p >= x.front() && p <= x.back())) {
      std::ostringstream msg;
      msg << "interpolation point outside domain on axis " << a << ": " << p;
      throw GridError(msg.str());
    }
    auto it = std::upper_bound(x.begin(), x.end(), p);
    int i = static_cast<int>(it - x.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(x.size()) - 2);
    cell[a] = i;
    frac[a] = (p - x[i]) / (x[i + 1] - x[i]);
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    MultiIndex idx{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      const bool hi = (corner >> a) & 1;
      idx[a] = cell[a] + (hi ? 1 : 0);
      w *= hi ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) acc += w * field[g.index(idx)];
  }
  return acc;
}

void write_field_csv(std::ostream& os, const ScalarField& field) {
  const Grid& g = field.grid();
  os << std::setprecision(17);
  for (int a = 0; a < g.dim() - 1; ++a) os << 'x' << (a + 1) << ',';
  os << "t,value\n";
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point p = g.point(k);
    for (int a = 0; a < g.dim(); ++a) os << p[a] << ',';
    os << field[k] << '\n';
  }
}

ScalarField read_field_csv(std::istream& is, std::shared_ptr<const Grid> grid) {
  std::string line;
  if (!std::getline(is, line)) throw GridError("empty field CSV");
  std::vector<double> values;
  values.reserve(grid->node_count());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) throw GridError("malformed field CSV row: " + line);
    values.push_back(std::stod(line.substr(pos + 1)));
  }
  return ScalarField(std::move(grid), std::move(values));
}

}  // namespace degen
