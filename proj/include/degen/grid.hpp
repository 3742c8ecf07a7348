#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace degen {

/// Coordinates (x1, ..., x_{n-1}, t); only the first `dim` entries are used.
using Point = std::array<double, 3>;
using MultiIndex = std::array<int, 3>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite-difference stencil on one axis: `count` consecutive nodes starting at `first`.
struct Stencil {
  int first = 0;
  int count = 0;
  std::array<double, 4> w{};
};

/// Fornberg weights for the `order`-th derivative at `z` using the nodes `x`.
std::vector<double> fd_weights(double z, std::span<const double> x, int order);

/// A boundary face of the half-cube. The bottom face t = 0 is never a Dirichlet
/// face; its rows are determined by the equation.
struct Face {
  int axis = 0;
  bool upper = false;
  bool operator==(const Face&) const = default;
};

/// Tensor-product mesh over [-1,1]^{n-1} x [0,1], graded toward t = 0 by
/// t_j = (j/M)^gamma. Nodes are ordered lexicographically with the normal
/// index running fastest.
class Grid {
 public:
  static Grid make(int dim, int n_tangential, int m_normal, double gamma);

  int dim() const { return dim_; }
  int n_tangential() const { return n_tangential_; }
  int m_normal() const { return m_normal_; }
  double gamma() const { return gamma_; }
  int normal_axis() const { return dim_ - 1; }

  std::span<const double> coords(int axis) const { return coords_[axis]; }
  std::span<const double> normal_coords() const { return coords_[dim_ - 1]; }
  int axis_size(int axis) const { return static_cast<int>(coords_[axis].size()); }
  std::size_t stride(int axis) const { return strides_[axis]; }
  std::size_t node_count() const { return node_count_; }

  std::size_t index(const MultiIndex& idx) const;
  MultiIndex unravel(std::size_t node) const;
  Point point(std::size_t node) const;
  double t(std::size_t node) const { return coords_[dim_ - 1][node % coords_[dim_ - 1].size()]; }

  /// Lateral and top faces, in a fixed order.
  std::vector<Face> dirichlet_faces() const;
  std::vector<std::size_t> face_nodes(const Face& face) const;
  bool on_lateral_or_top(const MultiIndex& idx) const;

  /// Second-order first-derivative stencil (central inside, one-sided at the ends).
  const Stencil& d1(int axis, int i) const { return d1_[axis][i]; }
  /// Second-derivative stencil (3-point inside, 4-point one-sided at the ends).
  const Stencil& d2(int axis, int i) const { return d2_[axis][i]; }

  nlohmann::json to_json() const;
  static Grid from_json(const nlohmann::json& j);

 private:
  Grid() = default;
  void build_stencils();

  int dim_ = 2;
  int n_tangential_ = 0;
  int m_normal_ = 0;
  double gamma_ = 1.0;
  std::array<std::vector<double>, 3> coords_;
  std::array<std::size_t, 3> strides_{};
  std::size_t node_count_ = 0;
  std::array<std::vector<Stencil>, 3> d1_;
  std::array<std::vector<Stencil>, 3> d2_;
};

/// Nodal values of a function on a grid. Values are finite.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const Grid> grid, std::vector<double> values);

  static ScalarField sample(std::shared_ptr<const Grid> grid,
                            const std::function<double(const Point&)>& fn);
  static ScalarField constant(std::shared_ptr<const Grid> grid, double value);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }
  std::size_t size() const { return values_.size(); }
  double max_abs() const;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

std::vector<ScalarField> fd_gradient(const ScalarField& field);
std::vector<std::vector<ScalarField>> fd_hessian(const ScalarField& field);

/// Nodal first/second derivatives at one node, same stencils as fd_gradient/fd_hessian.
double nodal_d1(const Grid& grid, std::span<const double> u, std::size_t node, int axis);
double nodal_d2(const Grid& grid, std::span<const double> u, std::size_t node, int k, int l);

/// Multilinear interpolation; throws GridError outside the closed domain.
double interpolate(const ScalarField& field, const Point& point);

/// One row per node: coordinates then value, 17 significant digits.
void write_field_csv(std::ostream& os, const ScalarField& field);
ScalarField read_field_csv(std::istream& is, std::shared_ptr<const Grid> grid);

}  // namespace degen
