#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace smc {

/// Ambient vectors are stored in R^4; curves in R^3 leave the last slot zero.
using Vec = Eigen::Vector4d;

inline constexpr int kMinGridSize = 8;

/// Periodic structured parameter grid of intrinsic dimension 1 or 2.
/// Points are stored in row-major multi-index order (last index fastest).
struct Grid {
  int dim = 2;
  std::array<int, 2> shape{0, 1};
  std::array<double, 2> periods{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};

  static Grid line(int n, double period = 2.0 * std::numbers::pi) {
    return Grid{1, {n, 1}, {period, 1.0}};
  }
  static Grid plane(int n0, int n1, double p0 = 2.0 * std::numbers::pi,
                    double p1 = 2.0 * std::numbers::pi) {
    return Grid{2, {n0, n1}, {p0, p1}};
  }

  std::size_t size() const { return static_cast<std::size_t>(shape[0]) * shape[1]; }
  int ambient_dim() const { return dim + 2; }
  double spacing(int axis) const { return periods[axis] / shape[axis]; }
  /// Parameter-space volume of one cell (h0 for curves, h0*h1 for surfaces).
  double cell_volume() const { return dim == 1 ? spacing(0) : spacing(0) * spacing(1); }

  std::size_t index(int i, int j = 0) const {
    const int n0 = shape[0], n1 = shape[1];
    i = ((i % n0) + n0) % n0;
    j = ((j % n1) + n1) % n1;
    return static_cast<std::size_t>(i) * n1 + j;
  }
  std::array<int, 2> multi_index(std::size_t p) const {
    return {static_cast<int>(p / shape[1]), static_cast<int>(p % shape[1])};
  }
  /// Neighbor of p shifted by `offset` along `axis`, with wrap-around.
  std::size_t shifted(std::size_t p, int axis, int offset) const {
    auto [i, j] = multi_index(p);
    return axis == 0 ? index(i + offset, j) : index(i, j + offset);
  }
  double coordinate(std::size_t p, int axis) const {
    return multi_index(p)[axis] * spacing(axis);
  }

  bool operator==(const Grid&) const = default;
};

/// Sampled codimension-2 immersion of a periodic grid into R^{dim+2}.
struct GridImmersion {
  Grid grid;
  std::vector<Vec> points;

  int dim() const { return grid.dim; }
  int ambient_dim() const { return grid.ambient_dim(); }
};

template <class T>
using Field = std::vector<T>;
using ScalarField = Field<double>;
using NormalField = Field<Vec>;

}  // namespace smc
