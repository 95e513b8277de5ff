#pragma once

#include <stdexcept>

#include "smcflow/grid.hpp"

namespace smc::fd {

// Centered periodic stencils. Order 2 uses the 3-point stencils, order 4 the
// 5-point ones. T is any vector-space type (double, Eigen vectors).

inline void check_order(int order) {
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
}

template <class T>
Field<T> diff(const Grid& grid, const Field<T>& f, int axis, int order = 2) {
  check_order(order);
  const double h = grid.spacing(axis);
  Field<T> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) {
    const T& fp1 = f[grid.shifted(p, axis, 1)];
    const T& fm1 = f[grid.shifted(p, axis, -1)];
    if (order == 2) {
      out[p] = (fp1 - fm1) / (2.0 * h);
    } else {
      const T& fp2 = f[grid.shifted(p, axis, 2)];
      const T& fm2 = f[grid.shifted(p, axis, -2)];
      out[p] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    }
  }
  return out;
}

template <class T>
Field<T> diff2(const Grid& grid, const Field<T>& f, int axis, int order = 2) {
  check_order(order);
  const double h = grid.spacing(axis);
  Field<T> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) {
    const T& fp1 = f[grid.shifted(p, axis, 1)];
    const T& fm1 = f[grid.shifted(p, axis, -1)];
    if (order == 2) {
      out[p] = (fp1 - 2.0 * f[p] + fm1) / (h * h);
    } else {
      const T& fp2 = f[grid.shifted(p, axis, 2)];
      const T& fm2 = f[grid.shifted(p, axis, -2)];
      out[p] = (16.0 * (fp1 + fm1) - (fp2 + fm2) - 30.0 * f[p]) / (12.0 * h * h);
    }
  }
  return out;
}

/// Second derivative d_a d_b; compact stencil on the diagonal, nested first
/// differences off the diagonal.
template <class T>
Field<T> mixed(const Grid& grid, const Field<T>& f, int a, int b, int order = 2) {
  if (a == b) return diff2(grid, f, a, order);
  return diff(grid, diff(grid, f, b, order), a, order);
}

}  // namespace smc::fd
