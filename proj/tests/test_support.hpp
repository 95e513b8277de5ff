#pragma once

// Analytic oracles and small numerical helpers shared by the test suites.
// Nothing here calls into the code paths under test except to read grids.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "smcflow/grid.hpp"

namespace smc::testing {

inline constexpr double kPi = std::numbers::pi;

/// Outer unit normals of the two circle factors of a torus product.
inline Vec torus_n1(const Grid& g, std::size_t p) {
  const double th = g.coordinate(p, 0);
  return Vec(std::cos(th), std::sin(th), 0.0, 0.0);
}
inline Vec torus_n2(const Grid& g, std::size_t p) {
  const double ph = g.coordinate(p, 1);
  return Vec(0.0, 0.0, std::cos(ph), std::sin(ph));
}

/// Observed convergence order from errors at grids refined by factor 2.
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

template <class T>
double max_norm(const std::vector<T>& v) {
  double m = 0.0;
  for (const auto& x : v) {
    if constexpr (std::is_arithmetic_v<T>)
      m = std::max(m, std::abs(x));
    else
      m = std::max(m, x.norm());
  }
  return m;
}

/// Smooth random ambient vector field: a handful of low Fourier modes with
/// Gaussian vector coefficients.
inline std::vector<Vec> random_smooth_field(const Grid& g, std::mt19937_64& rng, int max_mode = 2) {
  std::normal_distribution<double> normal(0.0, 1.0);
  struct Mode {
    int k0, k1;
    Vec c, s;
  };
  std::vector<Mode> modes;
  const int m1 = g.dim == 2 ? max_mode : 0;
  for (int k0 = 0; k0 <= max_mode; ++k0)
    for (int k1 = -m1; k1 <= m1; ++k1) {
      Vec c, s;
      for (int i = 0; i < 4; ++i) {
        c[i] = normal(rng);
        s[i] = normal(rng);
      }
      if (g.dim == 1) c[3] = s[3] = 0.0;
      const double damp = 1.0 / (1.0 + k0 * k0 + k1 * k1);
      modes.push_back({k0, k1, damp * c, damp * s});
    }
  std::vector<Vec> out(g.size(), Vec::Zero());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double u0 = 2.0 * kPi * g.multi_index(p)[0] / g.shape[0];
    const double u1 = g.dim == 2 ? 2.0 * kPi * g.multi_index(p)[1] / g.shape[1] : 0.0;
    for (const auto& m : modes) {
      const double arg = m.k0 * u0 + m.k1 * u1;
      out[p] += std::cos(arg) * m.c + std::sin(arg) * m.s;
    }
  }
  return out;
}

}  // namespace smc::testing
