#pragma once

// Reduced dynamics of S^m(a) x S^l(b) in R^{m+l+2} under the
// skew-mean-curvature flow: a' = -l/b, b' = m/a.

#include <array>
#include <string>
#include <vector>

#include "smcflow/grid.hpp"

namespace smc::sphere {

struct State {
  int m = 1;
  int l = 1;
  double a = 1.0;
  double b = 1.0;
  double t = 0.0;
};

/// (da/dt, db/dt). Throws InvalidInput for nonpositive radii or dimensions.
std::array<double, 2> ode_rhs(const State& s);

/// ab/(l-m) for m < l, +infinity otherwise.
double collapse_time(const State& s);

/// Exact state at time t (absolute). Throws CollapseError if t reaches the
/// collapse time.
State closed_form(const State& s0, double t);

double hamiltonian(const State& s);  ///< ln(a^m b^l)
double unit_sphere_volume(int k);    ///< 2 pi^{(k+1)/2} / Gamma((k+1)/2)
double volume_constant(int m, int l);
double volume(const State& s);       ///< C_{m,l} a^m b^l
double willmore(const State& s);     ///< (m^2/a^2 + l^2/b^2) volume
/// dW/dt along the flow; only defined (non-NaN) for m = l = 1.
double willmore_rate(const State& s);

enum class StopMode { Horizon, Collapse };

struct EvolveOptions {
  StopMode mode = StopMode::Horizon;
  double a_stop = 1e-3;  ///< collapse mode stops once a <= a_stop
  int stride = 1;        ///< record every stride-th accepted step
  double dt_min = 1e-15;
  /// Steps are halved while a < halving_factor * h * l / b, i.e. while fewer
  /// than that many steps of the current size would reach a = 0.
  double halving_factor = 10.0;
  bool throw_on_abort = true;  ///< false: return the states accepted so far
};

struct Trajectory {
  std::vector<State> states;  ///< first entry is s0, last is the final state
  bool collapsed = false;     ///< collapse mode reached a <= a_stop
  int steps = 0;
  int halvings = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// RK4 with step halving near collapse (see EvolveOptions::halving_factor). Horizon
/// mode integrates to t = T exactly; collapse mode ignores T past the stop.
/// Throws NumericalAbort on step underflow or loss of monotonicity.
Trajectory evolve_numeric(const State& s0, double dt, double T, const EvolveOptions& opts = {});

struct SeriesRow {
  double t, a, b, hamiltonian, volume, willmore, dW_dt;
};
std::vector<SeriesRow> willmore_series(const State& s0, const std::vector<double>& times);
SeriesRow series_row(const State& s);

/// Torus product (a, b) on a grid; only m = l = 1 has a pole-free grid.
GridImmersion embed(const State& s, std::array<int, 2> shape);

}  // namespace smc::sphere
