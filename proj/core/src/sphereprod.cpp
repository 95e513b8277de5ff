#include "smcflow/sphereprod.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "smcflow/errors.hpp"
#include "smcflow/immersion.hpp"

namespace smc::sphere {

namespace {

void check(const State& s) {
  if (s.m < 1 || s.l < 1) throw InvalidInput("sphere dimensions must be >= 1");
  if (!(s.a > 0.0) || !(s.b > 0.0)) throw InvalidInput("sphere radii must be positive");
}

}  // namespace

std::array<double, 2> ode_rhs(const State& s) {
  check(s);
  return {-s.l / s.b, s.m / s.a};
}

double collapse_time(const State& s) {
  check(s);
  if (s.m >= s.l) return std::numeric_limits<double>::infinity();
  return s.t + s.a * s.b / (s.l - s.m);
}

State closed_form(const State& s0, double t) {
  check(s0);
  const double tc = collapse_time(s0);
  if (t >= tc) throw CollapseError(tc, t);
  const double m = s0.m, l = s0.l, a = s0.a, b = s0.b;
  const double dt = t - s0.t;
  State s = s0;
  s.t = t;
  if (s0.m == s0.l) {
    const double rate = l * dt / (a * b);
    s.a = a * std::exp(-rate);
    s.b = b * std::exp(rate);
    return s;
  }
  s.a = std::pow(a, m / (m - l)) * std::pow(a - (l - m) * dt / b, l / (l - m));
  // a^m b^l is conserved
  s.b = b * std::pow(a / s.a, m / l);
  return s;
}

double hamiltonian(const State& s) {
  check(s);
  return s.m * std::log(s.a) + s.l * std::log(s.b);
}

double unit_sphere_volume(int k) {
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double volume_constant(int m, int l) { return unit_sphere_volume(m) * unit_sphere_volume(l); }

double volume(const State& s) {
  check(s);
  return volume_constant(s.m, s.l) * std::pow(s.a, s.m) * std::pow(s.b, s.l);
}

double willmore(const State& s) {
  const double k = double(s.m * s.m) / (s.a * s.a) + double(s.l * s.l) / (s.b * s.b);
  return k * volume(s);
}

double willmore_rate(const State& s) {
  check(s);
  if (s.m != 1 || s.l != 1) return std::nan("");
  return 8.0 * std::numbers::pi * std::numbers::pi * (1.0 / (s.a * s.a) - 1.0 / (s.b * s.b));
}

namespace {

void abort_or_throw(Trajectory& traj, const State& last, const NumericalAbort& e,
                    const EvolveOptions& opts) {
  if (opts.throw_on_abort) throw e;
  if (traj.states.back().t != last.t) traj.states.push_back(last);
  traj.aborted = true;
  traj.abort_reason = e.what();
}

}  // namespace

Trajectory evolve_numeric(const State& s0, double dt, double T, const EvolveOptions& opts) {
  check(s0);
  if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
  if (opts.stride < 1) throw InvalidInput("stride must be >= 1");
  const bool to_collapse = opts.mode == StopMode::Collapse;
  if (!to_collapse && !(T >= s0.t)) throw InvalidInput("T must not precede the initial time");
  if (to_collapse && !(opts.a_stop > 0.0)) throw InvalidInput("a_stop must be positive");
  if (!(opts.halving_factor >= 1.0)) throw InvalidInput("halving_factor must be at least 1");

  Trajectory traj;
  traj.states.push_back(s0);
  State s = s0;
  auto f = [&](double a, double b) { return std::array<double, 2>{-s.l / b, s.m / a}; };

  while (true) {
    if (to_collapse ? s.a <= opts.a_stop : s.t >= T - 1e-9 * dt) break;
    double h = dt;
    if (!to_collapse) h = std::min(h, T - s.t);
    while (s.a < opts.halving_factor * h * s.l / s.b) {
      h *= 0.5;
      ++traj.halvings;
    }
    if (h < opts.dt_min) {
      abort_or_throw(traj, s, NumericalAbort("sphere-product step underflow", s.t), opts);
      return traj;
    }

    const auto k1 = f(s.a, s.b);
    const auto k2 = f(s.a + 0.5 * h * k1[0], s.b + 0.5 * h * k1[1]);
    const auto k3 = f(s.a + 0.5 * h * k2[0], s.b + 0.5 * h * k2[1]);
    const auto k4 = f(s.a + h * k3[0], s.b + h * k3[1]);
    State next = s;
    next.a += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    next.b += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    next.t = (!to_collapse && s.t + h >= T - 1e-9 * dt) ? T : s.t + h;
    if (!(next.a > 0.0) || !(next.a < s.a) || !(next.b > s.b)) {
      abort_or_throw(traj, s, NumericalAbort("sphere-product step lost monotonicity", s.t), opts);
      return traj;
    }
    s = next;
    ++traj.steps;
    if (traj.steps % opts.stride == 0) traj.states.push_back(s);
  }
  if (traj.states.back().t != s.t) traj.states.push_back(s);
  traj.collapsed = to_collapse;
  return traj;
}

SeriesRow series_row(const State& s) {
  return {s.t, s.a, s.b, hamiltonian(s), volume(s), willmore(s), willmore_rate(s)};
}

std::vector<SeriesRow> willmore_series(const State& s0, const std::vector<double>& times) {
  std::vector<SeriesRow> rows;
  rows.reserve(times.size());
  for (double t : times) rows.push_back(series_row(closed_form(s0, t)));
  return rows;
}

GridImmersion embed(const State& s, std::array<int, 2> shape) {
  check(s);
  if (s.m != 1 || s.l != 1)
    throw UnsupportedDimension("only S^1 x S^1 can be sampled on a pole-free grid");
  return build_immersion(TorusSpec{s.a, s.b}, shape);
}

}  // namespace smc::sphere
