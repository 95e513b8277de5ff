#include "smcflow/filament.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>

#include <Eigen/Geometry>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include "smcflow/errors.hpp"
#include "smcflow/finite_difference.hpp"
#include "smcflow/spectral.hpp"

namespace smc::filament {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const spectral::Differentiator& differentiator(int n, double length) {
  // Plans are cheap to reuse and comparatively expensive to build.
  thread_local std::map<std::pair<int, double>, std::unique_ptr<spectral::Differentiator>> cache;
  auto& slot = cache[{n, length}];
  if (!slot) slot = std::make_unique<spectral::Differentiator>(n, length);
  return *slot;
}

/// m-th derivative (m = 1, 2) of periodic samples with spacing length/n.
std::vector<double> deriv(const std::vector<double>& f, double length, int m, Stencil st) {
  const int n = static_cast<int>(f.size());
  if (st == Stencil::Spectral) return differentiator(n, length).apply(f, m);
  const Grid g = Grid::line(n, length);
  return m == 1 ? fd::diff(g, f, 0, 4) : fd::diff2(g, f, 0, 4);
}

std::vector<Vec3> deriv(const std::vector<Vec3>& f, double length, int m, Stencil st) {
  const int n = static_cast<int>(f.size());
  if (st == Stencil::FourthOrder) {
    const Grid g = Grid::line(n, length);
    return m == 1 ? fd::diff(g, f, 0, 4) : fd::diff2(g, f, 0, 4);
  }
  std::vector<Vec3> out(n);
  std::vector<double> comp(n);
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < n; ++j) comp[j] = f[j][k];
    const auto d = differentiator(n, length).apply(comp, m);
    for (int j = 0; j < n; ++j) out[j][k] = d[j];
  }
  return out;
}

int step_count(double dt, double T) {
  if (dt == 0.0 || !std::isfinite(dt)) throw InvalidInput("dt must be finite and nonzero");
  if (T == 0.0) return 0;
  if ((T > 0) != (dt > 0)) throw InvalidInput("dt and T must have the same sign");
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

void check_stride(int stride) {
  if (stride < 1) throw InvalidInput("stride must be >= 1");
}

/// One classical RK4 step for y' = f(t, y) on flat storage.
void rk4_step(std::vector<double>& y, double t, double h,
              const std::function<std::vector<double>(double, const std::vector<double>&)>& f) {
  const std::size_t n = y.size();
  std::vector<double> tmp(n);
  const auto k1 = f(t, y);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  const auto k2 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  const auto k3 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  const auto k4 = f(t + h, tmp);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

std::vector<double> flatten(const std::vector<Vec3>& pts) {
  std::vector<double> y(3 * pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (int k = 0; k < 3; ++k) y[3 * j + k] = pts[j][k];
  return y;
}

std::vector<Vec3> unflatten(const std::vector<double>& y) {
  std::vector<Vec3> pts(y.size() / 3);
  for (std::size_t j = 0; j < pts.size(); ++j) pts[j] = Vec3(y[3 * j], y[3 * j + 1], y[3 * j + 2]);
  return pts;
}

/// Periodic cubic spline through (x_j, y_j), j = 0..n, with y_n = y_0.
class PeriodicSpline {
 public:
  PeriodicSpline(const std::vector<double>& x, const std::vector<double>& y)
      : spline_(gsl_spline_alloc(gsl_interp_cspline_periodic, x.size()), gsl_spline_free),
        acc_(gsl_interp_accel_alloc(), gsl_interp_accel_free) {
    if (gsl_spline_init(spline_.get(), x.data(), y.data(), x.size()) != GSL_SUCCESS)
      throw InvalidInput("periodic spline: knots must be strictly increasing");
  }
  double operator()(double x) const { return gsl_spline_eval(spline_.get(), x, acc_.get()); }

 private:
  std::unique_ptr<gsl_spline, void (*)(gsl_spline*)> spline_;
  std::unique_ptr<gsl_interp_accel, void (*)(gsl_interp_accel*)> acc_;
};

struct GslErrorsOff {
  GslErrorsOff() { gsl_set_error_handler_off(); }
};

}  // namespace

// --- construction ----------------------------------------------------------

ClosedCurve circle(double radius, int n) {
  if (!(radius > 0.0)) throw InvalidInput("circle radius must be positive");
  ClosedCurve c;
  c.points.resize(n);
  for (int j = 0; j < n; ++j) {
    const double u = kTwoPi * j / n;
    c.points[j] = Vec3(radius * std::cos(u), radius * std::sin(u), 0.0);
  }
  validate(c);
  return c;
}

ClosedCurve perturbed_circle(double radius, double eps, int k, int n) {
  if (!(radius > 0.0)) throw InvalidInput("radius must be positive");
  // |eps| = 1/(1+k^2) is allowed: kappa then touches zero at isolated points
  if (!(std::abs(eps) <= 1.0 / (1.0 + k * k))) throw InvalidInput("perturbation too large for a convex curve");
  auto r = [&](double th) { return radius * (1.0 + eps * std::cos(k * th)); };
  auto speed = [&](double th) {
    const double dr = -radius * eps * k * std::sin(k * th);
    return std::hypot(r(th), dr);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto arclength = [&](double a, double b) { return Quad::integrate(speed, a, b, 4, 1e-13); };
  const double total = arclength(0.0, kTwoPi);

  ClosedCurve c;
  c.points.resize(n);
  double th = 0.0, s_prev = 0.0;
  for (int j = 0; j < n; ++j) {
    const double target = total * j / n;
    // Newton on s(theta) = target, starting from the previous node.
    double s = s_prev;
    for (int it = 0; it < 50; ++it) {
      const double step = (target - s) / speed(th);
      const double th_new = th + step;
      s += arclength(th, th_new);
      th = th_new;
      if (std::abs(step) < 1e-15) break;
    }
    s_prev = s;
    c.points[j] = Vec3(r(th) * std::cos(th), r(th) * std::sin(th), 0.0);
  }
  validate(c);
  return c;
}

void validate(const ClosedCurve& c) {
  if (c.size() < kMinCurveSamples)
    throw InvalidInput("closed curves need at least " + std::to_string(kMinCurveSamples) + " samples");
  if (!(c.period > 0.0)) throw InvalidInput("curve period must be positive");
  for (int j = 0; j < c.size(); ++j) {
    if (!c.points[j].allFinite()) throw InvalidInput("curve sample " + std::to_string(j) + " is not finite");
    if ((c.points[(j + 1) % c.size()] - c.points[j]).norm() == 0.0)
      throw InvalidInput("curve is not immersed at sample " + std::to_string(j));
  }
  double perimeter = 0.0;
  for (int j = 0; j < c.size(); ++j) perimeter += (c.points[(j + 1) % c.size()] - c.points[j]).norm();
  if (min_separation(c) < 0.2 * perimeter / c.size())
    throw InvalidInput("curve self-intersects at sample scale");
}

ClosedCurve from_immersion(const GridImmersion& imm) {
  if (imm.dim() != 1) throw UnsupportedDimension("a closed curve needs a 1-dimensional immersion");
  ClosedCurve c;
  c.period = imm.grid.periods[0];
  c.points.reserve(imm.points.size());
  for (const Vec& x : imm.points) c.points.emplace_back(x[0], x[1], x[2]);
  validate(c);
  return c;
}

GridImmersion to_immersion(const ClosedCurve& c) {
  GridImmersion imm;
  imm.grid = Grid::line(c.size(), c.period);
  imm.points.reserve(c.points.size());
  for (const Vec3& x : c.points) imm.points.emplace_back(x[0], x[1], x[2], 0.0);
  return imm;
}

// --- geometry ----------------------------------------------------------------

CurveDerivatives derivatives(const ClosedCurve& c, Stencil stencil) {
  CurveDerivatives d;
  d.d1 = deriv(c.points, c.period, 1, stencil);
  d.d2 = deriv(c.points, c.period, 2, stencil);
  d.d3 = deriv(d.d2, c.period, 1, stencil);
  return d;
}

std::vector<Vec3> binormal_rhs(const ClosedCurve& c, Stencil stencil) {
  const auto d1 = deriv(c.points, c.period, 1, stencil);
  const auto d2 = deriv(c.points, c.period, 2, stencil);
  std::vector<Vec3> v(c.points.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double sp = d1[j].norm();
    if (!(sp > 0.0)) throw InvalidInput("curve is not immersed at sample " + std::to_string(j));
    v[j] = d1[j].cross(d2[j]) / (sp * sp * sp);
  }
  return v;
}

double length(const ClosedCurve& c, Stencil stencil) {
  const auto d1 = deriv(c.points, c.period, 1, stencil);
  double sum = 0.0;
  for (const auto& t : d1) sum += t.norm();
  return sum * c.spacing();
}

double min_separation(const ClosedCurve& c) {
  const int n = c.size();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      best = std::min(best, (c.points[i] - c.points[j]).squaredNorm());
    }
  return std::sqrt(best);
}

FrenetData frenet_data(const ClosedCurve& c, Stencil stencil) {
  const CurveDerivatives d = derivatives(c, stencil);
  const int n = c.size();
  const double du = c.spacing();
  FrenetData f;
  f.s.resize(n);
  f.kappa.resize(n);
  f.tau.resize(n);
  f.masked.assign(n, 0);
  std::vector<double> speed(n);
  for (int j = 0; j < n; ++j) {
    speed[j] = d.d1[j].norm();
    const Vec3 cr = d.d1[j].cross(d.d2[j]);
    const double crn = cr.norm();
    f.kappa[j] = crn / (speed[j] * speed[j] * speed[j]);
    if (f.kappa[j] < kKappaMin) {
      f.masked[j] = 1;
      f.tau[j] = std::nan("");
    } else {
      f.tau[j] = cr.dot(d.d3[j]) / (crn * crn);
      f.total_torsion += f.tau[j] * speed[j] * du;
    }
    f.length += speed[j] * du;
  }
  f.s[0] = 0.0;
  for (int j = 1; j < n; ++j) f.s[j] = f.s[j - 1] + 0.5 * (speed[j - 1] + speed[j]) * du;
  return f;
}

double willmore_1d(const ClosedCurve& c, Stencil stencil) {
  const CurveDerivatives d = derivatives(c, stencil);
  double sum = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    const double sp = d.d1[j].norm();
    const double k = d.d1[j].cross(d.d2[j]).norm() / (sp * sp * sp);
    sum += k * k * sp;
  }
  return sum * c.spacing();
}

ClosedCurve resample_arclength(const ClosedCurve& c) {
  static const GslErrorsOff gsl_quiet;
  const int n = c.size();
  const double P = c.period, du = c.spacing();
  const auto d1 = deriv(c.points, P, 1, Stencil::Spectral);
  std::vector<double> speed(n);
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += (speed[j] = d1[j].norm());
  mean /= n;
  const double L = mean * P;
  const auto fluct = differentiator(n, P).integrate_fluctuation(speed);

  // Knots s_j with the periodic part w(s) = u(s) - s P / L of the inverse map.
  std::vector<double> s(n + 1), w(n + 1), u(n + 1);
  for (int j = 0; j <= n; ++j) {
    u[j] = j * du;
    s[j] = j < n ? mean * u[j] + fluct[j] : L;
    w[j] = u[j] - s[j] * P / L;
  }
  const PeriodicSpline winv(s, w);
  std::array<std::vector<double>, 3> coord;
  std::vector<std::unique_ptr<PeriodicSpline>> splines;
  for (int k = 0; k < 3; ++k) {
    coord[k].resize(n + 1);
    for (int j = 0; j <= n; ++j) coord[k][j] = c.points[j % n][k];
    splines.push_back(std::make_unique<PeriodicSpline>(u, coord[k]));
  }

  ClosedCurve out;
  out.period = P;
  out.points.resize(n);
  out.points[0] = c.points[0];
  for (int j = 1; j < n; ++j) {
    const double sigma = L * j / n;
    const double uj = sigma * P / L + winv(sigma);
    for (int k = 0; k < 3; ++k) out.points[j][k] = (*splines[k])(uj);
  }
  return out;
}

// --- binormal flow -----------------------------------------------------------

FilamentTrajectory evolve_filament(const ClosedCurve& c0, double dt, double T,
                                   const FilamentOptions& opts) {
  validate(c0);
  check_stride(opts.stride);
  if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidInput("filament flow needs dt > 0 and T >= 0");
  const int steps = step_count(dt, T);
  const double h = steps > 0 ? T / steps : 0.0;

  FilamentTrajectory traj;
  traj.times.push_back(0.0);
  traj.curves.push_back(c0);
  ClosedCurve c = c0;
  double t = 0.0;
  auto rhs = [&](double time, const std::vector<double>& y) {
    ClosedCurve tmp{unflatten(y), c.period};
    const auto v = binormal_rhs(tmp, opts.stencil);
    for (const auto& x : v)
      if (!x.allFinite() || x.norm() > opts.speed_cap)
        throw NumericalAbort("filament velocity blew up", time);
    return flatten(v);
  };
  auto check_geometry = [&] {
    const double spacing = length(c, opts.stencil) / c.size();
    if (min_separation(c) < opts.d_min_factor * spacing)
      throw NumericalAbort("filament self-intersection", t);
  };

  std::vector<double> y = flatten(c.points);
  try {
    for (int step = 1; step <= steps; ++step) {
      rk4_step(y, t, h, rhs);
      t = step == steps ? T : step * h;
      c.points = unflatten(y);
      const bool resample = opts.resample_every > 0 && step % opts.resample_every == 0;
      if (resample) {
        c = resample_arclength(c);
        y = flatten(c.points);
      }
      const bool record = step % opts.stride == 0 || step == steps;
      if (resample || record) check_geometry();
      if (record) {
        traj.times.push_back(t);
        traj.curves.push_back(c);
      }
    }
  } catch (const NumericalAbort& e) {
    if (opts.throw_on_abort) throw;
    traj.aborted = true;
    traj.abort_reason = e.what();
  }
  return traj;
}

// --- waves -------------------------------------------------------------------

double WaveField::mass() const {
  double sum = 0.0;
  for (const auto& p : psi) sum += std::norm(p);
  return sum * length / size();
}

HasimotoResult hasimoto(const FrenetData& f, int s0) {
  const int n = static_cast<int>(f.kappa.size());
  if (s0 < 0 || s0 >= n) throw InvalidInput("hasimoto base point out of range");
  auto tau_at = [&](int j) { return f.masked[j] ? 0.0 : f.tau[j]; };
  std::vector<double> phase(n, 0.0);
  for (int j = 1; j < n; ++j)
    phase[j] = phase[j - 1] + 0.5 * (tau_at(j - 1) + tau_at(j)) * (f.s[j] - f.s[j - 1]);

  HasimotoResult r;
  r.wave.length = f.length;
  r.wave.psi.resize(n);
  for (int j = 0; j < n; ++j) r.wave.psi[j] = std::polar(f.kappa[j], phase[j] - phase[s0]);
  r.holonomy = std::remainder(f.total_torsion, kTwoPi);
  r.single_valued = std::abs(r.holonomy) < 1e-8;
  return r;
}

WaveTrajectory nls_evolve(const WaveField& w, double dt, double T, int stride) {
  const int m = w.size();
  if (m < 2 || (m & (m - 1)) != 0) throw InvalidInput("NLS grid size must be a power of two");
  check_stride(stride);
  const int steps = step_count(dt, T);
  const double h = steps > 0 ? T / steps : 0.0;
  const spectral::Fft fft(m);
  const auto k = spectral::wavenumbers(m, w.length);
  std::vector<spectral::cplx> linear(m);
  for (int j = 0; j < m; ++j) linear[j] = std::polar(1.0, -k[j] * k[j] * h);

  WaveTrajectory traj;
  traj.times.push_back(0.0);
  traj.waves.push_back(w);
  std::vector<spectral::cplx> psi = w.psi;
  auto half_nonlinear = [&] {
    for (auto& p : psi) p *= std::polar(1.0, 0.5 * h * 0.5 * std::norm(p));
  };
  for (int step = 1; step <= steps; ++step) {
    half_nonlinear();
    auto hat = fft.forward(psi);
    for (int j = 0; j < m; ++j) hat[j] *= linear[j];
    psi = fft.inverse(hat);
    half_nonlinear();
    const double t = step == steps ? T : step * h;
    for (const auto& p : psi)
      if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
        throw NumericalAbort("NLS solution is not finite", t - h);
    if (step % stride == 0 || step == steps) {
      traj.times.push_back(t);
      traj.waves.push_back({psi, w.length});
    }
  }
  return traj;
}

// --- Da Rios and fluid --------------------------------------------------------

DaRiosState darios_state(const FrenetData& f) {
  DaRiosState s;
  s.kappa = f.kappa;
  s.tau.resize(f.tau.size());
  for (std::size_t j = 0; j < f.tau.size(); ++j) s.tau[j] = f.masked[j] ? 0.0 : f.tau[j];
  s.length = f.length;
  return s;
}

DaRiosTrajectory darios_evolve(const DaRiosState& s0, double dt, double T, Stencil st, int stride) {
  check_stride(stride);
  const int n = static_cast<int>(s0.kappa.size());
  if (n < kMinCurveSamples || s0.tau.size() != s0.kappa.size())
    throw InvalidInput("Da Rios state needs matching kappa/tau arrays of at least 32 samples");
  const double L = s0.length;
  const int steps = step_count(dt, T);
  const double h = steps > 0 ? T / steps : 0.0;

  auto rhs = [&](double t, const std::vector<double>& y) {
    const std::vector<double> kappa(y.begin(), y.begin() + n), tau(y.begin() + n, y.end());
    for (double k : kappa)
      if (!(k > kKappaMin)) throw NumericalAbort("curvature reached zero in the Da Rios system", t);
    const auto dk = deriv(kappa, L, 1, st), dt_ = deriv(tau, L, 1, st), d2k = deriv(kappa, L, 2, st);
    std::vector<double> q(n);
    for (int j = 0; j < n; ++j) q[j] = 0.5 * kappa[j] * kappa[j] + d2k[j] / kappa[j];
    const auto dq = deriv(q, L, 1, st);
    std::vector<double> out(2 * n);
    for (int j = 0; j < n; ++j) {
      out[j] = -2.0 * dk[j] * tau[j] - kappa[j] * dt_[j];
      out[n + j] = -2.0 * tau[j] * dt_[j] + dq[j];
    }
    return out;
  };

  DaRiosTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  std::vector<double> y(s0.kappa);
  y.insert(y.end(), s0.tau.begin(), s0.tau.end());
  double t = 0.0;
  for (int step = 1; step <= steps; ++step) {
    rk4_step(y, t, h, rhs);
    t = step == steps ? T : step * h;
    if (step % stride == 0 || step == steps) {
      traj.times.push_back(t);
      traj.states.push_back({{y.begin(), y.begin() + n}, {y.begin() + n, y.end()}, L});
    }
  }
  return traj;
}

double FluidState::mass() const {
  double sum = 0.0;
  for (double r : rho) sum += r;
  return sum * length / rho.size();
}

FluidState to_fluid(const DaRiosState& s) {
  FluidState f;
  f.length = s.length;
  f.rho.resize(s.kappa.size());
  f.v.resize(s.tau.size());
  for (std::size_t j = 0; j < s.kappa.size(); ++j) {
    f.rho[j] = s.kappa[j] * s.kappa[j];
    f.v[j] = 2.0 * s.tau[j];
  }
  return f;
}

FluidTrajectory fluid_evolve(const FluidState& s0, double dt, double T, Stencil st, int stride) {
  check_stride(stride);
  const int n = static_cast<int>(s0.rho.size());
  if (n < kMinCurveSamples || s0.v.size() != s0.rho.size())
    throw InvalidInput("fluid state needs matching rho/v arrays of at least 32 samples");
  const double L = s0.length;
  const int steps = step_count(dt, T);
  const double h = steps > 0 ? T / steps : 0.0;

  auto rhs = [&](double t, const std::vector<double>& y) {
    const std::vector<double> rho(y.begin(), y.begin() + n), v(y.begin() + n, y.end());
    std::vector<double> flux(n), root(n);
    for (int j = 0; j < n; ++j) {
      if (!(rho[j] > kRhoMin)) throw NumericalAbort("fluid density reached vacuum", t);
      flux[j] = rho[j] * v[j];
      root[j] = std::sqrt(rho[j]);
    }
    const auto dflux = deriv(flux, L, 1, st), dv = deriv(v, L, 1, st), d2root = deriv(root, L, 2, st);
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) p[j] = rho[j] + 2.0 * d2root[j] / root[j];
    const auto dp = deriv(p, L, 1, st);
    std::vector<double> out(2 * n);
    for (int j = 0; j < n; ++j) {
      out[j] = -dflux[j];
      out[n + j] = -v[j] * dv[j] + dp[j];
    }
    return out;
  };

  FluidTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  std::vector<double> y(s0.rho);
  y.insert(y.end(), s0.v.begin(), s0.v.end());
  double t = 0.0;
  for (int step = 1; step <= steps; ++step) {
    rk4_step(y, t, h, rhs);
    t = step == steps ? T : step * h;
    if (step % stride == 0 || step == steps) {
      traj.times.push_back(t);
      traj.states.push_back({{y.begin(), y.begin() + n}, {y.begin() + n, y.end()}, L});
    }
  }
  return traj;
}

// --- the four corners -----------------------------------------------------------

double FourCorners::gap(int i, int j) const {
  const Corner &a = corners[i], &b = corners[j];
  if (!a.ok || !b.ok) return std::nan("");
  double g = 0.0;
  for (std::size_t p = 0; p < a.kappa.size(); ++p) g = std::max(g, std::abs(a.kappa[p] - b.kappa[p]));
  return g;
}

double FourCorners::max_gap() const {
  double g = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (corners[i].ok && corners[j].ok) g = std::max(g, gap(i, j));
  return g;
}

FourCorners four_corners(const ClosedCurve& c, double dt, double T, Stencil stencil) {
  constexpr int kLastOnly = std::numeric_limits<int>::max();
  const FrenetData f0 = frenet_data(c, stencil);
  const HasimotoResult h = hasimoto(f0);
  const DaRiosState d0 = darios_state(f0);

  FourCorners out;
  out.holonomy = h.holonomy;
  auto attempt = [](Corner& corner, const char* name, auto&& profile) {
    corner.name = name;
    try {
      corner.kappa = profile();
      corner.ok = true;
    } catch (const NumericalAbort& e) {
      corner.note = e.what();
    }
  };
  attempt(out.corners[0], "filament", [&] {
    const auto tr = evolve_filament(c, dt, T, {.stencil = stencil, .stride = kLastOnly});
    return frenet_data(tr.curves.back(), stencil).kappa;
  });
  attempt(out.corners[1], "darios", [&] {
    return darios_evolve(d0, dt, T, stencil, kLastOnly).states.back().kappa;
  });
  if (h.single_valued) {
    attempt(out.corners[2], "nls", [&] {
      const WaveTrajectory tr = nls_evolve(h.wave, dt, T, kLastOnly);
      std::vector<double> k;
      for (const cplx& p : tr.waves.back().psi) k.push_back(std::abs(p));
      return k;
    });
  } else {
    out.corners[2].name = "nls";
    out.corners[2].note = "skipped: Hasimoto wave not single-valued (holonomy " +
                          std::to_string(h.holonomy) + ")";
  }
  attempt(out.corners[3], "fluid", [&] {
    const FluidTrajectory tr = fluid_evolve(to_fluid(d0), dt, T, stencil, kLastOnly);
    std::vector<double> k;
    for (double r : tr.states.back().rho) k.push_back(std::sqrt(r));
    return k;
  });
  return out;
}

// --- Madelung ------------------------------------------------------------------

WaveField madelung(const std::vector<double>& rho, const std::vector<double>& theta, double length) {
  if (rho.size() != theta.size()) throw InvalidInput("rho and theta must have the same length");
  WaveField w;
  w.length = length;
  w.psi.resize(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > kRhoMin)) throw InvalidInput("Madelung transform is undefined at vacuum");
    w.psi[j] = std::polar(std::sqrt(rho[j]), 0.5 * theta[j]);
  }
  return w;
}

MadelungInverse madelung_inverse(const WaveField& w) {
  const int n = w.size();
  MadelungInverse out;
  out.rho.resize(n);
  out.theta.resize(n);
  double phase = 0.0;
  for (int j = 0; j < n; ++j) {
    out.rho[j] = std::norm(w.psi[j]);
    if (!(out.rho[j] > kRhoMin)) throw InvalidInput("phase is undefined at vacuum");
    if (j == 0)
      phase = std::arg(w.psi[0]);
    else
      phase += std::arg(w.psi[j] / w.psi[j - 1]);
    out.theta[j] = 2.0 * phase;
  }
  const double closing = phase + std::arg(w.psi[0] / w.psi[n - 1]);
  out.holonomy = 2.0 * (closing - std::arg(w.psi[0]));
  return out;
}

}  // namespace smc::filament
