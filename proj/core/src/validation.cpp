#include "smcflow/validation.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>

#include "smcflow/diffgeo.hpp"
#include "smcflow/errors.hpp"
#include "smcflow/filament.hpp"
#include "smcflow/immersion.hpp"
#include "smcflow/membrane.hpp"
#include "smcflow/sphereprod.hpp"

namespace smc::validation {

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Collects "name value <= bound" clauses and the overall verdict.
struct Report {
  double scale = 1.0;  // tolerance multiplier of the profile
  std::uint64_t seed = 7;
  bool pass = true;
  std::string text;

  void add(const std::string& s) { text += (text.empty() ? "" : "; ") + s; }
  void at_most(const std::string& name, double value, double bound, bool scaled = true) {
    const double b = scaled ? bound * scale : bound;
    const bool ok = value <= b;
    pass = pass && ok;
    add(name + " " + sci(value) + (ok ? " <= " : " > ") + sci(b));
  }
  void at_least(const std::string& name, double value, double bound) {
    const bool ok = value >= bound;
    pass = pass && ok;
    add(name + " " + sci(value) + (ok ? " >= " : " < ") + sci(bound));
  }
};

// --- shared runs --------------------------------------------------------------

struct TorusRun {
  MembraneTrajectory traj;
  double seconds = 0.0;
};

// torus(1,2), 64x64, fourth-order stencils, dt = 1e-4, records every 1e-2.
const TorusRun& torus_run() {
  static std::optional<TorusRun> run;
  if (!run) {
    const auto t0 = Clock::now();
    MembraneOptions o;
    o.geometry.order = 4;
    o.stride = 100;
    TorusRun r;
    r.traj = evolve_membrane(build_immersion(TorusSpec{1.0, 2.0}, {64, 64}), 1e-4, 0.2, o);
    r.seconds = seconds_since(t0);
    run = std::move(r);
  }
  return *run;
}

// perturbed_torus(1,2,0.05,2,3): two records 1e-3 apart, dt = 1e-4, order 2.
const MembraneTrajectory& perturbed_run(int n) {
  static std::optional<MembraneTrajectory> runs[3];
  const int slot = n == 32 ? 0 : n == 64 ? 1 : 2;
  if (!runs[slot]) {
    MembraneOptions o;
    o.stride = 10;
    o.residuals = false;
    runs[slot] = evolve_membrane(build_immersion(PerturbedTorusSpec{}, {n, n}), 1e-4, 2e-3, o);
  }
  return *runs[slot];
}

// --- criteria -------------------------------------------------------------------

// Run-to-collapse settings: the default a_stop = 1e-3 stops at 1 - sqrt(a_stop)
// of t*, too early for the 1e-3 window, and the default halving factor lets
// the invariant drift by ~1e-6 over the many halvings on the way to 1e-10.
const sphere::EvolveOptions kDeepCollapse{
    .mode = sphere::StopMode::Collapse, .a_stop = 1e-10, .halving_factor = 100.0};

void collapse_time(Report& rep) {
  struct Case {
    sphere::State s0;
    double window;
  };
  for (const Case& c : {Case{{1, 2, 1.0, 1.0}, 1e-3}, Case{{2, 3, 2.0, 3.0}, 1e-3 * 6.0}}) {
    const auto t0 = Clock::now();
    const auto tr = sphere::evolve_numeric(c.s0, 1e-3, 0.0, kDeepCollapse);
    const double secs = seconds_since(t0);
    const double tstar = sphere::collapse_time(c.s0);
    const std::string tag = "(" + std::to_string(c.s0.m) + "," + std::to_string(c.s0.l) + ")";
    rep.add(tag + " t_stop " + sci(tr.states.back().t) + " vs t* " + sci(tstar));
    rep.at_most(tag + " |t_stop - t*|", std::abs(tr.states.back().t - tstar), c.window);
    rep.at_most(tag + " runtime", secs, 1.0, false);
  }
}

// RK4 runs shared by criteria 2 and 3.
struct SphereRun {
  sphere::State s0;
  double horizon;
};
std::vector<SphereRun> sphere_runs() {
  std::vector<SphereRun> runs;
  for (auto [m, l, a, b] : {std::array<double, 4>{1, 1, 1, 1}, {1, 2, 1, 1}, {2, 1, 1, 1}, {2, 3, 2, 3}}) {
    sphere::State s{static_cast<int>(m), static_cast<int>(l), a, b, 0.0};
    const double ts = sphere::collapse_time(s);
    runs.push_back({s, std::isfinite(ts) ? 0.8 * ts : 2.0});
  }
  return runs;
}

void closed_forms(Report& rep) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& r : sphere_runs()) {
    const auto tr = sphere::evolve_numeric(r.s0, 1e-3, r.horizon);
    for (const auto& s : tr.states) {
      const auto exact = sphere::closed_form(r.s0, s.t);
      worst = std::max({worst, std::abs(s.a - exact.a), std::abs(s.b - exact.b)});
    }
  }
  rep.at_most("max radius error over (1,1),(1,2),(2,1),(2,3)", worst, 1e-8);
  rep.at_most("runtime", seconds_since(t0), 1.0, false);
}

void conservation(Report& rep) {
  double drift = 0.0;
  auto track = [&](const sphere::Trajectory& tr) {
    const double h0 = sphere::hamiltonian(tr.states.front());
    for (const auto& s : tr.states) drift = std::max(drift, std::abs(sphere::hamiltonian(s) - h0));
  };
  for (const auto& r : sphere_runs()) track(sphere::evolve_numeric(r.s0, 1e-3, r.horizon));
  for (const sphere::State& s : {sphere::State{1, 2, 1.0, 1.0}, sphere::State{2, 3, 2.0, 3.0}})
    track(sphere::evolve_numeric(s, 1e-3, 0.0, kDeepCollapse));
  rep.at_most("ln(a^m b^l) drift", drift, 1e-8);

  const auto& recs = torus_run().traj.records;
  double vdrift = 0.0;
  for (const auto& r : recs) vdrift = std::max(vdrift, std::abs(r.volume / recs.front().volume - 1.0));
  rep.at_most("membrane volume drift, torus(1,2) 64x64 T=0.2", vdrift, 2e-3);
}

void willmore_counterexample(Report& rep) {
  const TorusRun& run = torus_run();
  const auto& recs = run.traj.records;
  double worst = 0.0;
  for (const auto& r : recs) {
    const double a = std::exp(-r.t / 2.0), b = 2.0 * std::exp(r.t / 2.0);
    worst = std::max(worst, std::abs(r.willmore / (4 * kPi * kPi * (b / a + a / b)) - 1.0));
  }
  rep.at_most("W(t) vs 4 pi^2 (b/a e^{2t/ab} + a/b e^{-2t/ab}), rel", worst, 1e-2);
  rep.at_least("W(0.2)/W(0) - 1", recs.back().willmore / recs.front().willmore - 1.0, 0.05);
  rep.at_most("runtime", run.seconds, 60.0, false);
}

void filament_willmore(Report& rep) {
  const auto t0 = Clock::now();
  using namespace filament;
  const ClosedCurve c = perturbed_circle(1.0, 0.05, 2, 256);
  const auto tr = evolve_filament(c, 1e-4, 1.0, {.stride = 1000});
  const double w0 = willmore_1d(c);
  double drift = 0.0;
  for (const auto& ct : tr.curves) drift = std::max(drift, std::abs(willmore_1d(ct) / w0 - 1.0));
  rep.at_most("closed integral of kappa^2 ds, relative drift", drift, 1e-4);
  rep.at_most("runtime", seconds_since(t0), 30.0, false);
}

void hasimoto_square(Report& rep) {
  const auto t0 = Clock::now();
  using namespace filament;
  const ClosedCurve c = perturbed_circle(1.0, 0.05, 2, 256);
  const FourCorners fc = four_corners(c, 1e-4, 0.2);
  rep.add("holonomy " + sci(fc.holonomy));
  for (const Corner& k : fc.corners)
    if (!k.ok) {
      rep.pass = false;
      rep.add(k.name + " did not run: " + k.note);
    }
  rep.at_most("max pairwise L-inf gap of kappa at t=0.2", fc.max_gap(), 5e-3);
  rep.at_most("runtime", seconds_since(t0), 60.0, false);
}

void willmore_gradient_check(Report& rep) {
  const GeometryOptions g{.order = 4};
  {
    const ShapeField s = shape_field(build_immersion(TorusSpec{1.0, 1.0}, {64, 64}), g);
    double m = 0.0;
    for (const Vec& v : willmore_gradient(s)) m = std::max(m, 0.5 * v.norm());
    rep.at_most("torus(1,1) |grad/2|", m, 1e-3);
  }
  const GridImmersion imm = build_immersion(TorusSpec{1.0, 2.0}, {64, 64});
  const ShapeField s = shape_field(imm, g);
  const NormalField grad = willmore_gradient(s);
  double m = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double th = s.grid.coordinate(p, 0), ph = s.grid.coordinate(p, 1);
    const Vec n1(std::cos(th), std::sin(th), 0, 0), n2(0, 0, std::cos(ph), std::sin(ph));
    m = std::max(m, (0.5 * grad[p] - (-0.375 * n1 + 0.1875 * n2)).norm());
  }
  rep.at_most("torus(1,2) |grad/2 - (-(3/8) n1 + (3/16) n2)|", m, 1e-3);

  std::mt19937_64 rng(rep.seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    // low-mode random variation, projected to the normal plane
    Vec c[3][3];
    for (auto& row : c)
      for (auto& v : row) v = Vec(normal(rng), normal(rng), normal(rng), normal(rng));
    NormalField v(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
      const double th = s.grid.coordinate(p, 0), ph = s.grid.coordinate(p, 1);
      Vec w = c[0][0] + c[1][0] * std::cos(th) + c[0][1] * std::sin(ph) + c[1][1] * std::cos(th + ph) +
              c[2][2] * std::sin(2 * th - ph) / 3.0;
      v[p] = s.normal_part(p, w);
    }
    const double eps = 1e-5;
    GridImmersion plus = imm, minus = imm;
    for (std::size_t p = 0; p < s.size(); ++p) {
      plus.points[p] += eps * v[p];
      minus.points[p] -= eps * v[p];
    }
    const double fd =
        (willmore_energy(shape_field(plus, g)) - willmore_energy(shape_field(minus, g))) / (2 * eps);
    worst = std::max(worst, std::abs(fd - l2_inner(s, grad, v)) / std::abs(fd));
  }
  rep.at_most("directional-derivative oracle, 3 variations, rel", worst, 1e-3);
}

void continuity(Report& rep) {
  const auto& tr = torus_run().traj;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.records.size(); ++k)
    worst = std::max(worst, tr.records[k].max_continuity_residual);
  rep.at_most("torus(1,2) max continuity residual, 64x64", worst, 1e-3);

  // Numerical trajectory through t = 0 started from the exact state at t = -dt.
  const double dt = 1e-4;
  const sphere::State s0{1, 1, 1.0, 2.0, 0.0};
  MembraneOptions o;
  o.geometry.order = 4;
  o.residuals = false;
  const auto around = evolve_membrane(sphere::embed(sphere::closed_form(s0, -dt), {64, 64}), dt, 2 * dt, o);
  const auto r = continuity_residual(around, 1);
  double dev = 0.0;
  for (double v : r.drho_dt) dev = std::max(dev, std::abs(v - 0.75));
  rep.at_most("|d rho/dt - 0.75| at t=0", dev, 1e-3);
}

void energy_identity(Report& rep) {
  const auto& tr = torus_run().traj;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.records.size(); ++k) {
    const auto e = energy_identity_check(tr, k);
    worst = std::max(worst, e.gap / std::abs(e.rhs));
  }
  rep.at_most("|dW/dt - rhs| / |rhs| along torus(1,2)", worst, 1e-2);
  const ShapeField s = shape_field(build_immersion(TorusSpec{1.0, 2.0}, {64, 64}), {.order = 4});
  const double rhs = energy_derivative(s).integral;
  rep.at_most("rhs vs 8 pi^2 * 0.75 at (1,2), rel", std::abs(rhs / (6 * kPi * kPi) - 1.0), 5e-3);
}

void momentum(Report& rep) {
  const sphere::State s0{1, 1, 1.0, 2.0, 0.0};
  const auto exact = sampled_trajectory({0.1 - 1e-3, 0.1, 0.1 + 1e-3},
                                        [&](double t) { return sphere::embed(sphere::closed_form(s0, t), {64, 64}); });
  const double h = 2 * kPi / 64;
  rep.at_most("torus(1,2) printed residual (budget h^2)",
              momentum_residual(exact, 1, EquationForm::Printed).max_abs, h * h);
  double printed[3], derived[3];
  int i = 0;
  for (int n : {32, 64, 128}) {
    printed[i] = momentum_residual(perturbed_run(n), 1, EquationForm::Printed).max_abs;
    derived[i] = momentum_residual(perturbed_run(n), 1, EquationForm::Derived).max_abs;
    ++i;
  }
  rep.add("perturbed torus printed residual 32/64/128: " + sci(printed[0]) + " / " + sci(printed[1]) + " / " +
          sci(printed[2]));
  rep.at_least("observed order 32->64", order(printed[0], printed[1]), 1.0);
  rep.at_least("observed order 64->128", order(printed[1], printed[2]), 1.0);
  rep.add("for reference, re-derived balance: " + sci(derived[0]) + " / " + sci(derived[1]) + " / " +
          sci(derived[2]) + ", orders " + sci(order(derived[0], derived[1])) + ", " +
          sci(order(derived[1], derived[2])));
}

void normal_curvature(Report& rep) {
  const double h = 2 * kPi / 64;
  const auto torus = normal_curvature_check(shape_field(build_immersion(TorusSpec{1.0, 2.0}, {64, 64})));
  rep.at_most("torus(1,2) max |d tau + R_perp| (budget h^2)", torus.max_residual, h * h);
  double res[3];
  int i = 0;
  for (int n : {64, 128, 256})
    res[i++] = normal_curvature_check(shape_field(build_immersion(PerturbedTorusSpec{}, {n, n}))).max_residual;
  rep.add("perturbed torus 64/128/256: " + sci(res[0]) + " / " + sci(res[1]) + " / " + sci(res[2]));
  rep.at_least("observed order 64->128", order(res[0], res[1]), 1.8);
  rep.at_least("observed order 128->256", order(res[1], res[2]), 1.8);
}

void nls_invariants(Report& rep) {
  using namespace filament;
  WaveField w;
  w.length = 2 * kPi;
  for (int j = 0; j < 128; ++j) {
    const double x = 2 * kPi * j / 128;
    w.psi.emplace_back(1.0 + 0.3 * std::cos(x), 0.2 * std::sin(2 * x));
  }
  const auto tr = nls_evolve(w, 1e-3, 1.0, 100);
  double drift = 0.0;
  for (const auto& wt : tr.waves) drift = std::max(drift, std::abs(wt.mass() / w.mass() - 1.0));
  rep.at_most("mass drift, relative", drift, 1e-10);

  const double A = 1.0;
  const WaveField plane{std::vector<cplx>(64, A), 2 * kPi};
  const auto pw = nls_evolve(plane, 1e-3, 1.0, 1000).waves.back();
  double phase = 0.0;
  for (const auto& p : pw.psi) phase = std::max(phase, std::abs(std::arg(p) - A * A / 2));
  rep.at_most("plane-wave phase error at t=1 (omega = A^2/2)", phase, 1e-10);
}

struct Entry {
  const char* title;
  void (*check)(Report&);
};

const Entry kEntries[kCriterionCount] = {
    {"collapse time", collapse_time},
    {"closed-form agreement", closed_forms},
    {"Hamiltonian and volume conservation", conservation},
    {"Willmore non-conservation on torus(1,2)", willmore_counterexample},
    {"1D Willmore conservation", filament_willmore},
    {"filament / Da Rios / NLS / fluid square", hasimoto_square},
    {"Willmore gradient", willmore_gradient_check},
    {"continuity with source", continuity},
    {"energy identity", energy_identity},
    {"momentum equation", momentum},
    {"d tau + normal curvature", normal_curvature},
    {"NLS invariants", nls_invariants},
};

}  // namespace

CriterionResult run_criterion(int id, const Options& opts) {
  if (id < 1 || id > kCriterionCount) throw InvalidInput("no acceptance criterion " + std::to_string(id));
  const Entry& e = kEntries[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = e.title;
  Report rep;
  rep.scale = opts.profile == TolProfile::Strict ? 0.5 : 1.0;
  rep.seed = opts.seed;
  const auto t0 = Clock::now();
  try {
    e.check(rep);
    r.pass = rep.pass;
    r.detail = rep.text;
  } catch (const std::exception& ex) {
    r.pass = false;
    r.detail = rep.text + (rep.text.empty() ? "" : "; ") + "error: " + ex.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const Options& opts) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s  [%2d] ", r.pass ? "PASS" : "FAIL", r.id);
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.2f s)", r.seconds);
  return head + r.title + ": " + r.detail + tail;
}

}  // namespace smc::validation
