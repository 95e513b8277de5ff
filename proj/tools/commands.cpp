#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ios>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "smcflow/errors.hpp"
#include "smcflow/filament.hpp"
#include "smcflow/immersion.hpp"
#include "smcflow/membrane.hpp"
#include "smcflow/snapshot_io.hpp"
#include "smcflow/sphereprod.hpp"
#include "smcflow/validation.hpp"
#include "smcflow/version.hpp"

namespace smc::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using filament::Stencil;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// --- output directory + manifest ------------------------------------------------

class Run {
 public:
  Run(fs::path dir, Config& cfg) : dir_(std::move(dir)), cfg_(cfg) {}

  /// Rejects unread keys, then creates the output directory. Commands call
  /// this once every parameter has been read and the initial data is built.
  void start() {
    cfg_.finish();
    fs::create_directories(dir_);
    started_ = true;
  }
  bool started() const { return started_; }
  const fs::path& dir() const { return dir_; }

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    io::write_file_atomic(p, content);
    files_.emplace_back(rel, hex64(fnv1a64(content)));
  }

  void abort(const std::string& reason) { status_ = "numerical abort: " + reason; }
  const std::string& status() const { return status_; }

  void write_manifest(const std::string& command, int code, const std::string& status,
                      double seconds) {
    std::ostringstream os;
    os << "# smcflow run manifest\n";
    os << "tool: smcflow " << version() << '\n';
    os << "subcommand: " << command << '\n';
    os << "status: " << status << '\n';
    os << "exit_code: " << code << '\n';
    os << "wall_time_s: " << seconds << '\n';
    os << "config_hash: fnv1a64:" << hex64(cfg_.hash()) << '\n';
    os << "dependencies:";
    for (const auto& [name, v] : dependency_versions()) os << ' ' << name << '=' << v;
    os << "\n\n[config]\n" << cfg_.echo();
    os << "\n[outputs]\n";
    for (const auto& [f, h] : files_) os << f << " fnv1a64:" << h << '\n';
    io::write_file_atomic(dir_ / "manifest.txt", os.str());
  }

 private:
  fs::path dir_;
  Config& cfg_;
  bool started_ = false;
  std::string status_ = "ok";
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// --- shared parameter blocks ------------------------------------------------------

struct Timing {
  double dt, T;
  int stride;
};

Timing read_timing(Config& c, double dt, double T, int stride) {
  return {c.positive("dt", dt, 1.0), c.real("T", T, 0.0, 1e6), c.integer("stride", stride, 1, 1000000000)};
}

Stencil read_stencil(Config& c) {
  return c.choice("stencil", "fourth", {"fourth", "spectral"}) == "spectral" ? Stencil::Spectral
                                                                               : Stencil::FourthOrder;
}

// Accepted everywhere as a common flag; only validate and crosscheck scale
// tolerances with it.
double read_tol_scale(Config& c) {
  return c.choice("tol_profile", "default", {"default", "strict"}) == "strict" ? 0.5 : 1.0;
}

filament::ClosedCurve read_curve(Config& c, const std::string& fallback_shape) {
  const std::string shape = c.choice("shape", fallback_shape, {"circle", "perturbed", "snapshot"});
  if (shape == "snapshot") {
    const std::string path = c.text("input", "");
    if (path.empty()) throw ConfigError("shape=snapshot needs input=<file>");
    return filament::from_immersion(io::load_snapshot(path));
  }
  const double R = c.positive("R", 1.0);
  const int n = c.integer("N", 256, filament::kMinCurveSamples, 1 << 20);
  if (shape == "circle") return filament::circle(R, n);
  return filament::perturbed_circle(R, c.real("eps", 0.05, 0.0, 0.5), c.integer("k", 2, 1, 1000), n);
}

// Runs `advance(state, h, steps)` in chunks of `stride` steps so that every
// recorded state survives a later abort. The step h is the one the solvers
// themselves would use for (dt, T), so the result matches a single call.
template <class State>
struct Chunked {
  std::vector<double> times;
  std::vector<State> states;
  std::string abort_reason;
};

template <class State, class Advance>
Chunked<State> run_chunked(const State& s0, const Timing& tm, Advance advance) {
  const int steps = tm.T > 0.0 ? static_cast<int>(std::ceil(tm.T / tm.dt - 1e-9)) : 0;
  const double h = steps > 0 ? tm.T / steps : 0.0;
  Chunked<State> out;
  out.times.push_back(0.0);
  out.states.push_back(s0);
  for (int done = 0; done < steps;) {
    const int n = std::min(tm.stride, steps - done);
    try {
      State next = advance(out.states.back(), h, n);
      done += n;
      out.times.push_back(done == steps ? tm.T : done * h);
      out.states.push_back(std::move(next));
    } catch (const NumericalAbort& e) {
      // the solver reports chunk-local time; restate it globally
      std::string what = e.what();
      what = what.substr(0, what.rfind(" (t = "));
      out.abort_reason = NumericalAbort(what, done * h + e.time()).what();
      break;
    }
  }
  return out;
}

// --- sphere-run ---------------------------------------------------------------------

int sphere_run(Config& c, Run& run, std::ostream& out) {
  sphere::State s0;
  s0.m = c.integer("m", 1, 1, 64);
  s0.l = c.integer("l", 2, 1, 64);
  s0.a = c.positive("a", 1.0);
  s0.b = c.positive("b", 1.0);
  sphere::EvolveOptions o;
  const bool collapse = c.choice("mode", "horizon", {"horizon", "to-collapse"}) == "to-collapse";
  const double dt = c.positive("dt", 1e-3, 1.0);
  double T = 0.0;
  if (collapse) {
    // "to-collapse" means as close as the integrator can resolve: the
    // library's a_stop = 1e-3 guard would stop ~3% of t* early.
    o.mode = sphere::StopMode::Collapse;
    o.a_stop = c.positive("a_stop", 1e-10);
    o.halving_factor = 100.0;
  } else {
    T = c.real("T", 1.0, 0.0, 1e6);
  }
  o.stride = c.integer("stride", 1, 1, 1000000000);
  o.halving_factor = c.real("halving_factor", o.halving_factor, 1.0, 1e6);
  o.throw_on_abort = false;
  read_tol_scale(c);
  run.start();

  const sphere::Trajectory tr = sphere::evolve_numeric(s0, dt, T, o);
  io::CsvTable csv({"t", "a", "b", "hamiltonian", "volume", "willmore", "dW_dt"});
  for (const auto& s : tr.states) {
    const auto r = sphere::series_row(s);
    csv.add_row({r.t, r.a, r.b, r.hamiltonian, r.volume, r.willmore, r.dW_dt});
  }
  run.write("trajectory.csv", csv.str());
  if (tr.aborted) run.abort(tr.abort_reason);

  const auto& last = tr.states.back();
  out << "sphere-run: " << tr.steps << " steps (" << tr.halvings << " halvings), t = "
      << io::format_double(last.t) << ", a = " << io::format_double(last.a)
      << ", b = " << io::format_double(last.b);
  const double ts = sphere::collapse_time(s0);
  if (std::isfinite(ts)) out << ", collapse time " << io::format_double(ts);
  out << '\n';
  return tr.aborted ? kNumericalAbort : kOk;
}

// --- filament-family runs -----------------------------------------------------------

int filament_run(Config& c, Run& run, std::ostream& out) {
  const filament::ClosedCurve c0 = read_curve(c, "perturbed");
  const Timing tm = read_timing(c, 1e-4, 1.0, 100);
  filament::FilamentOptions o;
  o.stencil = read_stencil(c);
  o.resample_every = c.integer("resample_every", o.resample_every, 0, 1000000);
  o.stride = tm.stride;
  o.throw_on_abort = false;
  read_tol_scale(c);
  run.start();

  const auto tr = filament::evolve_filament(c0, tm.dt, tm.T, o);
  io::CsvTable curve({"t", "index", "x", "y", "z"});
  io::CsvTable diag({"t", "length", "willmore"});
  for (std::size_t r = 0; r < tr.curves.size(); ++r) {
    const auto& cv = tr.curves[r];
    for (int j = 0; j < cv.size(); ++j)
      curve.add_row({tr.times[r], double(j), cv.points[j].x(), cv.points[j].y(), cv.points[j].z()});
    diag.add_row({tr.times[r], filament::length(cv, o.stencil), filament::willmore_1d(cv, o.stencil)});
  }
  run.write("curve.csv", curve.str());
  run.write("diagnostics.csv", diag.str());
  if (tr.aborted) run.abort(tr.abort_reason);
  out << "filament-run: " << tr.curves.size() << " records to t = " << io::format_double(tr.times.back())
      << '\n';
  return tr.aborted ? kNumericalAbort : kOk;
}

double integral(const std::vector<double>& f, double length) {
  double s = 0.0;
  for (double x : f) s += x;
  return s * length / f.size();
}

std::vector<double> arclength_nodes(int n, double length) {
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) s[j] = length * j / n;
  return s;
}

int darios_run(Config& c, Run& run, std::ostream& out) {
  const filament::ClosedCurve c0 = read_curve(c, "perturbed");
  const Timing tm = read_timing(c, 1e-4, 1.0, 100);
  const Stencil st = read_stencil(c);
  read_tol_scale(c);
  const filament::DaRiosState s0 = filament::darios_state(filament::frenet_data(c0, st));
  run.start();

  const auto tr = run_chunked(s0, tm, [&](const filament::DaRiosState& s, double h, int n) {
    return filament::darios_evolve(s, h, n * h, st, n).states.back();
  });
  io::CsvTable prof({"t", "index", "s", "kappa", "tau"});
  io::CsvTable diag({"t", "willmore"});
  for (std::size_t r = 0; r < tr.states.size(); ++r) {
    const auto& s = tr.states[r];
    const auto nodes = arclength_nodes(static_cast<int>(s.kappa.size()), s.length);
    std::vector<double> k2(s.kappa.size());
    for (std::size_t j = 0; j < s.kappa.size(); ++j) {
      prof.add_row({tr.times[r], double(j), nodes[j], s.kappa[j], s.tau[j]});
      k2[j] = s.kappa[j] * s.kappa[j];
    }
    diag.add_row({tr.times[r], integral(k2, s.length)});
  }
  run.write("profiles.csv", prof.str());
  run.write("diagnostics.csv", diag.str());
  if (!tr.abort_reason.empty()) run.abort(tr.abort_reason);
  out << "darios-run: " << tr.states.size() << " records to t = " << io::format_double(tr.times.back())
      << '\n';
  return tr.abort_reason.empty() ? kOk : kNumericalAbort;
}

int nls_run(Config& c, Run& run, std::ostream& out) {
  const std::string shape = c.choice("shape", "perturbed", {"circle", "perturbed", "snapshot", "plane-wave"});
  filament::WaveField w0;
  if (shape == "plane-wave") {
    const double A = c.real("A", 1.0, 0.0, 1e6);
    const int q = c.integer("q", 0, -(1 << 20), 1 << 20);
    const int n = c.integer("N", 256, 2, 1 << 24);
    w0.length = c.positive("L", kTwoPi);
    w0.psi.resize(n);
    for (int j = 0; j < n; ++j) w0.psi[j] = std::polar(A, kTwoPi * q * j / n);
  } else {
    // read_curve re-reads "shape"; the value is the same
    const auto h = filament::hasimoto(filament::frenet_data(read_curve(c, shape)));
    if (!h.single_valued)
      throw ConfigError("initial curve has Hasimoto holonomy " + io::format_double(h.holonomy) +
                        "; the NLS field would not be periodic");
    w0 = h.wave;
  }
  const Timing tm = read_timing(c, 1e-4, 1.0, 100);
  read_tol_scale(c);
  const int n = w0.size();
  if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("N must be a power of two for the NLS solver");
  run.start();

  const auto tr = run_chunked(w0, tm, [&](const filament::WaveField& w, double h, int k) {
    return filament::nls_evolve(w, h, k * h, k).waves.back();
  });
  io::CsvTable wave({"t", "index", "x", "re", "im", "abs"});
  io::CsvTable diag({"t", "mass"});
  for (std::size_t r = 0; r < tr.states.size(); ++r) {
    const auto& w = tr.states[r];
    const auto nodes = arclength_nodes(w.size(), w.length);
    for (int j = 0; j < w.size(); ++j)
      wave.add_row({tr.times[r], double(j), nodes[j], w.psi[j].real(), w.psi[j].imag(), std::abs(w.psi[j])});
    diag.add_row({tr.times[r], w.mass()});
  }
  run.write("wave.csv", wave.str());
  run.write("diagnostics.csv", diag.str());
  if (!tr.abort_reason.empty()) run.abort(tr.abort_reason);
  out << "nls-run: " << tr.states.size() << " records to t = " << io::format_double(tr.times.back())
      << '\n';
  return tr.abort_reason.empty() ? kOk : kNumericalAbort;
}

int fluid_run(Config& c, Run& run, std::ostream& out) {
  const filament::ClosedCurve c0 = read_curve(c, "perturbed");
  const Timing tm = read_timing(c, 1e-4, 1.0, 100);
  const Stencil st = read_stencil(c);
  read_tol_scale(c);
  const filament::FluidState s0 = filament::to_fluid(filament::darios_state(filament::frenet_data(c0, st)));
  run.start();

  const auto tr = run_chunked(s0, tm, [&](const filament::FluidState& s, double h, int n) {
    return filament::fluid_evolve(s, h, n * h, st, n).states.back();
  });
  io::CsvTable fields({"t", "index", "s", "rho", "v"});
  io::CsvTable diag({"t", "mass"});
  for (std::size_t r = 0; r < tr.states.size(); ++r) {
    const auto& s = tr.states[r];
    const auto nodes = arclength_nodes(static_cast<int>(s.rho.size()), s.length);
    for (std::size_t j = 0; j < s.rho.size(); ++j)
      fields.add_row({tr.times[r], double(j), nodes[j], s.rho[j], s.v[j]});
    diag.add_row({tr.times[r], s.mass()});
  }
  run.write("fields.csv", fields.str());
  run.write("diagnostics.csv", diag.str());
  if (!tr.abort_reason.empty()) run.abort(tr.abort_reason);
  out << "fluid-run: " << tr.states.size() << " records to t = " << io::format_double(tr.times.back())
      << '\n';
  return tr.abort_reason.empty() ? kOk : kNumericalAbort;
}

// --- membrane-run ---------------------------------------------------------------------

GridImmersion read_surface(Config& c) {
  const std::string input = c.text("input", "");
  if (!input.empty()) return io::load_snapshot(input);
  const SurfaceSpec spec = parse_surface_spec(c.text("surface", "torus_product(1,2)"));
  const int n0 = c.integer("n", 64, kMinGridSize, 4096);
  const int n1 = c.integer("n1", n0, kMinGridSize, 4096);
  return build_immersion(spec, {n0, n1});
}

int membrane_run(Config& c, Run& run, std::ostream& out) {
  const GridImmersion imm = read_surface(c);
  const Timing tm = read_timing(c, 1e-4, 0.2, 100);
  MembraneOptions o;
  o.geometry.order = c.choice("order", "2", {"2", "4"}) == "4" ? 4 : 2;
  o.stride = tm.stride;
  o.residuals = c.boolean("residuals", true);
  o.equations = c.choice("equations", "printed", {"printed", "derived"}) == "derived"
                    ? EquationForm::Derived
                    : EquationForm::Printed;
  o.throw_on_abort = false;
  const bool snapshots = c.boolean("snapshots", true);
  read_tol_scale(c);
  if (imm.grid.dim != 2) throw ConfigError("membrane-run needs a two-dimensional immersion");
  run.start();

  const MembraneTrajectory tr = evolve_membrane(imm, tm.dt, tm.T, o);
  io::CsvTable diag({"t", "willmore", "volume", "a_extracted", "b_extracted", "max_continuity_residual",
                     "max_momentum_residual", "energy_gap"});
  for (const MembraneRecord& r : tr.records)
    diag.add_row({r.t, r.willmore, r.volume, r.a_extracted, r.b_extracted, r.max_continuity_residual,
                  r.max_momentum_residual, r.energy_gap});
  run.write("diagnostics.csv", diag.str());
  if (snapshots) {
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      char name[48];
      std::snprintf(name, sizeof name, "snapshots/snapshot_%05zu.txt", k);
      std::ostringstream os;
      io::write_snapshot(os, tr.snapshots[k]);
      run.write(name, os.str());
    }
  }
  if (tr.aborted) run.abort(tr.abort_reason);
  out << "membrane-run: " << tr.records.size() << " records to t = " << io::format_double(tr.times.back())
      << ", W = " << io::format_double(tr.records.back().willmore) << '\n';
  return tr.aborted ? kNumericalAbort : kOk;
}

// --- crosscheck -----------------------------------------------------------------------

int crosscheck(Config& c, Run& run, std::ostream& out) {
  const std::string part = c.choice("part", "all", {"all", "corners", "torus"});
  const bool corners = part != "torus", torus = part != "corners";
  const double scale = read_tol_scale(c);
  const double dt = c.positive("dt", 1e-4, 1.0);
  const double T = c.real("T", 0.2, 0.0, 1e6);

  filament::ClosedCurve curve;
  Stencil st = Stencil::FourthOrder;
  double corner_tol = 0.0;
  if (corners) {
    curve = read_curve(c, "perturbed");
    st = read_stencil(c);
    corner_tol = scale * c.positive("corner_tol", 5e-3);
  }
  GridImmersion imm;
  MembraneOptions mo;
  double torus_tol = 0.0;
  sphere::State s0;
  if (torus) {
    s0.a = c.positive("torus_a", 1.0);
    s0.b = c.positive("torus_b", 2.0);
    const int n = c.integer("torus_n", 64, kMinGridSize, 4096);
    mo.geometry.order = c.choice("torus_order", "4", {"2", "4"}) == "4" ? 4 : 2;
    mo.stride = c.integer("stride", 100, 1, 1000000000);
    mo.residuals = false;
    torus_tol = scale * c.positive("torus_tol", 1e-2);
    imm = build_immersion(TorusSpec{s0.a, s0.b}, {n, n});
  }
  run.start();

  std::ostringstream csv;
  csv << "check,gap,tolerance,status,note\n";
  bool ok = true;
  auto row = [&](const std::string& name, double gap, double tol, const std::string& status,
                 const std::string& note) {
    csv << name << ',' << io::format_double(gap) << ',' << io::format_double(tol) << ',' << status << ','
        << quoted(note) << '\n';
    out << "  " << status << "  " << name << ": " << io::format_double(gap) << " (tol "
        << io::format_double(tol) << ")" << (note.empty() ? "" : " " + note) << '\n';
  };
  auto verdict = [&](double gap, double tol) {
    const bool pass = gap <= tol;
    ok = ok && pass;
    return pass ? "pass" : "fail";
  };

  if (corners) {
    const filament::FourCorners fc = filament::four_corners(curve, dt, T, st);
    out << "crosscheck: four corners at t = " << io::format_double(T) << ", holonomy "
        << io::format_double(fc.holonomy) << '\n';
    for (const auto& k : fc.corners)
      if (!k.ok) {
        const bool skipped = k.note.rfind("skipped", 0) == 0;
        row("corner:" + k.name, std::nan(""), corner_tol, skipped ? "skipped" : "singular", k.note);
      }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        if (!fc.corners[i].ok || !fc.corners[j].ok) continue;
        const double g = fc.gap(i, j);
        row(fc.corners[i].name + "~" + fc.corners[j].name, g, corner_tol, verdict(g, corner_tol), "");
      }
  }
  if (torus) {
    const MembraneTrajectory tr = evolve_membrane(imm, dt, T, mo);
    out << "crosscheck: membrane torus(" << io::format_double(s0.a) << "," << io::format_double(s0.b)
        << ") radii vs closed forms\n";
    double ea = 0.0, eb = 0.0;
    for (const MembraneRecord& r : tr.records) {
      const sphere::State ex = sphere::closed_form(s0, r.t);
      ea = std::max(ea, std::abs(r.a_extracted / ex.a - 1.0));
      eb = std::max(eb, std::abs(r.b_extracted / ex.b - 1.0));
    }
    if (tr.aborted) {
      row("torus:radii", std::nan(""), torus_tol, "singular", tr.abort_reason);
    } else {
      row("torus:a", ea, torus_tol, verdict(ea, torus_tol), "relative");
      row("torus:b", eb, torus_tol, verdict(eb, torus_tol), "relative");
    }
  }
  run.write("crosscheck.csv", csv.str());
  return ok ? kOk : kCheckFailed;
}

// --- validate ---------------------------------------------------------------------------

std::vector<int> parse_suite(const std::string& s) {
  std::vector<int> ids;
  if (s == "all") {
    for (int i = 1; i <= validation::kCriterionCount; ++i) ids.push_back(i);
    return ids;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || id < 1 || id > validation::kCriterionCount)
      throw ConfigError("suite: expected 'all' or criterion numbers 1.." +
                        std::to_string(validation::kCriterionCount) + ", got '" + item + "'");
    ids.push_back(id);
  }
  if (ids.empty()) throw ConfigError("suite is empty");
  return ids;
}

int validate(Config& c, Run& run, std::ostream& out) {
  const std::vector<int> ids = parse_suite(c.text("suite", "all"));
  validation::Options o;
  o.profile = read_tol_scale(c) < 1.0 ? validation::TolProfile::Strict : validation::TolProfile::Default;
  o.seed = static_cast<std::uint64_t>(c.integer("seed", 7, 0, 2147483647));
  run.start();

  // validate.csv stays byte-stable; measured details (including runtimes)
  // go to the text report
  std::ostringstream csv, report;
  csv << "id,title,status\n";
  int failed = 0;
  for (int id : ids) {
    const auto r = validation::run_criterion(id, o);
    const std::string line = validation::format_result(r);
    out << line << std::endl;
    report << line << '\n';
    csv << r.id << ',' << quoted(r.title) << ',' << (r.pass ? "pass" : "fail") << '\n';
    failed += r.pass ? 0 : 1;
  }
  run.write("validate.csv", csv.str());
  run.write("validate.txt", report.str());
  out << (ids.size() - failed) << "/" << ids.size() << " criteria passed\n";
  return failed == 0 ? kOk : kCheckFailed;
}

// --------------------------------------------------------------------------------------------

using Command = int (*)(Config&, Run&, std::ostream&);

const std::vector<std::pair<std::string, Command>>& table() {
  static const std::vector<std::pair<std::string, Command>> t = {
      {"sphere-run", sphere_run},     {"filament-run", filament_run}, {"darios-run", darios_run},
      {"nls-run", nls_run},           {"fluid-run", fluid_run},       {"membrane-run", membrane_run},
      {"crosscheck", crosscheck},     {"validate", validate},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, cmd] : table()) n.push_back(name);
    return n;
  }();
  return names;
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  Config cfg;
  Run run(inv.out, cfg);
  int code = kOk;
  std::string status;
  const auto it = std::find_if(table().begin(), table().end(),
                               [&](const auto& e) { return e.first == inv.command; });
  try {
    if (it == table().end()) throw ConfigError("unknown subcommand '" + inv.command + "'");
    if (inv.config_file) cfg.load_file(*inv.config_file, inv.command, subcommands());
    for (const auto& kv : inv.assignments) cfg.set_argument(kv);
    if (inv.dt) cfg.set("dt", *inv.dt, Layer::Flag);
    if (inv.T) cfg.set("T", *inv.T, Layer::Flag);
    if (inv.stride) cfg.set("stride", *inv.stride, Layer::Flag);
    if (inv.tol_profile) cfg.set("tol_profile", *inv.tol_profile, Layer::Flag);
    if (inv.suite) cfg.set("suite", *inv.suite, Layer::Flag);
    code = it->second(cfg, run, out);
    status = code == kCheckFailed ? "checks failed" : run.status();
  } catch (const ConfigError& e) {
    code = kConfigError;
    status = std::string("config error: ") + e.what();
  } catch (const InvalidInput& e) {
    code = kConfigError;
    status = std::string("invalid input: ") + e.what();
  } catch (const UnsupportedDimension& e) {
    code = kConfigError;
    status = std::string("unsupported: ") + e.what();
  } catch (const std::ios_base::failure& e) {
    code = kIoError;
    status = std::string("i/o error: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    code = kIoError;
    status = std::string("i/o error: ") + e.what();
  } catch (const std::exception& e) {
    // NumericalAbort and the remaining geometry errors raised mid-run
    code = kNumericalAbort;
    status = std::string("numerical abort: ") + e.what();
  }
  if (code >= kConfigError) err << "smcflow: " << status << '\n';
  if (run.started()) {
    try {
      run.write_manifest(inv.command, code, status,
                         std::chrono::duration<double>(Clock::now() - t0).count());
    } catch (const std::exception& e) {
      err << "smcflow: i/o error: " << e.what() << '\n';
      code = kIoError;
    }
  }
  return code;
}

}  // namespace smc::cli
