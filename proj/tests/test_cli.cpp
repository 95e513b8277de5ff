#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using namespace smc::cli;

namespace {

// Fresh scratch directory under a per-process temp root, removed at exit.
struct ScratchRoot {
  fs::path path = fs::temp_directory_path() / ("smcflow_cli_" + std::to_string(::getpid()));
  ~ScratchRoot() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
} scratch_root;

fs::path scratch(const std::string& name) {
  const fs::path p = scratch_root.path / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

struct Result {
  int code;
  std::string out, err;
};

Result run(Invocation inv) {
  std::ostringstream out, err;
  const int code = execute(inv, out, err);
  return {code, out.str(), err.str()};
}

Result run_argv(std::vector<std::string> args) {
  args.insert(args.begin(), "smcflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = smc::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Invocation inv(const std::string& cmd, std::vector<std::string> kv, const fs::path& out) {
  Invocation i;
  i.command = cmd;
  i.assignments = std::move(kv);
  i.out = out;
  return i;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("later layers win; reading records the resolved value") {
    Config c;
    c.set("dt", "1e-3", Layer::FileGlobal);
    c.set("dt", "2e-3", Layer::FileSection);
    c.set("dt", "3e-3", Layer::Argument);
    c.set("T", "0.5", Layer::Argument);
    c.set("T", "0.25", Layer::Flag);
    CHECK(c.real("dt", 1.0, 0.0, 1.0) == 3e-3);
    CHECK(c.real("T", 1.0, 0.0, 1.0) == 0.25);
    CHECK(c.integer("N", 64, 1, 100) == 64);
    CHECK(c.echo() == "N = 64\nT = 0.25\ndt = 3e-3\n");
  }

  TEST_CASE("strictness") {
    Config c;
    c.set_argument("a=1");
    c.set_argument("typo=2");
    c.real("a", 0.0, 0.0, 10.0);
    CHECK_THROWS_AS(c.finish(), ConfigError);
    CHECK_THROWS_AS(c.set_argument("a=3"), ConfigError);      // duplicate within a layer
    CHECK_THROWS_AS(c.set_argument("noequals"), ConfigError);
    CHECK_THROWS_AS(c.set_argument("bad key=1"), ConfigError);
  }

  TEST_CASE("typed reads reject malformed and out-of-range values") {
    Config c;
    c.set_argument("x=1.5abc");
    c.set_argument("n=2.5");
    c.set_argument("p=0");
    c.set_argument("b=maybe");
    c.set_argument("s=cube");
    c.set_argument("r=20");
    CHECK_THROWS_AS(c.real("x", 0, -1, 1), ConfigError);
    CHECK_THROWS_AS(c.integer("n", 0, 0, 10), ConfigError);
    CHECK_THROWS_AS(c.positive("p", 1.0), ConfigError);
    CHECK_THROWS_AS(c.boolean("b", true), ConfigError);
    CHECK_THROWS_AS(c.choice("s", "circle", {"circle", "perturbed"}), ConfigError);
    CHECK_THROWS_AS(c.real("r", 0, 0, 10), ConfigError);
  }

  TEST_CASE("config file: global keys, own section, other sections skipped") {
    const fs::path dir = scratch("cfgfile");
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "# comment\n"
                                      "dt: 1e-3   # trailing comment\n"
                                      "[sphere-run]\n"
                                      "m: 2\n"
                                      "[filament-run]\n"
                                      "N: 64\n";
    Config c;
    c.load_file(dir / "run.cfg", "sphere-run", subcommands());
    CHECK(c.real("dt", 1.0, 0.0, 1.0) == 1e-3);
    CHECK(c.integer("m", 1, 1, 10) == 2);
    CHECK_FALSE(c.has("N"));
    c.finish();

    std::ofstream(dir / "bad.cfg") << "[no-such-command]\nx: 1\n";
    Config d;
    CHECK_THROWS_AS(d.load_file(dir / "bad.cfg", "sphere-run", subcommands()), ConfigError);
    std::ofstream(dir / "bad2.cfg") << "x = 1\n";
    CHECK_THROWS_AS(d.load_file(dir / "bad2.cfg", "sphere-run", subcommands()), ConfigError);
  }

  TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
  }
}

TEST_SUITE("sphere-run") {
  TEST_CASE("to-collapse example ends within 1e-3 of t* = 1") {
    const fs::path out = scratch("sphere");
    const auto r = run(inv("sphere-run", {"m=1", "l=2", "a=1", "b=1", "dt=1e-4", "mode=to-collapse"}, out));
    REQUIRE(r.code == kOk);
    const auto rows = read_csv(out / "trajectory.csv");
    CHECK(std::abs(rows.back()[0] - 1.0) <= 1e-3);
    CHECK(std::isnan(rows.back()[6]));  // dW_dt only for m = l = 1
    const std::string manifest = slurp(out / "manifest.txt");
    CHECK(manifest.find("config_hash: fnv1a64:") != std::string::npos);
    CHECK(manifest.find("mode = to-collapse") != std::string::npos);
    CHECK(manifest.find("trajectory.csv fnv1a64:") != std::string::npos);
  }

  TEST_CASE("Hamiltonian column is constant along a horizon run") {
    const fs::path out = scratch("sphere_h");
    REQUIRE(run(inv("sphere-run", {"m=1", "l=1", "a=1", "b=2", "T=1"}, out)).code == kOk);
    const auto rows = read_csv(out / "trajectory.csv");
    for (const auto& row : rows) {
      CHECK(std::abs(row[3] - rows.front()[3]) <= 1e-10);
      CHECK(std::isfinite(row[6]));
    }
  }
}

TEST_SUITE("exit codes") {
  TEST_CASE("unknown key -> 2, nothing written") {
    const fs::path out = scratch("strict");
    const auto r = run(inv("sphere-run", {"m=1", "colour=red"}, out));
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("colour") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }

  TEST_CASE("keys of another shape are unrecognized") {
    CHECK(run(inv("filament-run", {"shape=circle", "eps=0.1"}, scratch("shape"))).code == kConfigError);
  }

  TEST_CASE("out-of-range and domain errors -> 2") {
    CHECK(run(inv("sphere-run", {"a=0"}, scratch("range"))).code == kConfigError);
    CHECK(run(inv("membrane-run", {"surface=circle(1)"}, scratch("dim"))).code == kConfigError);
    CHECK(run(inv("nls-run", {"shape=plane-wave", "N=48"}, scratch("pow2"))).code == kConfigError);
    CHECK(run(inv("no-such", {}, scratch("nosuch"))).code == kConfigError);
  }

  TEST_CASE("numerical abort -> 3 with the diagnostics so far") {
    const fs::path out = scratch("abort");
    const auto r = run(inv("membrane-run", {"n=16", "dt=0.05", "T=2", "stride=1", "snapshots=false"}, out));
    CHECK(r.code == kNumericalAbort);
    const auto rows = read_csv(out / "diagnostics.csv");
    CHECK(rows.size() > 2);
    CHECK(rows.back()[0] < 2.0);
    CHECK(slurp(out / "manifest.txt").find("status: numerical abort") != std::string::npos);
  }

  TEST_CASE("unwritable output -> 4") {
    CHECK(run(inv("sphere-run", {}, "/proc/smcflow/nope")).code == kIoError);
  }
}

TEST_SUITE("filament family") {
  TEST_CASE("filament-run example: willmore column constant to 1e-4") {
    const fs::path out = scratch("fil");
    REQUIRE(run(inv("filament-run", {"shape=circle", "R=1", "T=1", "dt=1e-3", "N=128"}, out)).code == kOk);
    const auto diag = read_csv(out / "diagnostics.csv");
    REQUIRE(diag.back()[0] == 1.0);
    for (const auto& row : diag) CHECK(std::abs(row[2] / diag.front()[2] - 1.0) <= 1e-4);
    const auto curve = read_csv(out / "curve.csv");
    CHECK(curve.size() == diag.size() * 128);
  }

  TEST_CASE("identical configs give byte-identical CSV") {
    const std::vector<std::string> kv = {"N=64", "T=0.05", "stride=10"};
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const std::string cmd : {"filament-run", "darios-run", "fluid-run", "nls-run"}) {
      REQUIRE(run(inv(cmd, kv, a)).code == kOk);
      REQUIRE(run(inv(cmd, kv, b)).code == kOk);
      for (const auto& f : fs::directory_iterator(a))
        if (f.path().extension() == ".csv") CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
    }
  }

  TEST_CASE("chunked runs match the solver's own recording") {
    // stride 7 does not divide the 50 steps; the last chunk is short
    const fs::path out = scratch("chunk");
    REQUIRE(run(inv("nls-run", {"shape=plane-wave", "A=1", "q=1", "N=32", "T=0.5", "dt=1e-2", "stride=7"}, out))
                .code == kOk);
    const auto diag = read_csv(out / "diagnostics.csv");
    CHECK(diag.size() == 1 + 8);
    CHECK(diag.back()[0] == 0.5);
    const auto wave = read_csv(out / "wave.csv");
    // plane wave: psi(x, t) = A e^{i(q x + (A^2/2 - q^2) t)}, exact under split-step
    const auto& last = wave[wave.size() - 32];
    CHECK(last[3] == doctest::Approx(std::cos(0.5 * (0.5 - 1.0))).epsilon(1e-9));
  }
}

TEST_SUITE("crosscheck") {
  TEST_CASE("degenerate curve: singular corners are reported, exit still 0") {
    const fs::path out = scratch("degenerate");
    const auto r = run(inv("crosscheck", {"part=corners", "eps=0.2", "N=128", "T=0.05"}, out));
    CHECK(r.code == kOk);
    const std::string rep = slurp(out / "crosscheck.csv");
    CHECK(rep.find("corner:darios,nan") != std::string::npos);
    CHECK(rep.find("singular") != std::string::npos);
    CHECK(rep.find("filament~nls") != std::string::npos);
  }
}

TEST_SUITE("front end") {
  TEST_CASE("flags, key=value and --config reach the command") {
    const fs::path out = scratch("argv");
    fs::create_directories(out);
    std::ofstream(out / "c.cfg") << "[sphere-run]\nb: 2\nT: 5\n";
    const auto r = run_argv({"sphere-run", "m=1", "l=1", "T=3", "--T", "0.5", "--config",
                             (out / "c.cfg").string(), "--out", (out / "o").string()});
    REQUIRE(r.code == kOk);
    const auto rows = read_csv(out / "o" / "trajectory.csv");
    CHECK(rows.back()[0] == 0.5);
    CHECK(rows.front()[2] == 2.0);
  }

  TEST_CASE("parse errors -> 2, help -> 0") {
    CHECK(run_argv({}).code == kConfigError);
    CHECK(run_argv({"sphere-run", "--bogus"}).code == kConfigError);
    CHECK(run_argv({"sphere-run", "--tol-profile", "lax"}).code == kConfigError);
    CHECK(run_argv({"--help"}).code == kOk);
  }

  TEST_CASE("validate: single criterion, bad suite") {
    const fs::path out = scratch("validate");
    const auto r = run_argv({"validate", "--suite", "12", "--out", out.string()});
    CHECK(r.code == kOk);
    CHECK(r.out.find("PASS  [12]") != std::string::npos);
    CHECK(slurp(out / "validate.csv") == "id,title,status\n12,NLS invariants,pass\n");
    CHECK(run_argv({"validate", "--suite", "13", "--out", out.string()}).code == kConfigError);
  }
}
