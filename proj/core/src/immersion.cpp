#include "smcflow/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <vector>

#include "smcflow/errors.hpp"

namespace smc {
namespace {

void check_shape(int n) {
  if (n < kMinGridSize)
    throw InvalidInput("grid size " + std::to_string(n) + " is below the minimum of " +
                       std::to_string(kMinGridSize));
}

void check_torus(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("torus radii must be positive");
}

}  // namespace

GridImmersion build_immersion(const SurfaceSpec& spec, std::array<int, 2> shape) {
  return std::visit(
      [&](const auto& s) -> GridImmersion {
        using S = std::decay_t<decltype(s)>;
        GridImmersion imm;
        if constexpr (std::is_same_v<S, CircleSpec>) {
          if (!(s.radius > 0.0)) throw InvalidInput("circle radius must be positive");
          check_shape(shape[0]);
          imm.grid = Grid::line(shape[0]);
          imm.points.resize(imm.grid.size());
          for (std::size_t p = 0; p < imm.points.size(); ++p) {
            const double u = imm.grid.coordinate(p, 0);
            imm.points[p] = Vec(s.radius * std::cos(u), s.radius * std::sin(u), 0.0, 0.0);
          }
        } else {
          check_shape(shape[0]);
          check_shape(shape[1]);
          imm.grid = Grid::plane(shape[0], shape[1]);
          imm.points.resize(imm.grid.size());
          double a = s.a, b = s.b;
          check_torus(a, b);
          if constexpr (std::is_same_v<S, PerturbedTorusSpec>) {
            if (!(std::abs(s.eps) < 0.5 * std::min(a, b)))
              throw InvalidInput("perturbation amplitude must satisfy |eps| < min(a,b)/2");
          }
          for (std::size_t p = 0; p < imm.points.size(); ++p) {
            const double th = imm.grid.coordinate(p, 0);
            const double ph = imm.grid.coordinate(p, 1);
            const Vec n1(std::cos(th), std::sin(th), 0.0, 0.0);
            const Vec n2(0.0, 0.0, std::cos(ph), std::sin(ph));
            Vec x = a * n1 + b * n2;
            if constexpr (std::is_same_v<S, PerturbedTorusSpec>) {
              x += s.eps * std::cos(s.k1 * th + s.k2 * ph) * n1 +
                   s.eps * std::sin(s.k1 * th - s.k2 * ph) * n2;
            }
            imm.points[p] = x;
          }
        }
        return imm;
      },
      spec);
}

SurfaceSpec parse_surface_spec(const std::string& text) {
  static const std::regex re(R"(\s*([a-z_]+)\s*\(([^)]*)\)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw InvalidInput("cannot parse surface spec '" + text + "'");
  const std::string name = m[1];
  std::vector<double> args;
  std::stringstream ss(m[2]);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      args.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidInput("bad numeric argument '" + tok + "' in surface spec");
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw InvalidInput(name + " expects " + std::to_string(n) + " arguments");
  };
  if (name == "circle") {
    need(1);
    return CircleSpec{args[0]};
  }
  if (name == "torus_product") {
    need(2);
    return TorusSpec{args[0], args[1]};
  }
  if (name == "perturbed_torus") {
    need(5);
    return PerturbedTorusSpec{args[0], args[1], args[2], static_cast<int>(args[3]),
                              static_cast<int>(args[4])};
  }
  throw InvalidInput("unknown surface '" + name + "'");
}

void validate(const GridImmersion& imm) {
  const Grid& g = imm.grid;
  if (g.dim != 1 && g.dim != 2) throw InvalidInput("intrinsic dimension must be 1 or 2");
  check_shape(g.shape[0]);
  if (g.dim == 2) check_shape(g.shape[1]);
  if (g.dim == 1 && g.shape[1] != 1) throw InvalidInput("curve grids must have shape[1] == 1");
  if (imm.points.size() != g.size()) throw InvalidInput("point count does not match grid shape");
  if (g.dim == 1) {
    for (const Vec& x : imm.points)
      if (x[3] != 0.0) throw InvalidInput("curve points must lie in R^3 (fourth coordinate 0)");
  }
  for (const Vec& x : imm.points)
    if (!x.allFinite()) throw InvalidInput("immersion contains non-finite coordinates");
}

std::pair<double, double> extract_radii(const GridImmersion& imm) {
  double a = 0.0, b = 0.0;
  for (const Vec& x : imm.points) {
    a += std::hypot(x[0], x[1]);
    b += std::hypot(x[2], x[3]);
  }
  const double n = static_cast<double>(imm.points.size());
  return {a / n, b / n};
}

}  // namespace smc
