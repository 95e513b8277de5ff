#pragma once

#include <array>
#include <string>
#include <utility>
#include <variant>

#include "smcflow/grid.hpp"

namespace smc {

/// Round circle of radius R in the xy-plane of R^3 (dim 1).
struct CircleSpec {
  double radius = 1.0;
};

/// Clifford-type torus S^1(a) x S^1(b) in R^4:
/// F(theta, phi) = (a cos theta, a sin theta, b cos phi, b sin phi).
struct TorusSpec {
  double a = 1.0;
  double b = 1.0;
};

/// Torus product pushed off along its two unit normals n1, n2:
/// F + eps cos(k1 theta + k2 phi) n1 + eps sin(k1 theta - k2 phi) n2.
struct PerturbedTorusSpec {
  double a = 1.0;
  double b = 2.0;
  double eps = 0.05;
  int k1 = 2;
  int k2 = 3;
};

using SurfaceSpec = std::variant<CircleSpec, TorusSpec, PerturbedTorusSpec>;

/// Samples the surface on a periodic grid. For a circle only shape[0] is used.
/// Throws InvalidInput on nonpositive radii, eps >= min(a, b)/2 or grids < 8.
GridImmersion build_immersion(const SurfaceSpec& spec, std::array<int, 2> shape);

/// Parses "circle(R)", "torus_product(a,b)" or "perturbed_torus(a,b,eps,k1,k2)".
SurfaceSpec parse_surface_spec(const std::string& text);

/// Checks grid size, point count and ambient dimension; throws InvalidInput.
void validate(const GridImmersion& imm);

/// Mean of |(x1,x2)| and |(x3,x4)| over the grid; recovers (a, b) on tori.
std::pair<double, double> extract_radii(const GridImmersion& imm);

}  // namespace smc
