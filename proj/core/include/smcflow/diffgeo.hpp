#pragma once

// Discrete extrinsic geometry of codimension-2 immersions sampled on periodic
// grids. Derivatives are centered finite differences in parameter space;
// normal projections are taken against the discrete tangent span.

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "smcflow/grid.hpp"

namespace smc {

struct GeometryOptions {
  int order = 2;          ///< finite-difference order, 2 or 4
  double g_min = 1e-10;   ///< smallest admissible det g
  double h_min = 1e-8;    ///< |H| below this cannot seed the normal frame
  bool with_frame = true; ///< build (nu1, nu2); the flow right-hand side skips it
};

/// Per-point geometry of an immersion.
///
/// For curves (dim 1) the 2x2 metric blocks carry g in entry (0,0) and the
/// identity elsewhere so that index loops `i, j < dim` stay uniform.
struct ShapeField {
  Grid grid;
  int order = 2;
  Field<std::array<Vec, 2>> tangents;   ///< d_i F
  Field<Eigen::Matrix2d> metric;        ///< g_ij
  Field<Eigen::Matrix2d> metric_inv;    ///< g^ij
  ScalarField sqrt_det;                 ///< sqrt(det g)
  Field<std::array<Vec, 3>> second_form;  ///< A_00, A_01, A_11 (normal-valued)
  NormalField mean_curvature;           ///< H = g^ij A_ij
  NormalField nu1, nu2;                 ///< oriented unit normal frame, nu2 = J nu1
  ScalarField rho;                      ///< |H|^2
  ScalarField d2_norm;                  ///< max_ij |d_i d_j F|, scale for tol_perp
  std::vector<std::size_t> masked;     ///< points with |H| < h_min (frame transported)

  int dim() const { return grid.dim; }
  std::size_t size() const { return grid.size(); }

  const Vec& A(std::size_t p, int i, int j) const { return second_form[p][i + j]; }

  /// Component of v orthogonal to the tangent span at p (Gram-matrix solve).
  Vec normal_part(std::size_t p, const Vec& v) const;

  /// Rotation J by +pi/2 in the normal plane at p, applied to the normal part
  /// of v. Oriented so that (t_1, ..., t_n, J nu, nu) is a positive frame of
  /// the ambient space; on torus products this gives J n1 = n2, J n2 = -n1
  /// and on curves J n = -b.
  Vec rotate(std::size_t p, const Vec& v) const;

  /// g^{ik} g^{jl} (A_ij, X)(A_kl, Y) for normal vectors X, Y.
  double contract(std::size_t p, const Vec& x, const Vec& y) const;
};

ShapeField shape_field(const GridImmersion& imm, const GeometryOptions& opts = {});

struct NormalFrame {
  NormalField nu1, nu2;
  std::vector<std::size_t> masked;
};

/// Oriented frame nu1 = H/|H|, nu2 = J nu1. Where |H| < h_min the frame is
/// taken from `seed` if given, otherwise transported breadth-first from the
/// nearest valid neighbour. Throws FrameDegeneracy if nothing can seed it.
NormalFrame normal_frame(const ShapeField& shape, double h_min = 1e-8,
                         const NormalField* seed = nullptr);

/// J applied pointwise to a field.
NormalField apply_j(const ShapeField& shape, const NormalField& v);

/// Normal projection applied pointwise to a field.
NormalField normal_projection(const ShapeField& shape, const NormalField& v);

/// Gamma^k_ij of the induced metric from centered differences of g.
/// Indexed as christoffel[p][k](i, j).
Field<std::array<Eigen::Matrix2d, 2>> christoffel(const ShapeField& shape);

// --- integrals -------------------------------------------------------------

/// Riemann sum of f dvol over the periodic grid, in fixed index order.
double integrate(const ShapeField& shape, const ScalarField& f);
double volume(const ShapeField& shape);
double willmore_energy(const ShapeField& shape);
/// L2 inner product of two ambient vector fields against dvol.
double l2_inner(const ShapeField& shape, const NormalField& u, const NormalField& v);

// --- torsion ---------------------------------------------------------------

struct TorsionForm {
  Field<std::array<double, 2>> tau;  ///< tau_i = (nabla_i^perp h, J h), h = H/|H|
  Field<std::array<double, 2>> chi;  ///< chi^i = 2 g^{ij} tau_j (tangent-basis coefficients)
  std::vector<std::size_t> masked;   ///< points where |H| < h_min
};

TorsionForm torsion_form(const ShapeField& shape);

// --- normal bundle calculus ------------------------------------------------

/// Connection Laplacian g^ij (nabla_i nabla_j V - Gamma^k_ij nabla_k V) in the
/// normal bundle. Throws InvalidInput if V leaves the normal plane by more than
/// tol_perp = 1e-6 * |d^2 F| at some point.
NormalField normal_laplacian(const ShapeField& shape, const NormalField& v);

/// Full L2 gradient of the Willmore energy,
/// 2 (Lap^perp H + g^ik g^jl (A_ij, H) A_kl - |H|^2 H / 2).
NormalField willmore_gradient(const ShapeField& shape);

/// Pointwise -2 g^ik g^jl (A_ij, H)(A_kl, JH), the source of the continuity
/// equation for rho = |H|^2.
ScalarField source_term(const ShapeField& shape);

struct EnergyDerivative {
  ScalarField integrand;  ///< source_term * sqrt(det g)
  double integral = 0.0;  ///< d/dt W under the skew-mean-curvature flow
};

EnergyDerivative energy_derivative(const ShapeField& shape);

// --- normal curvature ------------------------------------------------------

/// Node-centred curl d tau = d_0 tau_1 - d_1 tau_0, i.e. the circulation of tau
/// around the 2h x 2h plaquette centred at each node divided by its area.
ScalarField exterior_derivative(const Grid& grid, const Field<std::array<double, 2>>& tau,
                                int order = 2);

struct NormalCurvatureCheck {
  ScalarField dtau;       ///< d tau
  ScalarField r_perp;     ///< normal curvature R^perp_01
  double max_residual = 0.0;  ///< max |d tau + R^perp|
};

/// Compares d tau with the normal curvature obtained from the commutator of
/// normal-projected derivatives acting on nu1, read off against nu2. The
/// curvature sign follows R(X,Y) = nabla_Y nabla_X - nabla_X nabla_Y + nabla_[X,Y],
/// under which -d tau equals the normal curvature. Throws UnsupportedDimension
/// unless dim == 2.
NormalCurvatureCheck normal_curvature_check(const ShapeField& shape);

// --- symplectic pairing ----------------------------------------------------

/// Marsden-Weinstein pairing: integral over parameters of det(u, v, t_1..t_n).
double mw_pairing(const ShapeField& shape, const NormalField& u, const NormalField& v);

}  // namespace smc
