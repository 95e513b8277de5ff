#pragma once

// Skew-mean-curvature evolution dF/dt = -J H of periodic grid immersions and
// the residual diagnostics built on top of a recorded trajectory.
//
// Residuals at record k use the records k-1, k, k+1 (centered in time), so
// they need equally spaced records; the first and last records have none.
// Markers are Lagrangian: the velocity is normal, so marker time derivatives
// are taken as normal time derivatives without a tangential correction.

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "smcflow/diffgeo.hpp"
#include "smcflow/grid.hpp"

namespace smc {

/// -J H at every grid point.
NormalField smc_rhs(const GridImmersion& imm, const GeometryOptions& opts = {});

struct MembraneRecord {
  double t = 0.0;
  double willmore = 0.0;
  double volume = 0.0;
  double a_extracted = std::numeric_limits<double>::quiet_NaN();
  double b_extracted = std::numeric_limits<double>::quiet_NaN();
  double max_continuity_residual = std::numeric_limits<double>::quiet_NaN();
  double max_momentum_residual = std::numeric_limits<double>::quiet_NaN();
  double energy_gap = std::numeric_limits<double>::quiet_NaN();
};

/// Which balance law a residual checks. `Printed` assembles the published
/// equations verbatim. `Derived` uses the laws that follow from dF/dt = -J H
/// with tau = (nabla h, J h): the transport terms change sign, and the vector
/// form of the density equation carries the full J h component.
enum class EquationForm { Printed, Derived };

struct MembraneOptions {
  GeometryOptions geometry;  ///< stencil order etc. for the flow and the diagnostics
  int stride = 1;            ///< record every stride-th step
  bool residuals = true;     ///< fill the residual columns of interior records
  EquationForm equations = EquationForm::Printed;  ///< used for the residual columns
  bool throw_on_abort = true;  ///< otherwise return the trajectory up to the failure
};

struct MembraneTrajectory {
  std::vector<double> times;
  std::vector<GridImmersion> snapshots;
  std::vector<MembraneRecord> records;
  GeometryOptions geometry;
  double max_frame_rotation = 0.0;  ///< largest angle of nu1 between consecutive records
  bool aborted = false;
  std::string abort_reason;
};

/// Classical RK4 with the step shrunk to divide T. Throws NumericalAbort on
/// NaN or a degenerate metric (unless throw_on_abort is off).
MembraneTrajectory evolve_membrane(const GridImmersion& imm, double dt, double T,
                                   const MembraneOptions& opts = {});

/// Trajectory sampled from a closed-form family, e.g. the exact torus
/// product solution; `times` must be equally spaced.
template <class F>
MembraneTrajectory sampled_trajectory(const std::vector<double>& times, F&& immersion_at,
                                      const GeometryOptions& geometry = {}) {
  MembraneTrajectory tr;
  tr.geometry = geometry;
  for (double t : times) {
    tr.times.push_back(t);
    tr.snapshots.push_back(immersion_at(t));
    tr.records.push_back(MembraneRecord{.t = t});
  }
  return tr;
}

// --- residuals --------------------------------------------------------------

enum class DivergenceForm {
  Conservative,  ///< (1/sqrt g) d_i (sqrt g rho chi^i), rho_t from rho snapshots
  Expanded,      ///< 2 rho div tau + chi^i d_i rho with d rho = 2 (dH, H), rho_t = 2 (H_t, H)
};

struct ContinuityResidual {
  ScalarField drho_dt, divergence, source, residual;
  std::vector<std::size_t> masked;  ///< excluded from max_abs
  double max_abs = 0.0;
};

/// Printed: d_t rho + div(rho chi) - source. Derived: d_t rho - div(rho chi) - source.
ContinuityResidual continuity_residual(const MembraneTrajectory& tr, std::size_t k,
                                       DivergenceForm div = DivergenceForm::Conservative,
                                       EquationForm form = EquationForm::Printed);

struct CorollaryResidual {
  NormalField residual;
  std::vector<std::size_t> masked;
  double max_norm = 0.0;
  double max_h = 0.0;   ///< largest |(residual, h)|
  double max_jh = 0.0;  ///< largest |(residual, J h)|
};

/// Printed: d_t^perp H + 2 g^ij tau_i nabla_j H + (div tau) H + g^ik g^jl (A_kl, JH) A_ij.
/// Derived: d_t^perp H - 2 g^ij tau_i nabla_j H - (div tau) H
///          + (Lap |H| + |H| |tau|^2) J h + g^ik g^jl (A_kl, JH) A_ij.
CorollaryResidual corollary_residual(const MembraneTrajectory& tr, std::size_t k,
                                     EquationForm form = EquationForm::Printed);

using Covector = std::array<double, 2>;

/// The individual terms of the torsion momentum balance at record k.
struct MomentumTerms {
  Field<Covector> dtau_dt;    ///< d_t tau_i
  Field<Covector> grad_tau2;  ///< d_i (g^jk tau_j tau_k)
  Field<Covector> grad_q;     ///< d_i (Lap |H| / |H|), Laplace-Beltrami
  Field<Covector> grad_G;     ///< d_i (g^mk g^jl (A_mj, JH)(A_kl, JH) / |H|^2)
  Field<Covector> printed_tail;  ///< g^kl ((A_ik,H)(d_l JH,JH) - (A_il,JH)(d_k JH,H)) / |H|^2
  Field<Covector> shape_h;    ///< g^kl (A_ik, h) d_l |H|
  Field<Covector> shape_e;    ///< |H| g^kl (A_il, J h) tau_k
  std::vector<std::size_t> masked;
};

MomentumTerms momentum_terms(const MembraneTrajectory& tr, std::size_t k);

struct MomentumResidual {
  Field<Covector> residual;
  std::vector<std::size_t> masked;
  double max_abs = 0.0;  ///< max over unmasked points of sqrt(g^ij r_i r_j)
};

/// Printed: d_t tau + grad|tau|^2 - grad q + grad G - printed_tail.
/// Derived: d_t tau - grad|tau|^2 + grad q + grad G + shape_h + shape_e.
MomentumResidual momentum_residual(const MembraneTrajectory& tr, std::size_t k,
                                   EquationForm form = EquationForm::Printed);

struct EnergyIdentity {
  double lhs = 0.0;  ///< centered difference of the Willmore energy
  double rhs = 0.0;  ///< -2 int (A, H)(A, JH) dvol at record k
  double gap = 0.0;  ///< |lhs - rhs|
};

EnergyIdentity energy_identity_check(const MembraneTrajectory& tr, std::size_t k);

/// Fills the residual columns of every interior record.
void fill_residuals(MembraneTrajectory& tr, EquationForm form = EquationForm::Printed);

}  // namespace smc
