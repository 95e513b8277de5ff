#pragma once

// The one-dimensional stack: binormal flow of closed space curves, Frenet
// data, the Hasimoto map to the cubic NLS, the Da Rios system, the
// barotropic-fluid form and the Madelung transform.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smcflow/grid.hpp"

namespace smc::filament {

using Vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;

inline constexpr int kMinCurveSamples = 32;
inline constexpr double kKappaMin = 1e-8;
inline constexpr double kRhoMin = 1e-10;

/// Closed curve sampled at uniform parameter spacing period/N.
struct ClosedCurve {
  std::vector<Vec3> points;
  double period = 2.0 * std::numbers::pi;

  int size() const { return static_cast<int>(points.size()); }
  double spacing() const { return period / size(); }
};

enum class Stencil { FourthOrder, Spectral };

// --- construction ----------------------------------------------------------

ClosedCurve circle(double radius, int n);
/// Planar curve r(theta) = R (1 + eps cos(k theta)) in the xy-plane, sampled
/// at uniform arclength starting from theta = 0 (quadrature + Newton).
/// Needs |eps| <= 1/(1+k^2), i.e. a convex curve; at equality kappa touches 0.
ClosedCurve perturbed_circle(double radius, double eps, int k, int n);
/// Throws InvalidInput if N < 32, a tangent vanishes or non-neighbour samples
/// come closer than 0.2 x mean spacing.
void validate(const ClosedCurve& c);

ClosedCurve from_immersion(const GridImmersion& imm);
GridImmersion to_immersion(const ClosedCurve& c);

// --- geometry ----------------------------------------------------------------

struct CurveDerivatives {
  std::vector<Vec3> d1, d2, d3;  // with respect to the curve parameter
};
CurveDerivatives derivatives(const ClosedCurve& c, Stencil stencil = Stencil::FourthOrder);

/// Binormal velocity kappa b = g' x g'' / |g'|^3 (parametrization invariant).
std::vector<Vec3> binormal_rhs(const ClosedCurve& c, Stencil stencil = Stencil::FourthOrder);

double length(const ClosedCurve& c, Stencil stencil = Stencil::FourthOrder);
/// Smallest distance between samples that are not neighbours.
double min_separation(const ClosedCurve& c);

struct FrenetData {
  std::vector<double> s;        ///< arclength from sample 0
  std::vector<double> kappa;    ///< curvature
  std::vector<double> tau;      ///< torsion, NaN where masked
  std::vector<char> masked;     ///< kappa < kKappaMin
  double length = 0.0;
  double total_torsion = 0.0;   ///< closed integral of tau ds over unmasked samples
};

FrenetData frenet_data(const ClosedCurve& c, Stencil stencil = Stencil::FourthOrder);
double willmore_1d(const ClosedCurve& c, Stencil stencil = Stencil::FourthOrder);

/// Re-samples the curve at uniform arclength with periodic cubic splines,
/// keeping sample 0 fixed.
ClosedCurve resample_arclength(const ClosedCurve& c);

// --- binormal flow -----------------------------------------------------------

struct FilamentOptions {
  Stencil stencil = Stencil::FourthOrder;
  int resample_every = 10;   ///< 0 disables reparametrization
  int stride = 1;            ///< record every stride-th step
  double speed_cap = 1e8;    ///< blow-up guard on max |velocity|
  double d_min_factor = 0.2; ///< self-intersection guard, times mean spacing
  bool throw_on_abort = true; ///< false: return the trajectory up to the abort
};

struct FilamentTrajectory {
  std::vector<double> times;
  std::vector<ClosedCurve> curves;
  bool aborted = false;
  std::string abort_reason;
};

/// Classical RK4. The step is shrunk so that it divides T exactly.
/// Throws NumericalAbort on self-intersection, NaN or blow-up (unless
/// throw_on_abort is off, in which case the records so far come back).
FilamentTrajectory evolve_filament(const ClosedCurve& c, double dt, double T,
                                   const FilamentOptions& opts = {});

// --- waves -------------------------------------------------------------------

struct WaveField {
  std::vector<cplx> psi;
  double length = 2.0 * std::numbers::pi;

  int size() const { return static_cast<int>(psi.size()); }
  double mass() const;  ///< integral of |psi|^2 dx
};

struct HasimotoResult {
  WaveField wave;
  double holonomy = 0.0;  ///< closed torsion integral reduced to (-pi, pi]
  bool single_valued = true;
};

/// psi(s) = kappa(s) exp(i int_{s0}^{s} tau), evaluated on the cover [0, L)
/// so that changing s0 only changes a global phase; any mismatch across the
/// seam is the reported holonomy.
HasimotoResult hasimoto(const FrenetData& f, int s0 = 0);

struct WaveTrajectory {
  std::vector<double> times;
  std::vector<WaveField> waves;
};

/// Strang split-step for i psi_t + psi'' + |psi|^2 psi / 2 = 0. M must be a
/// power of two. Throws NumericalAbort on NaN.
WaveTrajectory nls_evolve(const WaveField& w, double dt, double T, int stride = 1);

// --- Da Rios and fluid --------------------------------------------------------

struct DaRiosState {
  std::vector<double> kappa, tau;
  double length = 2.0 * std::numbers::pi;
};
DaRiosState darios_state(const FrenetData& f);

struct DaRiosTrajectory {
  std::vector<double> times;
  std::vector<DaRiosState> states;
};

/// Method of lines + RK4 on the uniform arclength grid. Negative dt and T
/// run backwards. Throws NumericalAbort if kappa drops to kKappaMin.
DaRiosTrajectory darios_evolve(const DaRiosState& s, double dt, double T,
                               Stencil stencil = Stencil::FourthOrder, int stride = 1);

struct FluidState {
  std::vector<double> rho, v;
  double length = 2.0 * std::numbers::pi;
  double mass() const;
};
/// rho = kappa^2, v = 2 tau.
FluidState to_fluid(const DaRiosState& s);

struct FluidTrajectory {
  std::vector<double> times;
  std::vector<FluidState> states;
};

/// rho_t + (rho v)' = 0, v_t + v v' + (-rho - 2 sqrt(rho)''/sqrt(rho))' = 0.
/// Throws NumericalAbort on vacuum (rho <= kRhoMin).
FluidTrajectory fluid_evolve(const FluidState& s, double dt, double T,
                             Stencil stencil = Stencil::FourthOrder, int stride = 1);

// --- the four corners -----------------------------------------------------------

/// One solver's curvature profile at the comparison time, or why it has none.
struct Corner {
  std::string name;
  bool ok = false;
  std::string note;  ///< abort / skip reason when !ok
  std::vector<double> kappa;
};

/// Filament (Frenet kappa), Da Rios (kappa), NLS (|psi|) and fluid
/// (sqrt rho), all started from one curve and run to time T with step dt.
/// The NLS corner is skipped when the Hasimoto wave is not single-valued;
/// corners that abort are kept with ok = false.
struct FourCorners {
  double holonomy = 0.0;
  std::array<Corner, 4> corners;
  /// L-inf distance between two profiles; NaN if either corner failed.
  double gap(int i, int j) const;
  /// Largest gap over the pairs of corners that ran.
  double max_gap() const;
};

FourCorners four_corners(const ClosedCurve& c, double dt, double T,
                         Stencil stencil = Stencil::FourthOrder);

// --- Madelung ------------------------------------------------------------------

/// psi = sqrt(rho) exp(i theta / 2). Throws InvalidInput on vacuum.
WaveField madelung(const std::vector<double>& rho, const std::vector<double>& theta,
                   double length);

struct MadelungInverse {
  std::vector<double> rho, theta;  ///< theta = 2 unwrapped arg psi, theta[0] in (-2 pi, 2 pi]
  double holonomy = 0.0;           ///< change of theta once around the loop (a multiple of 4 pi)
};
MadelungInverse madelung_inverse(const WaveField& w);

}  // namespace smc::filament
