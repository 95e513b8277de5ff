#include "smcflow/membrane.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "smcflow/errors.hpp"
#include "smcflow/finite_difference.hpp"
#include "smcflow/immersion.hpp"

namespace smc {

namespace {

GeometryOptions without_frame(GeometryOptions g) {
  g.with_frame = false;
  return g;
}

GeometryOptions with_frame(GeometryOptions g) {
  g.with_frame = true;
  return g;
}

bool all_finite(const std::vector<Vec>& v) {
  return std::all_of(v.begin(), v.end(), [](const Vec& x) { return x.allFinite(); });
}

std::vector<Vec> shifted_state(const std::vector<Vec>& x, const std::vector<Vec>& k, double h) {
  std::vector<Vec> out(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) out[p] = x[p] + h * k[p];
  return out;
}

// Three consecutive records around k, shared by all residuals.
struct Window {
  const ShapeField& prev;
  const ShapeField& mid;
  const ShapeField& next;
  double two_dt;
};

void check_window(const MembraneTrajectory& tr, std::size_t k) {
  if (k == 0 || k + 1 >= tr.snapshots.size())
    throw InvalidInput("residuals need records on both sides of record " + std::to_string(k));
  const double d0 = tr.times[k] - tr.times[k - 1];
  const double d1 = tr.times[k + 1] - tr.times[k];
  if (!(d0 > 0.0) || std::abs(d1 - d0) > 1e-9 * d0)
    throw InvalidInput("residuals need equally spaced records around record " + std::to_string(k));
}

std::vector<std::size_t> merge_masks(const Window& w) {
  std::set<std::size_t> s(w.mid.masked.begin(), w.mid.masked.end());
  s.insert(w.prev.masked.begin(), w.prev.masked.end());
  s.insert(w.next.masked.begin(), w.next.masked.end());
  return {s.begin(), s.end()};
}

std::vector<char> mask_flags(std::size_t n, const std::vector<std::size_t>& masked) {
  std::vector<char> f(n, 0);
  for (std::size_t p : masked) f[p] = 1;
  return f;
}

// (1/sqrt g) d_i (sqrt g X^i) for a vector field given by its coefficients.
ScalarField divergence(const ShapeField& s, const Field<Covector>& x_up) {
  const std::size_t np = s.size();
  ScalarField out(np, 0.0);
  for (int i = 0; i < s.dim(); ++i) {
    ScalarField dens(np);
    for (std::size_t p = 0; p < np; ++p) dens[p] = s.sqrt_det[p] * x_up[p][i];
    const ScalarField d = fd::diff(s.grid, dens, i, s.order);
    for (std::size_t p = 0; p < np; ++p) out[p] += d[p];
  }
  for (std::size_t p = 0; p < np; ++p) out[p] /= s.sqrt_det[p];
  return out;
}

Field<Covector> raise(const ShapeField& s, const Field<Covector>& w) {
  Field<Covector> out(w.size(), Covector{0.0, 0.0});
  for (std::size_t p = 0; p < w.size(); ++p)
    for (int i = 0; i < s.dim(); ++i)
      for (int j = 0; j < s.dim(); ++j) out[p][i] += s.metric_inv[p](i, j) * w[p][j];
  return out;
}

Field<Covector> gradient(const ShapeField& s, const ScalarField& f) {
  Field<Covector> out(f.size(), Covector{0.0, 0.0});
  for (int i = 0; i < s.dim(); ++i) {
    const ScalarField d = fd::diff(s.grid, f, i, s.order);
    for (std::size_t p = 0; p < f.size(); ++p) out[p][i] = d[p];
  }
  return out;
}

ScalarField laplace_beltrami(const ShapeField& s, const ScalarField& f) {
  return divergence(s, raise(s, gradient(s, f)));
}

double covector_norm(const ShapeField& s, std::size_t p, const Covector& r) {
  double acc = 0.0;
  for (int i = 0; i < s.dim(); ++i)
    for (int j = 0; j < s.dim(); ++j) acc += s.metric_inv[p](i, j) * r[i] * r[j];
  return std::sqrt(std::max(acc, 0.0));
}

// (A_ij, X) as a matrix.
Eigen::Matrix2d form_against(const ShapeField& s, std::size_t p, const Vec& x) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  for (int i = 0; i < s.dim(); ++i)
    for (int j = 0; j < s.dim(); ++j) m(i, j) = s.A(p, i, j).dot(x);
  return m;
}

ScalarField div_tau(const ShapeField& s, const TorsionForm& tf) { return divergence(s, raise(s, tf.tau)); }

ContinuityResidual continuity_impl(const Window& w, DivergenceForm div, EquationForm form) {
  const ShapeField& s = w.mid;
  const std::size_t np = s.size();
  const TorsionForm tf = torsion_form(s);
  ContinuityResidual r;
  r.masked = merge_masks(w);
  r.source = source_term(s);
  r.drho_dt.resize(np);
  if (div == DivergenceForm::Conservative) {
    for (std::size_t p = 0; p < np; ++p) r.drho_dt[p] = (w.next.rho[p] - w.prev.rho[p]) / w.two_dt;
    Field<Covector> flux(np);
    for (std::size_t p = 0; p < np; ++p)
      flux[p] = {s.rho[p] * tf.chi[p][0], s.rho[p] * tf.chi[p][1]};
    r.divergence = divergence(s, flux);
  } else {
    const NormalField& H = s.mean_curvature;
    for (std::size_t p = 0; p < np; ++p)
      r.drho_dt[p] = 2.0 * (w.next.mean_curvature[p] - w.prev.mean_curvature[p]).dot(H[p]) / w.two_dt;
    const ScalarField dt = div_tau(s, tf);
    r.divergence.assign(np, 0.0);
    for (int j = 0; j < s.dim(); ++j) {
      const NormalField dH = fd::diff(s.grid, H, j, s.order);
      for (std::size_t p = 0; p < np; ++p) r.divergence[p] += tf.chi[p][j] * 2.0 * dH[p].dot(H[p]);
    }
    for (std::size_t p = 0; p < np; ++p) r.divergence[p] += 2.0 * s.rho[p] * dt[p];
  }
  const auto masked = mask_flags(np, r.masked);
  r.residual.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double transport = form == EquationForm::Printed ? r.divergence[p] : -r.divergence[p];
    r.residual[p] = r.drho_dt[p] + transport - r.source[p];
    if (!masked[p]) r.max_abs = std::max(r.max_abs, std::abs(r.residual[p]));
  }
  return r;
}

CorollaryResidual corollary_impl(const Window& w, EquationForm form) {
  const ShapeField& s = w.mid;
  const std::size_t np = s.size();
  const int n = s.dim();
  const TorsionForm tf = torsion_form(s);
  const ScalarField dt = div_tau(s, tf);
  const NormalField& H = s.mean_curvature;
  std::array<NormalField, 2> dH;
  for (int j = 0; j < n; ++j) dH[j] = fd::diff(s.grid, H, j, s.order);
  const double sgn = form == EquationForm::Printed ? 1.0 : -1.0;
  ScalarField absH(np), lap;
  for (std::size_t p = 0; p < np; ++p) absH[p] = std::sqrt(s.rho[p]);
  if (form == EquationForm::Derived) lap = laplace_beltrami(s, absH);

  CorollaryResidual r;
  r.masked = merge_masks(w);
  const auto masked = mask_flags(np, r.masked);
  r.residual.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& gi = s.metric_inv[p];
    Vec res = s.normal_part(p, (w.next.mean_curvature[p] - w.prev.mean_curvature[p]) / w.two_dt);
    double tau2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        res += sgn * 2.0 * gi(i, j) * tf.tau[p][i] * s.normal_part(p, dH[j][p]);
        tau2 += gi(i, j) * tf.tau[p][i] * tf.tau[p][j];
      }
    res += sgn * dt[p] * H[p];
    if (form == EquationForm::Derived) res += (lap[p] + absH[p] * tau2) * s.nu2[p];
    const Eigen::Matrix2d a = form_against(s, p, s.rotate(p, H[p]));
    const Eigen::Matrix2d up = gi * a * gi;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) res += up(i, j) * s.A(p, i, j);
    r.residual[p] = res;
    if (masked[p]) continue;
    r.max_norm = std::max(r.max_norm, res.norm());
    r.max_h = std::max(r.max_h, std::abs(res.dot(s.nu1[p])));
    r.max_jh = std::max(r.max_jh, std::abs(res.dot(s.nu2[p])));
  }
  return r;
}

MomentumTerms momentum_impl(const Window& w) {
  const ShapeField& s = w.mid;
  const std::size_t np = s.size();
  const int n = s.dim();
  const TorsionForm tf = torsion_form(s);
  const TorsionForm tp = torsion_form(w.prev);
  const TorsionForm tn = torsion_form(w.next);
  const NormalField& H = s.mean_curvature;

  ScalarField absH(np), tau2(np), G(np);
  NormalField JH(np);
  for (std::size_t p = 0; p < np; ++p) {
    absH[p] = std::sqrt(s.rho[p]);
    JH[p] = s.rotate(p, H[p]);
    const auto& gi = s.metric_inv[p];
    double t2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t2 += gi(i, j) * tf.tau[p][i] * tf.tau[p][j];
    tau2[p] = t2;
    G[p] = s.contract(p, JH[p], JH[p]) / s.rho[p];
  }
  const ScalarField lap = laplace_beltrami(s, absH);
  ScalarField q(np);
  for (std::size_t p = 0; p < np; ++p) q[p] = lap[p] / absH[p];
  const Field<Covector> dabsH = gradient(s, absH);
  std::array<NormalField, 2> dJH;
  for (int l = 0; l < n; ++l) dJH[l] = fd::diff(s.grid, JH, l, s.order);

  MomentumTerms m;
  m.masked = merge_masks(w);
  m.grad_tau2 = gradient(s, tau2);
  m.grad_q = gradient(s, q);
  m.grad_G = gradient(s, G);
  m.dtau_dt.assign(np, Covector{0.0, 0.0});
  m.printed_tail.assign(np, Covector{0.0, 0.0});
  m.shape_h.assign(np, Covector{0.0, 0.0});
  m.shape_e.assign(np, Covector{0.0, 0.0});
  for (std::size_t p = 0; p < np; ++p) {
    const auto& gi = s.metric_inv[p];
    const Eigen::Matrix2d aH = form_against(s, p, H[p]);
    const Eigen::Matrix2d aJH = form_against(s, p, JH[p]);
    for (int i = 0; i < n; ++i) {
      m.dtau_dt[p][i] = (tn.tau[p][i] - tp.tau[p][i]) / w.two_dt;
      double tail = 0.0, sh = 0.0, se = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          tail += gi(k, l) * (aH(i, k) * dJH[l][p].dot(JH[p]) - aJH(i, l) * dJH[k][p].dot(H[p]));
          sh += gi(k, l) * aH(i, k) / absH[p] * dabsH[p][l];
          se += gi(k, l) * aJH(i, l) * tf.tau[p][k];
        }
      m.printed_tail[p][i] = tail / s.rho[p];
      m.shape_h[p][i] = sh;
      m.shape_e[p][i] = se;
    }
  }
  return m;
}

MomentumResidual momentum_from_terms(const ShapeField& s, const MomentumTerms& m, EquationForm form) {
  const std::size_t np = s.size();
  MomentumResidual r;
  r.masked = m.masked;
  const auto masked = mask_flags(np, r.masked);
  r.residual.assign(np, Covector{0.0, 0.0});
  for (std::size_t p = 0; p < np; ++p) {
    for (int i = 0; i < s.dim(); ++i) {
      if (form == EquationForm::Printed)
        r.residual[p][i] = m.dtau_dt[p][i] + m.grad_tau2[p][i] - m.grad_q[p][i] + m.grad_G[p][i] -
                           m.printed_tail[p][i];
      else
        r.residual[p][i] = m.dtau_dt[p][i] - m.grad_tau2[p][i] + m.grad_q[p][i] + m.grad_G[p][i] +
                           m.shape_h[p][i] + m.shape_e[p][i];
    }
    if (!masked[p]) r.max_abs = std::max(r.max_abs, covector_norm(s, p, r.residual[p]));
  }
  return r;
}

EnergyIdentity energy_impl(const Window& w) {
  EnergyIdentity e;
  e.lhs = (willmore_energy(w.next) - willmore_energy(w.prev)) / w.two_dt;
  e.rhs = energy_derivative(w.mid).integral;
  e.gap = std::abs(e.lhs - e.rhs);
  return e;
}

// Builds the shape fields around k for one-off residual calls.
struct OwnedWindow {
  ShapeField prev, mid, next;
  double two_dt;
  OwnedWindow(const MembraneTrajectory& tr, std::size_t k) {
    check_window(tr, k);
    const GeometryOptions g = with_frame(tr.geometry);
    prev = shape_field(tr.snapshots[k - 1], g);
    mid = shape_field(tr.snapshots[k], g);
    next = shape_field(tr.snapshots[k + 1], g);
    two_dt = tr.times[k + 1] - tr.times[k - 1];
  }
  Window view() const { return {prev, mid, next, two_dt}; }
};

}  // namespace

NormalField smc_rhs(const GridImmersion& imm, const GeometryOptions& opts) {
  const ShapeField s = shape_field(imm, without_frame(opts));
  NormalField v(s.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = -s.rotate(p, s.mean_curvature[p]);
  return v;
}

MembraneTrajectory evolve_membrane(const GridImmersion& imm, double dt, double T,
                                   const MembraneOptions& opts) {
  validate(imm);
  if (!(dt > 0.0) || !(T >= 0.0) || !std::isfinite(T))
    throw InvalidInput("evolve_membrane needs dt > 0 and finite T >= 0");
  if (opts.stride < 1) throw InvalidInput("stride must be at least 1");

  MembraneTrajectory tr;
  tr.geometry = with_frame(opts.geometry);
  const GeometryOptions flow = without_frame(opts.geometry);
  const long steps = T == 0.0 ? 0 : static_cast<long>(std::ceil(T / dt - 1e-9));
  const double h = steps == 0 ? 0.0 : T / static_cast<double>(steps);

  NormalField prev_frame;
  auto record = [&](const GridImmersion& x, double t) {
    const ShapeField s = shape_field(x, tr.geometry);
    MembraneRecord r;
    r.t = t;
    r.willmore = willmore_energy(s);
    r.volume = volume(s);
    if (x.dim() == 2 && x.ambient_dim() == 4) std::tie(r.a_extracted, r.b_extracted) = extract_radii(x);
    if (!prev_frame.empty())
      for (std::size_t p = 0; p < s.size(); ++p)
        tr.max_frame_rotation = std::max(
            tr.max_frame_rotation, std::acos(std::clamp(prev_frame[p].dot(s.nu1[p]), -1.0, 1.0)));
    prev_frame = s.nu1;
    tr.times.push_back(t);
    tr.snapshots.push_back(x);
    tr.records.push_back(r);
  };

  GridImmersion x = imm;
  record(x, 0.0);
  double t = 0.0;
  for (long step = 1; step <= steps; ++step) {
    try {
      const auto k1 = smc_rhs(x, flow);
      GridImmersion y = x;
      y.points = shifted_state(x.points, k1, 0.5 * h);
      const auto k2 = smc_rhs(y, flow);
      y.points = shifted_state(x.points, k2, 0.5 * h);
      const auto k3 = smc_rhs(y, flow);
      y.points = shifted_state(x.points, k3, h);
      const auto k4 = smc_rhs(y, flow);
      for (std::size_t p = 0; p < y.points.size(); ++p)
        y.points[p] = x.points[p] + h / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
      if (!all_finite(y.points)) throw NumericalAbort("non-finite membrane state", t);
      const double t_next = step == steps ? T : step * h;
      if (step % opts.stride == 0 || step == steps) record(y, t_next);
      x = std::move(y);
      t = t_next;
    } catch (const NumericalAbort& e) {
      if (opts.throw_on_abort) throw;
      tr.aborted = true;
      tr.abort_reason = e.what();
      break;
    } catch (const Error& e) {
      if (opts.throw_on_abort) throw NumericalAbort(e.what(), t);
      tr.aborted = true;
      tr.abort_reason = NumericalAbort(e.what(), t).what();
      break;
    }
  }
  if (opts.residuals) fill_residuals(tr, opts.equations);
  return tr;
}

ContinuityResidual continuity_residual(const MembraneTrajectory& tr, std::size_t k, DivergenceForm div,
                                       EquationForm form) {
  const OwnedWindow w(tr, k);
  return continuity_impl(w.view(), div, form);
}

CorollaryResidual corollary_residual(const MembraneTrajectory& tr, std::size_t k, EquationForm form) {
  const OwnedWindow w(tr, k);
  return corollary_impl(w.view(), form);
}

MomentumTerms momentum_terms(const MembraneTrajectory& tr, std::size_t k) {
  const OwnedWindow w(tr, k);
  return momentum_impl(w.view());
}

MomentumResidual momentum_residual(const MembraneTrajectory& tr, std::size_t k, EquationForm form) {
  const OwnedWindow w(tr, k);
  return momentum_from_terms(w.mid, momentum_impl(w.view()), form);
}

EnergyIdentity energy_identity_check(const MembraneTrajectory& tr, std::size_t k) {
  const OwnedWindow w(tr, k);
  return energy_impl(w.view());
}

void fill_residuals(MembraneTrajectory& tr, EquationForm form) {
  const std::size_t n = tr.snapshots.size();
  if (n < 3) return;
  std::vector<ShapeField> shapes;
  shapes.reserve(n);
  try {
    for (const auto& x : tr.snapshots) shapes.push_back(shape_field(x, with_frame(tr.geometry)));
  } catch (const Error&) {
    return;  // residual columns stay NaN
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    try {
      check_window(tr, k);
    } catch (const InvalidInput&) {
      continue;
    }
    const Window w{shapes[k - 1], shapes[k], shapes[k + 1], tr.times[k + 1] - tr.times[k - 1]};
    MembraneRecord& r = tr.records[k];
    r.energy_gap = energy_impl(w).gap;
    try {
      r.max_continuity_residual = continuity_impl(w, DivergenceForm::Conservative, form).max_abs;
      r.max_momentum_residual = momentum_from_terms(shapes[k], momentum_impl(w), form).max_abs;
    } catch (const Error&) {
    }
  }
}

}  // namespace smc
