#include "smcflow/diffgeo.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "smcflow/errors.hpp"
#include "smcflow/finite_difference.hpp"
#include "smcflow/immersion.hpp"

namespace smc {
namespace {

constexpr double kTolPerpFactor = 1e-6;

Vec unit(int k) {
  Vec e = Vec::Zero();
  e[k] = 1.0;
  return e;
}

}  // namespace

Vec ShapeField::normal_part(std::size_t p, const Vec& v) const {
  const auto& t = tangents[p];
  const auto& gi = metric_inv[p];
  Vec out = v;
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    double coeff = 0.0;
    for (int j = 0; j < n; ++j) coeff += gi(i, j) * v.dot(t[j]);
    out -= coeff * t[i];
  }
  return out;
}

Vec ShapeField::rotate(std::size_t p, const Vec& v) const {
  // J v = c / sqrt(det g) with c_k = det(t_1, .., t_n, e_k, v); c is orthogonal
  // to the tangents and to v, |c| = sqrt(det g) |v^perp|, det(t, c, v) = |c|^2.
  const auto& t = tangents[p];
  Vec c = Vec::Zero();
  if (dim() == 1) {
    const Eigen::Vector3d t3 = t[0].head<3>();
    const Eigen::Vector3d v3 = v.head<3>();
    c.head<3>() = v3.cross(t3);
  } else {
    Eigen::Matrix4d m;
    m.col(0) = t[0];
    m.col(1) = t[1];
    m.col(3) = v;
    for (int k = 0; k < 4; ++k) {
      m.col(2) = unit(k);
      c[k] = m.determinant();
    }
  }
  return c / sqrt_det[p];
}

double ShapeField::contract(std::size_t p, const Vec& x, const Vec& y) const {
  const int n = dim();
  const auto& gi = metric_inv[p];
  // Raise both indices of the scalar forms (A_ij, X) and (A_kl, Y).
  Eigen::Matrix2d ax = Eigen::Matrix2d::Zero(), ay = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ax(i, j) = A(p, i, j).dot(x);
      ay(i, j) = A(p, i, j).dot(y);
    }
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) sum += gi(i, k) * gi(j, l) * ax(i, j) * ay(k, l);
  return sum;
}

ShapeField shape_field(const GridImmersion& imm, const GeometryOptions& opts) {
  validate(imm);
  const Grid& grid = imm.grid;
  const int n = grid.dim;
  const std::size_t np = grid.size();

  ShapeField s;
  s.grid = grid;
  s.order = opts.order;

  std::array<NormalField, 2> d1;
  std::array<NormalField, 3> d2;
  for (int i = 0; i < n; ++i) d1[i] = fd::diff(grid, imm.points, i, opts.order);
  d2[0] = fd::diff2(grid, imm.points, 0, opts.order);
  if (n == 2) {
    d2[1] = fd::mixed(grid, imm.points, 0, 1, opts.order);
    d2[2] = fd::diff2(grid, imm.points, 1, opts.order);
  }

  s.tangents.resize(np);
  s.metric.resize(np);
  s.metric_inv.resize(np);
  s.sqrt_det.resize(np);
  s.second_form.resize(np);
  s.mean_curvature.resize(np);
  s.rho.resize(np);
  s.d2_norm.resize(np);

  for (std::size_t p = 0; p < np; ++p) {
    auto& t = s.tangents[p];
    t[0] = d1[0][p];
    t[1] = n == 2 ? d1[1][p] : Vec::Zero();
    Eigen::Matrix2d g = Eigen::Matrix2d::Identity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = t[i].dot(t[j]);
    const double det = g.determinant();
    if (!(det > opts.g_min)) throw DegenerateImmersion(p, det);
    s.metric[p] = g;
    s.metric_inv[p] = g.inverse();
    s.sqrt_det[p] = std::sqrt(det);

    double d2max = 0.0;
    auto& a = s.second_form[p];
    for (int q = 0; q < 3; ++q) {
      if (n == 1 && q > 0) {
        a[q] = Vec::Zero();
        continue;
      }
      d2max = std::max(d2max, d2[q][p].norm());
      a[q] = s.normal_part(p, d2[q][p]);
    }
    s.d2_norm[p] = d2max;

    Vec h = Vec::Zero();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h += s.metric_inv[p](i, j) * s.A(p, i, j);
    s.mean_curvature[p] = h;
    s.rho[p] = h.squaredNorm();
  }

  if (opts.with_frame) {
    NormalFrame frame = normal_frame(s, opts.h_min);
    s.nu1 = std::move(frame.nu1);
    s.nu2 = std::move(frame.nu2);
    s.masked = std::move(frame.masked);
  }
  return s;
}

NormalFrame normal_frame(const ShapeField& shape, double h_min, const NormalField* seed) {
  const Grid& grid = shape.grid;
  const std::size_t np = shape.size();
  NormalFrame f;
  f.nu1.assign(np, Vec::Zero());
  f.nu2.assign(np, Vec::Zero());
  std::vector<char> assigned(np, 0);
  std::deque<std::size_t> queue;

  for (std::size_t p = 0; p < np; ++p) {
    const double mag = std::sqrt(shape.rho[p]);
    if (mag >= h_min) {
      f.nu1[p] = shape.mean_curvature[p] / mag;
      assigned[p] = 1;
      queue.push_back(p);
    } else {
      f.masked.push_back(p);
      if (seed != nullptr) {
        const Vec v = shape.normal_part(p, (*seed)[p]);
        if (v.norm() > 0.0) {
          f.nu1[p] = v.normalized();
          assigned[p] = 1;
        }
      }
    }
  }
  if (queue.empty() && seed == nullptr)
    throw FrameDegeneracy("|H| < h_min at every grid point and no seed frame was supplied");

  // Breadth-first parallel transport into the masked region.
  while (!queue.empty()) {
    const std::size_t q = queue.front();
    queue.pop_front();
    for (int axis = 0; axis < grid.dim; ++axis)
      for (int off : {-1, 1}) {
        const std::size_t r = grid.shifted(q, axis, off);
        if (assigned[r]) continue;
        const Vec v = shape.normal_part(r, f.nu1[q]);
        if (v.norm() == 0.0) continue;
        f.nu1[r] = v.normalized();
        assigned[r] = 1;
        queue.push_back(r);
      }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!assigned[p]) throw FrameDegeneracy("normal frame could not be extended to index " +
                                            std::to_string(p));
    f.nu2[p] = shape.rotate(p, f.nu1[p]);
  }
  return f;
}

NormalField apply_j(const ShapeField& shape, const NormalField& v) {
  NormalField out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) out[p] = shape.rotate(p, v[p]);
  return out;
}

NormalField normal_projection(const ShapeField& shape, const NormalField& v) {
  NormalField out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) out[p] = shape.normal_part(p, v[p]);
  return out;
}

Field<std::array<Eigen::Matrix2d, 2>> christoffel(const ShapeField& shape) {
  const Grid& grid = shape.grid;
  const int n = grid.dim;
  const std::size_t np = shape.size();
  // dg[c](a, b) = d_c g_ab
  std::array<Field<Eigen::Matrix2d>, 2> dg;
  for (int c = 0; c < n; ++c) dg[c] = fd::diff(grid, shape.metric, c, shape.order);

  Field<std::array<Eigen::Matrix2d, 2>> gamma(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& gi = shape.metric_inv[p];
    for (int k = 0; k < 2; ++k) {
      Eigen::Matrix2d gk = Eigen::Matrix2d::Zero();
      if (k < n) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double sum = 0.0;
            for (int l = 0; l < n; ++l)
              sum += gi(k, l) * (dg[i][p](j, l) + dg[j][p](i, l) - dg[l][p](i, j));
            gk(i, j) = 0.5 * sum;
          }
      }
      gamma[p][k] = gk;
    }
  }
  return gamma;
}

double integrate(const ShapeField& shape, const ScalarField& f) {
  double sum = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) sum += f[p] * shape.sqrt_det[p];
  return sum * shape.grid.cell_volume();
}

double volume(const ShapeField& shape) {
  return integrate(shape, ScalarField(shape.size(), 1.0));
}

double willmore_energy(const ShapeField& shape) { return integrate(shape, shape.rho); }

double l2_inner(const ShapeField& shape, const NormalField& u, const NormalField& v) {
  ScalarField f(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) f[p] = u[p].dot(v[p]);
  return integrate(shape, f);
}

TorsionForm torsion_form(const ShapeField& shape) {
  if (shape.nu1.empty()) throw InvalidInput("torsion_form needs a shape field with a normal frame");
  const Grid& grid = shape.grid;
  const int n = grid.dim;
  const std::size_t np = shape.size();
  TorsionForm tf;
  tf.tau.assign(np, {0.0, 0.0});
  tf.chi.assign(np, {0.0, 0.0});
  tf.masked = shape.masked;
  for (int i = 0; i < n; ++i) {
    const NormalField dh = fd::diff(grid, shape.nu1, i, shape.order);
    for (std::size_t p = 0; p < np; ++p)
      tf.tau[p][i] = shape.normal_part(p, dh[p]).dot(shape.nu2[p]);
  }
  for (std::size_t p = 0; p < np; ++p)
    for (int i = 0; i < n; ++i) {
      double c = 0.0;
      for (int j = 0; j < n; ++j) c += shape.metric_inv[p](i, j) * tf.tau[p][j];
      tf.chi[p][i] = 2.0 * c;
    }
  return tf;
}

NormalField normal_laplacian(const ShapeField& shape, const NormalField& v) {
  const Grid& grid = shape.grid;
  const int n = grid.dim;
  const std::size_t np = shape.size();
  for (std::size_t p = 0; p < np; ++p) {
    const double tangential = (v[p] - shape.normal_part(p, v[p])).norm();
    if (tangential > kTolPerpFactor * std::max(shape.d2_norm[p], 1.0) * std::max(v[p].norm(), 1.0))
      throw InvalidInput("normal_laplacian: field is not normal at grid index " +
                         std::to_string(p));
  }

  std::array<NormalField, 2> w;  // nabla^perp_j V
  for (int j = 0; j < n; ++j) w[j] = normal_projection(shape, fd::diff(grid, v, j, shape.order));
  const auto gamma = christoffel(shape);

  NormalField out(np, Vec::Zero());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const NormalField dw = fd::diff(grid, w[j], i, shape.order);
      for (std::size_t p = 0; p < np; ++p) {
        Vec hess = shape.normal_part(p, dw[p]);
        for (int k = 0; k < n; ++k) hess -= gamma[p][k](i, j) * w[k][p];
        out[p] += shape.metric_inv[p](i, j) * hess;
      }
    }
  return out;
}

NormalField willmore_gradient(const ShapeField& shape) {
  const std::size_t np = shape.size();
  const int n = shape.dim();
  NormalField grad = normal_laplacian(shape, shape.mean_curvature);
  for (std::size_t p = 0; p < np; ++p) {
    const Vec& h = shape.mean_curvature[p];
    const auto& gi = shape.metric_inv[p];
    // g^ik g^jl (A_ij, H) A_kl
    Vec quad = Vec::Zero();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double ah = shape.A(p, i, j).dot(h);
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) quad += gi(i, k) * gi(j, l) * ah * shape.A(p, k, l);
      }
    grad[p] = 2.0 * (grad[p] + quad - 0.5 * shape.rho[p] * h);
  }
  return grad;
}

ScalarField source_term(const ShapeField& shape) {
  ScalarField out(shape.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Vec& h = shape.mean_curvature[p];
    out[p] = -2.0 * shape.contract(p, h, shape.rotate(p, h));
  }
  return out;
}

EnergyDerivative energy_derivative(const ShapeField& shape) {
  EnergyDerivative e;
  const ScalarField src = source_term(shape);
  e.integrand.resize(src.size());
  for (std::size_t p = 0; p < src.size(); ++p) e.integrand[p] = src[p] * shape.sqrt_det[p];
  e.integral = integrate(shape, src);
  return e;
}

ScalarField exterior_derivative(const Grid& grid, const Field<std::array<double, 2>>& tau,
                                int order) {
  if (grid.dim != 2) throw UnsupportedDimension("exterior derivative of 1-forms needs dim == 2");
  ScalarField t0(tau.size()), t1(tau.size());
  for (std::size_t p = 0; p < tau.size(); ++p) {
    t0[p] = tau[p][0];
    t1[p] = tau[p][1];
  }
  const ScalarField d0t1 = fd::diff(grid, t1, 0, order);
  const ScalarField d1t0 = fd::diff(grid, t0, 1, order);
  ScalarField out(tau.size());
  for (std::size_t p = 0; p < tau.size(); ++p) out[p] = d0t1[p] - d1t0[p];
  return out;
}

NormalCurvatureCheck normal_curvature_check(const ShapeField& shape) {
  if (shape.dim() != 2)
    throw UnsupportedDimension("normal curvature check is defined for 2-dimensional grids only");
  const Grid& grid = shape.grid;
  const std::size_t np = shape.size();
  const TorsionForm tf = torsion_form(shape);

  NormalCurvatureCheck out;
  out.dtau = exterior_derivative(grid, tf.tau, shape.order);

  std::array<NormalField, 2> w;
  for (int j = 0; j < 2; ++j)
    w[j] = normal_projection(shape, fd::diff(grid, shape.nu1, j, shape.order));
  const NormalField d0w1 = fd::diff(grid, w[1], 0, shape.order);
  const NormalField d1w0 = fd::diff(grid, w[0], 1, shape.order);

  out.r_perp.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    // (nabla_1 nabla_0 - nabla_0 nabla_1) nu1, read off against nu2
    const Vec comm = shape.normal_part(p, d1w0[p] - d0w1[p]);
    out.r_perp[p] = comm.dot(shape.nu2[p]);
    out.max_residual = std::max(out.max_residual, std::abs(out.dtau[p] + out.r_perp[p]));
  }
  return out;
}

double mw_pairing(const ShapeField& shape, const NormalField& u, const NormalField& v) {
  double sum = 0.0;
  for (std::size_t p = 0; p < shape.size(); ++p) {
    const auto& t = shape.tangents[p];
    double det = 0.0;
    if (shape.dim() == 1) {
      Eigen::Matrix3d m;
      m.col(0) = u[p].head<3>();
      m.col(1) = v[p].head<3>();
      m.col(2) = t[0].head<3>();
      det = m.determinant();
    } else {
      Eigen::Matrix4d m;
      m.col(0) = u[p];
      m.col(1) = v[p];
      m.col(2) = t[0];
      m.col(3) = t[1];
      det = m.determinant();
    }
    sum += det;
  }
  return sum * shape.grid.cell_volume();
}

}  // namespace smc
