#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "smcflow/diffgeo.hpp"
#include "smcflow/errors.hpp"
#include "smcflow/finite_difference.hpp"
#include "smcflow/immersion.hpp"
#include "smcflow/snapshot_io.hpp"
#include "test_support.hpp"

using namespace smc;
using namespace smc::testing;

namespace {

ShapeField torus_shape(double a, double b, int n, int order = 2) {
  return shape_field(build_immersion(TorusSpec{a, b}, {n, n}), {.order = order});
}

// Max over the grid of |H - (-(1/a) n1 - (1/b) n2)|.
double torus_h_error(double a, double b, int n) {
  const ShapeField s = torus_shape(a, b, n);
  double err = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const Vec exact = -torus_n1(s.grid, p) / a - torus_n2(s.grid, p) / b;
    err = std::max(err, (s.mean_curvature[p] - exact).norm());
  }
  return err;
}

double h2(int n) {
  const double h = 2.0 * kPi / n;
  return h * h;
}

}  // namespace

TEST_SUITE("build_immersion") {
  TEST_CASE("torus product points lie on the sphere of radius sqrt(a^2+b^2)") {
    const auto imm = build_immersion(TorusSpec{1.0, 1.0}, {16, 16});
    CHECK(imm.points.size() == 256);
    CHECK(imm.ambient_dim() == 4);
    for (const Vec& x : imm.points) CHECK(x.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("circle is a curve in R^3 of constant radius") {
    const auto imm = build_immersion(CircleSpec{2.0}, {64, 0});
    CHECK(imm.dim() == 1);
    CHECK(imm.ambient_dim() == 3);
    for (const Vec& x : imm.points) {
      CHECK(x.norm() == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(x[3] == 0.0);
    }
  }

  TEST_CASE("perturbed torus stays within eps*sqrt(2) of the torus product") {
    const auto pert = build_immersion(PerturbedTorusSpec{1.0, 2.0, 0.05, 2, 3}, {64, 64});
    const auto base = build_immersion(TorusSpec{1.0, 2.0}, {64, 64});
    double dmax = 0.0;
    for (std::size_t p = 0; p < pert.points.size(); ++p)
      dmax = std::max(dmax, (pert.points[p] - base.points[p]).norm());
    CHECK(dmax <= 0.05 * std::sqrt(2.0) + 1e-15);
    CHECK(dmax > 0.04);
  }

  TEST_CASE("degenerate specs are rejected") {
    CHECK_THROWS_AS(build_immersion(TorusSpec{0.0, 1.0}, {16, 16}), InvalidInput);
    CHECK_THROWS_AS(build_immersion(TorusSpec{1.0, -1.0}, {16, 16}), InvalidInput);
    CHECK_THROWS_AS(build_immersion(PerturbedTorusSpec{1.0, 2.0, 0.5, 2, 3}, {16, 16}), InvalidInput);
    CHECK_THROWS_AS(build_immersion(CircleSpec{1.0}, {4, 0}), InvalidInput);
    CHECK_THROWS_AS(build_immersion(TorusSpec{1.0, 1.0}, {16, 7}), InvalidInput);
  }

  TEST_CASE("surface spec parsing") {
    CHECK(std::holds_alternative<CircleSpec>(parse_surface_spec("circle(2)")));
    const auto t = std::get<TorusSpec>(parse_surface_spec("torus_product(1, 2)"));
    CHECK(t.b == 2.0);
    const auto pt = std::get<PerturbedTorusSpec>(parse_surface_spec("perturbed_torus(1,2,0.05,2,3)"));
    CHECK(pt.k2 == 3);
    CHECK_THROWS_AS(parse_surface_spec("sphere(1)"), InvalidInput);
    CHECK_THROWS_AS(parse_surface_spec("torus_product(1)"), InvalidInput);
    CHECK_THROWS_AS(parse_surface_spec("circle(x)"), InvalidInput);
  }
}

TEST_SUITE("shape_field") {
  TEST_CASE("torus product: second fundamental form and mean curvature") {
    const double a = 1.0, b = 2.0;
    const int n = 64;
    const ShapeField s = torus_shape(a, b, n);
    const double tol = h2(n);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Vec n1 = torus_n1(s.grid, p), n2 = torus_n2(s.grid, p);
      CHECK((s.A(p, 0, 0) + a * n1).norm() <= tol * a);
      CHECK((s.A(p, 1, 1) + b * n2).norm() <= tol * b);
      CHECK(s.A(p, 0, 1).norm() <= 1e-12);
      CHECK((s.mean_curvature[p] + n1 / a + n2 / b).norm() <= tol);
      // A_ij orthogonal to both tangents
      for (int i = 0; i < 2; ++i)
        for (int q = 0; q < 3; ++q) CHECK(std::abs(s.second_form[p][q].dot(s.tangents[p][i])) < 1e-12);
    }
  }

  TEST_CASE("torus(1,1) has |H|^2 = 2") {
    const ShapeField s = torus_shape(1.0, 1.0, 64);
    for (double r : s.rho) CHECK(r == doctest::Approx(2.0).epsilon(2.0 * h2(64)));
  }

  TEST_CASE("circle: H = -(1/R) radial") {
    const double R = 2.0;
    const ShapeField s = shape_field(build_immersion(CircleSpec{R}, {64, 0}));
    for (std::size_t p = 0; p < s.size(); ++p) {
      const double u = s.grid.coordinate(p, 0);
      const Vec radial(std::cos(u), std::sin(u), 0.0, 0.0);
      CHECK((s.mean_curvature[p] + radial / R).norm() <= h2(64));
    }
  }

  TEST_CASE("mean curvature converges at second order under refinement") {
    const double e16 = torus_h_error(1.0, 2.0, 16);
    const double e32 = torus_h_error(1.0, 2.0, 32);
    const double e64 = torus_h_error(1.0, 2.0, 64);
    CHECK(observed_order(e16, e32) >= 1.8);
    CHECK(observed_order(e32, e64) >= 1.8);
  }

  TEST_CASE("fourth-order stencils are selectable and converge faster") {
    const auto imm = build_immersion(TorusSpec{1.0, 2.0}, {32, 32});
    const ShapeField s2 = shape_field(imm, {.order = 2});
    const ShapeField s4 = shape_field(imm, {.order = 4});
    const double exact = 1.0 + 0.25;
    CHECK(std::abs(s4.rho[0] - exact) < 0.01 * std::abs(s2.rho[0] - exact));
  }

  TEST_CASE("H equals the metric trace of A") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    for (std::size_t p = 0; p < s.size(); ++p) {
      Vec tr = Vec::Zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) tr += s.metric_inv[p](i, j) * s.A(p, i, j);
      CHECK((tr - s.mean_curvature[p]).norm() < 1e-12);
      CHECK(s.metric[p](0, 1) == doctest::Approx(s.metric[p](1, 0)));
      CHECK(s.metric[p].determinant() > 0.0);
    }
  }

  TEST_CASE("degenerate immersion reports the offending grid index") {
    auto imm = build_immersion(TorusSpec{1.0, 2.0}, {16, 16});
    // Collapse the phi-circle at theta index 5: rows 4..6 feed its tangent.
    for (int j = 0; j < 16; ++j) imm.points[imm.grid.index(5, j)] = imm.points[imm.grid.index(5, 0)];
    try {
      (void)shape_field(imm);
      FAIL("expected DegenerateImmersion");
    } catch (const DegenerateImmersion& e) {
      CHECK(imm.grid.multi_index(e.index())[0] == 5);
    }
  }
}

TEST_SUITE("normal_frame") {
  TEST_CASE("orientation: J n1 = n2 and J n2 = -n1 on torus products") {
    const ShapeField s = torus_shape(1.0, 2.0, 32);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Vec n1 = torus_n1(s.grid, p), n2 = torus_n2(s.grid, p);
      CHECK((s.rotate(p, n1) - n2).norm() < 1e-12);
      CHECK((s.rotate(p, n2) + n1).norm() < 1e-12);
    }
  }

  TEST_CASE("orientation lock: -JH = -(1/b) n1 + (1/a) n2") {
    const double a = 1.0, b = 2.0;
    const ShapeField s = torus_shape(a, b, 64);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Vec expected = -torus_n1(s.grid, p) / b + torus_n2(s.grid, p) / a;
      CHECK((-s.rotate(p, s.mean_curvature[p]) - expected).norm() <= h2(64));
    }
  }

  TEST_CASE("curves: -J(kappa n) = kappa b, i.e. J n = -b") {
    const ShapeField s = shape_field(build_immersion(CircleSpec{1.0}, {32, 0}));
    const Vec n(1.0, 0.0, 0.0, 0.0);        // principal normal at u = 0 points inward: -x
    const Vec binormal(0.0, 0.0, 1.0, 0.0);  // t = +y, n = -x, b = t x n = +z
    CHECK((s.rotate(0, -n) + binormal).norm() < 1e-12);
  }

  TEST_CASE("J is an isometry of the normal plane and squares to -1") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    std::mt19937_64 rng(7);
    const NormalField v = normal_projection(s, random_smooth_field(s.grid, rng));
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Vec jv = s.rotate(p, v[p]);
      CHECK(std::abs(jv.dot(v[p])) < 1e-12 * (1.0 + v[p].squaredNorm()));
      CHECK(jv.norm() == doctest::Approx(v[p].norm()).epsilon(1e-12));
      CHECK((s.rotate(p, jv) + v[p]).norm() < 1e-12 * (1.0 + v[p].norm()));
    }
  }

  TEST_CASE("frame is orthonormal, normal and resolves H exactly") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    for (std::size_t p = 0; p < s.size(); ++p) {
      CHECK(s.nu1[p].norm() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(s.nu2[p].norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(s.nu1[p].dot(s.nu2[p])) < 1e-13);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(s.nu2[p].dot(s.tangents[p][i])) < 1e-12);
      const double c1 = s.mean_curvature[p].dot(s.nu1[p]);
      const double c2 = s.mean_curvature[p].dot(s.nu2[p]);
      CHECK(c1 * c1 + c2 * c2 == doctest::Approx(s.rho[p]).epsilon(1e-13));
    }
  }

  TEST_CASE("frame is transported into points where H vanishes") {
    ShapeField s = shape_field(build_immersion(TorusSpec{1.0, 2.0}, {16, 16}));
    const std::size_t holes[] = {s.grid.index(3, 3), s.grid.index(3, 4), s.grid.index(4, 4)};
    for (std::size_t p : holes) {
      s.mean_curvature[p] = Vec::Zero();
      s.rho[p] = 0.0;
    }
    const NormalFrame f = normal_frame(s);
    CHECK(f.masked.size() == 3);
    for (std::size_t p : holes) {
      // The transported frame stays within a grid step or two of the true H direction.
      const Vec h = -(torus_n1(s.grid, p) + 0.5 * torus_n2(s.grid, p)).normalized();
      CHECK(f.nu1[p].dot(h) > 0.85);
      CHECK(f.nu1[p].norm() == doctest::Approx(1.0));
      CHECK(std::abs(f.nu1[p].dot(s.tangents[p][0])) < 1e-12);
    }
  }

  TEST_CASE("no frame can be seeded when H vanishes everywhere") {
    ShapeField s = shape_field(build_immersion(TorusSpec{1.0, 2.0}, {16, 16}));
    for (std::size_t p = 0; p < s.size(); ++p) {
      s.mean_curvature[p] = Vec::Zero();
      s.rho[p] = 0.0;
    }
    CHECK_THROWS_AS(normal_frame(s), FrameDegeneracy);
    NormalField seed(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) seed[p] = torus_n1(s.grid, p);
    const NormalFrame f = normal_frame(s, 1e-8, &seed);
    CHECK((f.nu2[0] - torus_n2(s.grid, 0)).norm() < 1e-12);
  }
}

TEST_SUITE("willmore_energy") {
  TEST_CASE("torus(1,2): 4 pi^2 (b/a + a/b)") {
    const double w = willmore_energy(torus_shape(1.0, 2.0, 64));
    CHECK(w == doctest::Approx(4 * kPi * kPi * 2.5).epsilon(5e-3));
  }
  TEST_CASE("torus(1,1): 8 pi^2") {
    CHECK(willmore_energy(torus_shape(1.0, 1.0, 64)) == doctest::Approx(8 * kPi * kPi).epsilon(5e-3));
  }
  TEST_CASE("circle(R): 2 pi / R") {
    const double R = 3.0;
    const ShapeField s = shape_field(build_immersion(CircleSpec{R}, {128, 0}), {.order = 4});
    CHECK(willmore_energy(s) == doctest::Approx(2 * kPi / R).epsilon(1e-6));
    CHECK(volume(s) == doctest::Approx(2 * kPi * R).epsilon(1e-6));
  }
}

TEST_SUITE("torsion_form") {
  TEST_CASE("vanishes on torus products") {
    const TorsionForm tf = torsion_form(torus_shape(1.0, 2.0, 32));
    for (const auto& t : tf.tau) {
      CHECK(std::abs(t[0]) < 1e-12);
      CHECK(std::abs(t[1]) < 1e-12);
    }
    CHECK(tf.masked.empty());
  }

  TEST_CASE("does not vanish on the perturbed torus, with a nonzero refinement limit") {
    std::vector<double> peak;
    for (int n : {32, 64, 128}) {
      const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {n, n}));
      const TorsionForm tf = torsion_form(s);
      double m = 0.0;
      for (const auto& t : tf.tau) m = std::max({m, std::abs(t[0]), std::abs(t[1])});
      peak.push_back(m);
    }
    CHECK(peak[2] > 0.5);
    // successive changes shrink like a convergent sequence
    CHECK(std::abs(peak[2] - peak[1]) < 0.4 * std::abs(peak[1] - peak[0]));
  }

  TEST_CASE("chi is the metric dual of 2 tau") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    const TorsionForm tf = torsion_form(s);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Eigen::Vector2d chi(tf.chi[p][0], tf.chi[p][1]);
      const Eigen::Vector2d tau(tf.tau[p][0], tf.tau[p][1]);
      const double lhs = chi.dot(s.metric[p] * chi);
      const double rhs = 4.0 * tau.dot(s.metric_inv[p] * tau);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_SUITE("normal_laplacian") {
  TEST_CASE("annihilates H and constant-coefficient normal fields on torus products") {
    const ShapeField s = torus_shape(1.0, 2.0, 64);
    const NormalField lh = normal_laplacian(s, s.mean_curvature);
    CHECK(max_norm(lh) <= h2(64));
    NormalField v(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) v[p] = 0.3 * torus_n1(s.grid, p) - 1.7 * torus_n2(s.grid, p);
    CHECK(max_norm(normal_laplacian(s, v)) <= h2(64));
  }

  TEST_CASE("is linear") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    std::mt19937_64 rng(11);
    const NormalField u = normal_projection(s, random_smooth_field(s.grid, rng));
    const NormalField v = normal_projection(s, random_smooth_field(s.grid, rng));
    NormalField w(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) w[p] = 2.5 * u[p] - 0.75 * v[p];
    const NormalField lu = normal_laplacian(s, u), lv = normal_laplacian(s, v), lw = normal_laplacian(s, w);
    for (std::size_t p = 0; p < s.size(); ++p)
      CHECK((lw[p] - (2.5 * lu[p] - 0.75 * lv[p])).norm() < 1e-10 * (1.0 + lw[p].norm()));
  }

  TEST_CASE("rejects fields with a tangential component") {
    const ShapeField s = torus_shape(1.0, 2.0, 16);
    NormalField v(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) v[p] = s.tangents[p][0];
    CHECK_THROWS_AS(normal_laplacian(s, v), InvalidInput);
  }
}

TEST_SUITE("willmore_gradient") {
  TEST_CASE("vanishes on the Clifford torus torus(1,1)") {
    CHECK(max_norm(willmore_gradient(torus_shape(1.0, 1.0, 64))) <= 2.0 * h2(64));
  }

  TEST_CASE("torus(1,2): half gradient is -(3/8) n1 + (3/16) n2") {
    const ShapeField s = torus_shape(1.0, 2.0, 64);
    const NormalField g = willmore_gradient(s);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const Vec expected = -0.375 * torus_n1(s.grid, p) + 0.1875 * torus_n2(s.grid, p);
      CHECK((0.5 * g[p] - expected).norm() <= h2(64));
    }
  }

  // Directional derivative oracle: central difference of the discrete energy
  // along a random smooth normal variation.
  void check_gradient_oracle(const SurfaceSpec& spec, int n, int order, double rel_tol) {
    const GridImmersion imm = build_immersion(spec, {n, n});
    const ShapeField s = shape_field(imm, {.order = order});
    const NormalField grad = willmore_gradient(s);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 3; ++trial) {
      const NormalField v = normal_projection(s, random_smooth_field(s.grid, rng));
      const double eps = 1e-5;
      GridImmersion plus = imm, minus = imm;
      for (std::size_t p = 0; p < s.size(); ++p) {
        plus.points[p] += eps * v[p];
        minus.points[p] -= eps * v[p];
      }
      const double fd = (willmore_energy(shape_field(plus, {.order = order})) -
                         willmore_energy(shape_field(minus, {.order = order}))) /
                        (2.0 * eps);
      const double analytic = l2_inner(s, grad, v);
      INFO("trial " << trial << " fd=" << fd << " analytic=" << analytic);
      CHECK(std::abs(fd - analytic) <= rel_tol * std::abs(fd));
    }
  }

  TEST_CASE("matches finite differences of the energy on torus(1,2)") {
    check_gradient_oracle(TorusSpec{1.0, 2.0}, 64, 4, 1e-3);
  }

  TEST_CASE("matches finite differences of the energy on the perturbed torus") {
    check_gradient_oracle(PerturbedTorusSpec{}, 64, 4, 1e-3);
  }
}

TEST_SUITE("source_term") {
  TEST_CASE("torus(1,2): 2/(a^3 b) - 2/(a b^3) = 0.75 everywhere") {
    const ScalarField src = source_term(torus_shape(1.0, 2.0, 64, 4));
    for (double v : src) CHECK(v == doctest::Approx(0.75).epsilon(1e-4));
  }
  TEST_CASE("torus(1,1) and circles: zero") {
    for (double v : source_term(torus_shape(1.0, 1.0, 32))) CHECK(std::abs(v) < 1e-12);
    for (double v : source_term(shape_field(build_immersion(CircleSpec{1.5}, {64, 0}))))
      CHECK(std::abs(v) < 1e-12);
  }
}

TEST_SUITE("energy_derivative") {
  TEST_CASE("torus(1,2): 8 pi^2 (1/a^2 - 1/b^2)") {
    const EnergyDerivative e = energy_derivative(torus_shape(1.0, 2.0, 64));
    CHECK(e.integral == doctest::Approx(8 * kPi * kPi * 0.75).epsilon(1e-2));
    const EnergyDerivative e4 = energy_derivative(torus_shape(1.0, 2.0, 64, 4));
    CHECK(e4.integral == doctest::Approx(8 * kPi * kPi * 0.75).epsilon(5e-3));
  }
  TEST_CASE("zero on torus(1,1) and on curves") {
    CHECK(std::abs(energy_derivative(torus_shape(1.0, 1.0, 64)).integral) < 1e-10);
    const auto curve = build_immersion(CircleSpec{1.0}, {64, 0});
    CHECK(std::abs(energy_derivative(shape_field(curve)).integral) < 1e-12);
  }
  TEST_CASE("integral of the source term equals the energy derivative") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {64, 64}));
    const double lhs = integrate(s, source_term(s));
    const EnergyDerivative e = energy_derivative(s);
    double quad = 0.0;
    for (double v : e.integrand) quad += v;
    quad *= s.grid.cell_volume();
    CHECK(lhs == doctest::Approx(e.integral).epsilon(1e-6));
    CHECK(quad == doctest::Approx(e.integral).epsilon(1e-6));
  }
}

TEST_SUITE("normal_curvature_check") {
  TEST_CASE("both sides vanish on torus products") {
    const NormalCurvatureCheck c = normal_curvature_check(torus_shape(1.0, 2.0, 32));
    CHECK(max_norm(c.dtau) < 1e-10);
    CHECK(max_norm(c.r_perp) < 1e-10);
    CHECK(c.max_residual < 1e-10);
  }

  TEST_CASE("residual converges at second order on the perturbed torus") {
    std::vector<double> res, peak;
    for (int n : {64, 128, 256}) {
      const NormalCurvatureCheck c =
          normal_curvature_check(shape_field(build_immersion(PerturbedTorusSpec{}, {n, n})));
      res.push_back(c.max_residual);
      peak.push_back(max_norm(c.dtau));
    }
    CHECK(peak[1] > 100.0 * res[1]);  // the check is not vacuous
    CHECK(observed_order(res[0], res[1]) >= 1.8);
    CHECK(observed_order(res[1], res[2]) >= 1.8);
  }

  TEST_CASE("fourth-order stencils converge faster") {
    std::vector<double> res;
    for (int n : {32, 64, 128})
      res.push_back(normal_curvature_check(
                        shape_field(build_immersion(PerturbedTorusSpec{}, {n, n}), {.order = 4}))
                        .max_residual);
    CHECK(observed_order(res[1], res[2]) >= 3.0);
  }

  TEST_CASE("adding an exact form leaves d tau unchanged") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    const TorsionForm tf = torsion_form(s);
    ScalarField phi(s.size());
    for (std::size_t p = 0; p < s.size(); ++p)
      phi[p] = std::sin(s.grid.coordinate(p, 0) + 2.0 * s.grid.coordinate(p, 1)) + 0.3 * std::cos(3.0 * s.grid.coordinate(p, 0));
    const ScalarField d0 = fd::diff(s.grid, phi, 0), d1 = fd::diff(s.grid, phi, 1);
    auto shifted = tf.tau;
    for (std::size_t p = 0; p < s.size(); ++p) {
      shifted[p][0] += d0[p];
      shifted[p][1] += d1[p];
    }
    const ScalarField a = exterior_derivative(s.grid, tf.tau), b = exterior_derivative(s.grid, shifted);
    for (std::size_t p = 0; p < s.size(); ++p) CHECK(std::abs(a[p] - b[p]) < 1e-12);
  }

  TEST_CASE("curves are rejected") {
    const ShapeField s = shape_field(build_immersion(CircleSpec{1.0}, {32, 0}));
    CHECK_THROWS_AS(normal_curvature_check(s), UnsupportedDimension);
  }
}

TEST_SUITE("mw_pairing") {
  TEST_CASE("antisymmetric and degenerate on tangent fields") {
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    std::mt19937_64 rng(3);
    const NormalField u = random_smooth_field(s.grid, rng), v = random_smooth_field(s.grid, rng);
    CHECK(std::abs(mw_pairing(s, u, u)) < 1e-12);
    CHECK(mw_pairing(s, u, v) == doctest::Approx(-mw_pairing(s, v, u)).epsilon(1e-12));
    NormalField t0(s.size()), t1(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
      t0[p] = s.tangents[p][0];
      t1[p] = s.tangents[p][1];
    }
    CHECK(std::abs(mw_pairing(s, t0, t1)) < 1e-12);
  }

  TEST_CASE("circle with principal normal and binormal gives 2 pi R") {
    const double R = 1.5;
    const ShapeField s = shape_field(build_immersion(CircleSpec{R}, {64, 0}));
    NormalField n(s.size()), b(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
      const double u = s.grid.coordinate(p, 0);
      n[p] = Vec(-std::cos(u), -std::sin(u), 0.0, 0.0);
      b[p] = Vec(0.0, 0.0, 1.0, 0.0);
    }
    // det(n, b, t) = det(t, n, b) = |t| for the unit Frenet frame.
    CHECK(mw_pairing(s, n, b) == doctest::Approx(2 * kPi * R).epsilon(h2(64)));
  }

  TEST_CASE("skew-mean-curvature field is the Hamiltonian vector field of volume") {
    // omega(-JH, V) = -int (H, V) dvol = d vol(V) for normal V.
    const ShapeField s = shape_field(build_immersion(PerturbedTorusSpec{}, {32, 32}));
    std::mt19937_64 rng(5);
    const NormalField v = normal_projection(s, random_smooth_field(s.grid, rng));
    NormalField x = apply_j(s, s.mean_curvature);
    for (auto& e : x) e = -e;
    CHECK(mw_pairing(s, x, v) == doctest::Approx(-l2_inner(s, s.mean_curvature, v)).epsilon(1e-12));
  }
}

TEST_SUITE("snapshot_io") {
  TEST_CASE("snapshot round trip is bit exact") {
    const auto imm = build_immersion(PerturbedTorusSpec{}, {8, 12});
    std::stringstream ss;
    io::write_snapshot(ss, imm);
    const auto back = io::read_snapshot(ss);
    CHECK(back.grid == imm.grid);
    for (std::size_t p = 0; p < imm.points.size(); ++p) CHECK(back.points[p] == imm.points[p]);
  }

  TEST_CASE("curve snapshots carry three ambient columns") {
    std::stringstream ss;
    io::write_snapshot(ss, build_immersion(CircleSpec{1.0}, {16, 0}));
    const std::string text = ss.str();
    CHECK(text.find("ambient_dim 3") != std::string::npos);
    CHECK(text.find("x0 x1 x2\n") != std::string::npos);
    CHECK(io::read_snapshot(ss).dim() == 1);
  }

  TEST_CASE("malformed snapshots are rejected") {
    std::stringstream bad("dim 2\nshape 8 8\nparam_periods 1 1\nambient_dim 3\nx0 x1 x2\n");
    CHECK_THROWS_AS(io::read_snapshot(bad), InvalidInput);
    std::stringstream shortfile("dim 1\nshape 8\nparam_periods 1\nambient_dim 3\nx0 x1 x2\n0 0 0\n");
    CHECK_THROWS_AS(io::read_snapshot(shortfile), InvalidInput);
  }

  TEST_CASE("shape field export has one named column per component") {
    const ShapeField s = torus_shape(1.0, 2.0, 8);
    const TorsionForm tf = torsion_form(s);
    std::stringstream ss;
    io::write_shape_field(ss, s, &tf);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "g_00,g_01,g_11,H_0,H_1,H_2,H_3,nu1_0,nu1_1,nu1_2,nu1_3,nu2_0,nu2_1,nu2_2,nu2_3,rho,tau_0,tau_1");
    int rows = 0;
    for (std::string line; std::getline(ss, line);) ++rows;
    CHECK(rows == 64);
  }
}
