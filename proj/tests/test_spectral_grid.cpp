#include "lowmach/spectral_grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lowmach;

namespace {

constexpr double pi = std::numbers::pi;

SpectralGrid grid2(int n = 32, double length = 2 * pi) { return SpectralGrid(GridSpec{2, n, length}); }

double max_abs(const Eigen::ArrayXXd& a) { return a.abs().maxCoeff(); }

// A smooth non-polynomial test field built from a handful of modes.
ScalarField sample(const SpectralGrid& g) {
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  return (x.sin() * (2 * y).cos() + 0.3 * (3 * x + y).cos() - 0.2 * (x - 2 * y).sin()).eval();
}

}  // namespace

TEST_CASE("GridSpec validation") {
  CHECK_THROWS_AS(SpectralGrid(GridSpec{1, 32, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralGrid(GridSpec{2, 31, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralGrid(GridSpec{2, 4, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralGrid(GridSpec{2, 32, 0.0}), std::invalid_argument);
  const GridSpec spec{3, 16, 2.0};
  CHECK(spec.size() == 4096);
  CHECK(spec.dx() == doctest::Approx(0.125));
  CHECK(spec.domain_volume() == doctest::Approx(8.0));
}

TEST_CASE("flat index has x fastest") {
  const SpectralGrid g = grid2(16, 2.0);
  CHECK(g.coordinate(0)(1) == doctest::Approx(0.125));
  CHECK(g.coordinate(1)(1) == 0.0);
  CHECK(g.coordinate(1)(16) == doctest::Approx(0.125));
  CHECK(g.wavenumber(0)(1) == doctest::Approx(pi));
  CHECK(g.wavenumber(0)(15) == doctest::Approx(-pi));
}

TEST_CASE("forward then inverse is the identity") {
  const SpectralGrid g = grid2();
  const ScalarField f = sample(g);
  CHECK(max_abs(g.inverse(g.forward(f)) - f) < 1e-14);
}

TEST_CASE("spectral derivatives of trigonometric fields are exact") {
  for (double length : {2 * pi, 1.0}) {
    const SpectralGrid g = grid2(32, length);
    const double k = 2 * pi / length;
    const auto x = g.coordinate(0);
    const auto y = g.coordinate(1);
    const ScalarField f = (3 * k * x).sin() * (2 * k * y).cos();
    CHECK(max_abs(g.partial(f, 0) - 3 * k * (3 * k * x).cos() * (2 * k * y).cos()) < 1e-11 * k);
    CHECK(max_abs(g.partial(f, 1) + 2 * k * (3 * k * x).sin() * (2 * k * y).sin()) < 1e-11 * k);
    CHECK(max_abs(g.laplacian(f) + 13 * k * k * f) < 1e-10 * k * k);
  }
}

TEST_CASE("Nyquist mode: zero first derivative, true Laplacian") {
  const SpectralGrid g = grid2(16);
  const ScalarField f = (8.0 * g.coordinate(0)).cos();  // alternates +1, -1
  CHECK(max_abs(g.partial(f, 0)) < 1e-13);
  CHECK(max_abs(g.laplacian(f) + 64.0 * f) < 1e-11);
}

TEST_CASE("vector identities hold to roundoff in 2D and 3D") {
  for (int dim : {2, 3}) {
    const SpectralGrid g(GridSpec{dim, 16, 2 * pi});
    const auto x = g.coordinate(0);
    const auto y = g.coordinate(1);
    const auto z = dim == 3 ? g.coordinate(2) : Eigen::ArrayXd::Zero(g.size()).eval();
    const ScalarField q = (x + 2 * y).sin() * (z + x).cos();
    CHECK(max_abs(g.curl(g.grad(q))) < 1e-12);
    VectorField A(g.size(), dim == 2 ? 1 : 3);
    for (Index c = 0; c < A.cols(); ++c) A.col(c) = ((c + 1) * x - y + z).cos() + (2 * y).sin();
    CHECK(max_abs(g.div(g.curl(A))) < 1e-12);
  }
}

TEST_CASE("2D curl conventions") {
  const SpectralGrid g = grid2(16);
  const ScalarField y = g.coordinate(1);
  VectorField psi(g.size(), 1);
  psi.col(0) = y.sin();
  const VectorField u = g.curl(psi);  // (d2 psi, -d1 psi)
  CHECK(u.cols() == 2);
  CHECK(max_abs(u.col(0) - y.cos()) < 1e-13);
  CHECK(max_abs(u.col(1)) < 1e-13);
  const VectorField w = g.curl(u);  // z component d1 u2 - d2 u1 = sin y
  CHECK(w.cols() == 1);
  CHECK(max_abs(w.col(0) - y.sin()) < 1e-13);
}

TEST_CASE("cross products") {
  VectorField ex(1, 2), ey(1, 2), ez(1, 1);
  ex << 1, 0;
  ey << 0, 1;
  ez << 1;
  CHECK(cross(ex, ey)(0, 0) == 1.0);
  CHECK(cross(ez, ex)(0, 1) == 1.0);   // z x x = y
  CHECK(cross(ey, ez)(0, 0) == 1.0);   // y x z = x
  VectorField a(1, 3), b(1, 3);
  a << 1, 2, 3;
  b << -1, 0.5, 2;
  const VectorField c = cross(a, b);
  CHECK(c(0, 0) == doctest::Approx(2.5));
  CHECK(c(0, 1) == doctest::Approx(-5.0));
  CHECK(c(0, 2) == doctest::Approx(2.5));
  CHECK_THROWS_AS(cross(VectorField(1, 3), VectorField(1, 2)), std::invalid_argument);
}

TEST_CASE("quadrature and Sobolev norms of a single mode") {
  const SpectralGrid g = grid2(32);
  const ScalarField f = g.coordinate(0).sin();
  CHECK(g.integral(f.square()) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
  CHECK(g.norm_l2(f) == doctest::Approx(std::sqrt(2.0) * pi).epsilon(1e-13));
  // |k| = 1: ||f||_s^2 = 2^s ||f||_2^2.
  CHECK(g.sobolev_norm(f, 0.0) == doctest::Approx(std::sqrt(2.0) * pi).epsilon(1e-13));
  CHECK(g.sobolev_norm(f, 4.0) == doctest::Approx(4.0 * std::sqrt(2.0) * pi).epsilon(1e-13));
  VectorField u(g.size(), 2);
  u.col(0) = f;
  u.col(1) = f;
  CHECK(g.sobolev_norm(u, 2.0) == doctest::Approx(std::sqrt(2.0) * 2 * std::sqrt(2.0) * pi).epsilon(1e-13));
  CHECK(g.mean(ScalarField::Constant(g.size(), 3.0)) == 3.0);
}

TEST_CASE("2/3 dealiasing keeps |m| <= n/3 in every direction") {
  const SpectralGrid g = grid2(64);
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  const ScalarField kept = (21 * x).cos() * (21 * y).sin();
  const ScalarField cut = (22 * x).cos();
  CHECK(max_abs(g.dealias(kept) - kept) < 1e-12);
  CHECK(max_abs(g.dealias(cut)) < 1e-12);
  CHECK(max_abs(g.dealias(ScalarField((22 * y).sin() * x.cos()))) < 1e-12);
}

TEST_CASE("Poisson solve") {
  const SpectralGrid g = grid2(32);
  const ScalarField f = sample(g);
  const ScalarField phi = g.poisson_solve(g.laplacian(f));
  CHECK(max_abs(phi - (f - f.mean())) < 1e-12);
  CHECK(std::abs(phi.mean()) < 1e-14);
  CHECK_THROWS_AS(g.poisson_solve(ScalarField::Constant(g.size(), 1.0)), GaugeError);
}

TEST_CASE("variable-coefficient solve") {
  const SpectralGrid g = grid2(32);
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  const ScalarField rhs = g.laplacian(sample(g));

  SUBCASE("constant coefficient reduces to Poisson") {
    const ScalarField c = ScalarField::Constant(g.size(), 2.5);
    const ScalarField phi = g.var_coeff_elliptic_solve(c, rhs, 1e-13);
    CHECK(max_abs(phi - g.poisson_solve(rhs) / 2.5) < 1e-11);
  }
  SUBCASE("variable coefficient meets the tolerance") {
    const ScalarField c = 1.0 + 0.4 * x.sin() * y.cos();
    EllipticReport report;
    const ScalarField phi = g.var_coeff_elliptic_solve(c, rhs, 1e-12, FluxTruncation::none, &report);
    CHECK(report.relative_residual <= 1e-12);
    CHECK(report.iterations > 0);
    CHECK(g.norm_l2(ScalarField(g.var_coeff_operator(c, phi) - rhs)) <= 1.01e-12 * g.norm_l2(rhs));
    CHECK(std::abs(phi.mean()) < 1e-13);
  }
  SUBCASE("two-thirds flux truncation solves the truncated operator") {
    const ScalarField c = 1.0 + 0.4 * x.sin() * y.cos();
    const ScalarField b = g.dealias(rhs);
    const ScalarField phi = g.var_coeff_elliptic_solve(c, b, 1e-12, FluxTruncation::two_thirds);
    CHECK(g.norm_l2(ScalarField(g.var_coeff_operator(c, phi, FluxTruncation::two_thirds) - b)) <=
          1.01e-12 * g.norm_l2(b));
  }
  SUBCASE("errors") {
    const ScalarField c = 1.0 + 0.9 * x.sin();
    CHECK_THROWS_AS(g.var_coeff_elliptic_solve(c, ScalarField::Constant(g.size(), 1.0), 1e-10), GaugeError);
    CHECK_THROWS_AS(g.var_coeff_elliptic_solve(ScalarField(c - 1.0), rhs, 1e-10), std::domain_error);
    try {
      (void)g.var_coeff_elliptic_solve(c, rhs, 1e-14, FluxTruncation::none, nullptr, 2);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.iterations() == 2);
      CHECK(e.achieved_residual() > 1e-14);
    }
  }
  SUBCASE("zero right-hand side") {
    const ScalarField c = ScalarField::Constant(g.size(), 1.0);
    CHECK(max_abs(g.var_coeff_elliptic_solve(c, ScalarField::Zero(g.size()), 1e-12)) == 0.0);
  }
}

TEST_CASE("Leray projection") {
  const SpectralGrid g = grid2(32);
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  VectorField u(g.size(), 2);
  u.col(0) = x.sin() * y.cos() + 0.5;
  u.col(1) = (2 * x).cos() + y.sin();
  const VectorField p = g.leray_project(u);
  CHECK(g.norm_l2(g.div(p)) < 1e-12);
  CHECK(max_abs(g.leray_project(p) - p) < 1e-13);
  CHECK(max_abs(g.leray_project(g.grad(sample(g)))) < 1e-12);
  CHECK(p.col(0).mean() == doctest::Approx(0.5));  // mean flow is divergence-free
}
