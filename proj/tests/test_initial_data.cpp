#include "lowmach/initial_data.hpp"

#include <doctest.h>

#include <cmath>

using namespace lowmach;

namespace {

const Eos air{};

double max_abs(const Eigen::ArrayXXd& a) { return a.abs().maxCoeff(); }

}  // namespace

TEST_CASE("data kind names round-trip") {
  CHECK(data_kind_from_string(to_string(DataKind::general)) == DataKind::general);
  CHECK(data_kind_from_string("well_prepared") == DataKind::well_prepared);
  CHECK_THROWS_AS(data_kind_from_string("acoustic"), std::invalid_argument);
}

TEST_CASE("recipe validation") {
  const GridSpec spec{};
  DataRecipe r;
  CHECK_NOTHROW(r.validate(spec));
  r.k_max = 22;  // 3 * 22 > 64
  CHECK_THROWS_AS(r.validate(spec), std::invalid_argument);
  r = DataRecipe{};
  r.k_min = 0;
  CHECK_THROWS_AS(r.validate(spec), std::invalid_argument);
  r = DataRecipe{};
  r.amplitude = -1.0;
  CHECK_THROWS_AS(r.validate(spec), std::invalid_argument);
  r = DataRecipe{};
  r.bump_radius = 0.5;
  CHECK_THROWS_AS(r.validate(spec), std::invalid_argument);
  r = DataRecipe{};
  r.bump_steepness = 0.0;
  CHECK_THROWS_AS(r.validate(spec), std::invalid_argument);
  const SpectralGrid g(spec);
  CHECK_THROWS_AS(make_compressible_data(DataRecipe{}, 0.0, g, air), std::invalid_argument);
  CHECK_THROWS_AS(make_compressible_data(DataRecipe{}, 1.5, g, air), std::invalid_argument);
}

TEST_CASE("band-limited random fields") {
  const SpectralGrid g(GridSpec{2, 32, 2.0});
  const ScalarField f = random_band_limited_field(g, 2, 5, 0.7, 11, 3);
  CHECK(std::sqrt(f.square().mean()) == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(std::abs(f.mean()) < 1e-15);
  const SpectralField f_hat = g.forward(f);
  const double k0 = std::numbers::pi;  // 2 pi / L
  for (Index i = 0; i < g.size(); ++i) {
    const double shell = std::sqrt(g.k_squared()(i)) / k0;
    if (shell < 2.0 - 1e-9 || shell > 5.0 + 1e-9) CHECK(std::abs(f_hat(i)) < 1e-12);
  }
  CHECK((random_band_limited_field(g, 2, 5, 0.7, 11, 3) == f).all());
  CHECK(max_abs(random_band_limited_field(g, 2, 5, 0.7, 12, 3) - f) > 0.1);
  CHECK(max_abs(random_band_limited_field(g, 2, 5, 0.7, 11, 4) - f) > 0.1);
}

TEST_CASE("solenoidal fields in 2D and 3D") {
  DataRecipe r;
  r.amplitude = 0.4;
  for (int dim : {2, 3}) {
    const SpectralGrid g(GridSpec{dim, 16, 2 * std::numbers::pi});
    const VectorField u = random_solenoidal_field(r, g, 5);
    CHECK(u.cols() == dim);
    CHECK(std::sqrt(u.square().rowwise().sum().mean()) == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(g.norm_l2(g.div(u)) < 1e-13);
  }
}

TEST_CASE("entropy bump: exact amplitude and compact support inside the box") {
  const SpectralGrid g(GridSpec{});
  DataRecipe r;
  r.base_entropy = -0.1;
  const ScalarField S = entropy_bump(r, g);
  CHECK(S.maxCoeff() - r.base_entropy == doctest::Approx(r.entropy_amplitude).epsilon(1e-15));
  CHECK(S.minCoeff() == r.base_entropy);
  const double length = g.spec().length;
  const double radius = r.bump_radius * length;
  const Eigen::ArrayXd x = g.coordinate(0) - 0.5 * length;
  const Eigen::ArrayXd y = g.coordinate(1) - 0.5 * length;
  for (Index i = 0; i < g.size(); ++i) {
    if (x(i) * x(i) + y(i) * y(i) >= radius * radius) CHECK(S(i) == r.base_entropy);
  }
  // The first grid row and column (the periodic seam) see only the base value.
  CHECK((S.head(g.spec().n) == r.base_entropy).all());
}

TEST_CASE("well-prepared and general families") {
  const SpectralGrid g(GridSpec{2, 32, 2 * std::numbers::pi});
  DataRecipe r;
  const CompressibleData a = make_compressible_data(r, 0.2, g, air);
  const CompressibleData b = make_compressible_data(r, 0.05, g, air);
  CHECK_NOTHROW(validate(g, a.state));
  CHECK(max_abs(a.state.q / 0.2 - b.state.q / 0.05) < 1e-14);
  // u = w + eps grad(psi): the gradient part scales with eps.
  CHECK(max_abs((a.state.u - b.state.u) / 0.15 - (a.state.u - g.leray_project(a.state.u)) / 0.2) < 1e-12);
  CHECK(max_abs(g.leray_project(a.state.u) - g.leray_project(b.state.u)) < 1e-13);
  CHECK((a.state.H == b.state.H).all());
  CHECK(a.m0_bound == b.m0_bound);
  CHECK(a.h4_norm <= a.m0_bound);
  CHECK(b.h4_norm <= b.m0_bound);
  CHECK(a.state.eps == 0.2);

  r.kind = DataKind::general;
  const CompressibleData c = make_compressible_data(r, 0.2, g, air);
  const CompressibleData d = make_compressible_data(r, 0.05, g, air);
  CHECK((c.state.q == d.state.q).all());
  CHECK((c.state.u == d.state.u).all());
  CHECK(std::sqrt(c.state.q.square().mean()) == doctest::Approx(r.amplitude));
}

TEST_CASE("limit data") {
  const SpectralGrid g(GridSpec{2, 32, 2 * std::numbers::pi});
  const DataRecipe r;
  const CompressibleData data = make_compressible_data(r, 0.1, g, air);
  const IncompressibleState lim = make_limit_data(g, data.state, air, 1e-12);
  CHECK_NOTHROW(validate(g, lim));
  const ScalarField r0 = r0_field(data.state.S, air);
  CHECK(g.norm_l2(VectorField(g.curl(VectorField(lim.v.colwise() * r0)) -
                              g.curl(VectorField(data.state.u.colwise() * r0)))) < 1e-9);
  CHECK((lim.Sbar == data.state.S).all());

  const IncompressibleState core = make_family_limit_data(r, g, air, 1e-12);
  CHECK(g.norm_l2(g.div(core.v)) < 1e-11);
  // The eps -> 0 member differs from the eps = 0.1 limit data at O(eps).
  const double gap = g.norm_l2(VectorField(core.v - lim.v));
  CHECK(gap > 0.0);
  CHECK(gap < 0.1 * g.norm_l2(core.v));
}
