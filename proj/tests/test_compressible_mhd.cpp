#include "lowmach/compressible_mhd.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace lowmach;

namespace {

constexpr double pi = std::numbers::pi;
const Eos air{};

double max_abs(const Eigen::ArrayXXd& a) { return a.abs().maxCoeff(); }

CompressibleState rest_state(const SpectralGrid& g, double eps) {
  CompressibleState s;
  s.q = ScalarField::Zero(g.size());
  s.u = VectorField::Zero(g.size(), g.dim());
  s.H = VectorField::Zero(g.size(), g.dim());
  s.S = ScalarField::Zero(g.size());
  s.eps = eps;
  return s;
}

// Smooth band-limited state with solenoidal H.
CompressibleState smooth_state(const SpectralGrid& g, double eps) {
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  CompressibleState s = rest_state(g, eps);
  s.q = 0.3 * (x + y).cos();
  s.u.col(0) = 0.2 * y.sin() + 0.05 * x.cos();
  s.u.col(1) = 0.1 * (2 * x).cos();
  s.H.col(0) = 0.2 * (2 * y).cos();
  s.H.col(1) = 0.15 * x.sin();
  s.S = 0.1 * (x - y).sin();
  return s;
}

}  // namespace

TEST_CASE("validate rejects malformed states") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  CHECK_NOTHROW(validate(g, smooth_state(g, 0.1)));
  CompressibleState s = smooth_state(g, 0.1);
  s.eps = 0.0;
  CHECK_THROWS_AS(validate(g, s), std::invalid_argument);
  s = smooth_state(g, 0.1);
  s.q(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(g, s), std::invalid_argument);
  CHECK_FALSE(all_finite(s));
  s = smooth_state(g, 0.1);
  s.u = VectorField::Zero(g.size(), 3);
  CHECK_THROWS_AS(validate(g, s), std::invalid_argument);
  s = smooth_state(g, 0.1);
  s.H.col(0) = g.coordinate(0).sin();  // div H = cos x
  CHECK_THROWS_AS(validate(g, s), std::invalid_argument);
}

TEST_CASE("coefficient fields follow the equation of state pointwise") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  const CompressibleState s = smooth_state(g, 0.2);
  const CoefficientFields c = coefficients(s, air);
  for (Index i : {Index(0), Index(37), Index(200)}) {
    CHECK(c.a(i) == doctest::Approx(coeff_a(s.S(i), 0.2 * s.q(i), air)).epsilon(1e-15));
    CHECK(c.r(i) == doctest::Approx(coeff_r(s.S(i), 0.2 * s.q(i), air)).epsilon(1e-15));
  }
}

TEST_CASE("rest states with constant H are fixed points") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  CompressibleState s = rest_state(g, 0.1);
  s.H.col(0) = 0.7;
  s.S = 0.2 * g.coordinate(1).cos();
  const CompressibleTendency k = rhs(g, s, air);
  CHECK(max_abs(k.q) == 0.0);
  CHECK(max_abs(k.u) < 1e-15);
  CHECK(max_abs(k.H) < 1e-15);
  CHECK(max_abs(k.S) == 0.0);
}

TEST_CASE("tendency of a compressive mode") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  const auto x = g.coordinate(0);
  CompressibleState s = rest_state(g, 0.1);
  s.u.col(0) = x.sin();
  const CompressibleTendency k = rhs(g, s, air);
  // dq/dt = -div u / (eps a) = -gamma cos x / eps; du/dt = -(u.grad)u = -sin(2x)/2.
  CHECK(max_abs(k.q + 1.4 * x.cos() / 0.1) < 1e-12);
  CHECK(max_abs(k.u.col(0) + 0.5 * (2 * x).sin()) < 1e-14);
  CHECK(max_abs(k.u.col(1)) < 1e-14);
}

TEST_CASE("Faraday term: direct curl and expansion agree") {
  const SpectralGrid g(GridSpec{2, 32, 2 * pi});
  const CompressibleState s = smooth_state(g, 0.1);
  const VectorField direct = faraday(g, s.u, s.H);
  CHECK(max_abs(direct - faraday_expanded(g, s.u, s.H)) < 1e-14);
  CHECK(max_abs(lorentz_force(g, VectorField::Constant(g.size(), 2, 0.3))) < 1e-15);
}

TEST_CASE("stable_dt at rest is set by the sound speed") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  const CompressibleState s = rest_state(g, 0.05);
  // 1/(eps sqrt(a r)) = sqrt(gamma)/eps with a = 1/gamma, r = 1.
  CHECK(stable_dt(g, s, air, 0.4) == doctest::Approx(0.4 * g.spec().dx() * 0.05 / std::sqrt(1.4)).epsilon(1e-14));
  CHECK_THROWS_AS(stable_dt(g, s, air, 1.0), std::invalid_argument);
}

TEST_CASE("rk4_step reports non-finite output with the pre-step state") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  CompressibleState s = smooth_state(g, 0.1);
  s.q(5) = std::numeric_limits<double>::infinity();
  try {
    (void)rk4_step(g, s, 1e-3, air);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.snapshot().t == s.t);
    CHECK(std::isinf(e.snapshot().q(5)));
  }
}

TEST_CASE("run lands on the horizon and on sample times") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  const CompressibleState s0 = smooth_state(g, 0.2);
  RunOptions opt;
  opt.T = 0.05;
  opt.observer_cadence = 1000;
  opt.sample_interval = 0.01;
  std::vector<double> seen;
  const std::vector<CompressibleObserver> obs{[&](const CompressibleState& s) { seen.push_back(s.t); }};
  const RunRecord rec = run(g, s0, air, opt, obs);
  CHECK(rec.complete);
  REQUIRE(seen.size() == 6);
  for (int i = 0; i <= 5; ++i) CHECK(seen[i] == doctest::Approx(0.01 * i).epsilon(1e-12));
  CHECK(rec.final_state.t == 0.05);
  CHECK(rec.observed_times == seen);

  opt.sample_interval = 0.0;
  opt.fixed_dt = 0.005;
  const RunRecord fixed = run(g, s0, air, opt, {});
  CHECK(fixed.steps == 10);

  opt.observer_cadence = 0;
  CHECK_THROWS_AS(run(g, s0, air, opt, {}), std::invalid_argument);
}

TEST_CASE("run records a failed integration instead of throwing") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  CompressibleState s0 = smooth_state(g, 0.2);
  s0.u(0, 0) = std::numeric_limits<double>::quiet_NaN();
  RunOptions opt;
  opt.T = 0.01;
  opt.fixed_dt = 1e-3;
  const RunRecord rec = run(g, s0, air, opt, {});
  CHECK_FALSE(rec.complete);
  CHECK(rec.failure.find("non-finite") != std::string::npos);
  CHECK(rec.steps == 0);
}

TEST_CASE("H stays divergence-free along a run") {
  const SpectralGrid g(GridSpec{2, 32, 2 * pi});
  RunOptions opt;
  opt.T = 0.05;
  opt.observer_cadence = 1;
  double worst = 0.0;
  const std::vector<CompressibleObserver> obs{
      [&](const CompressibleState& s) { worst = std::max(worst, div_h_residual(g, s.H)); }};
  CHECK(run(g, smooth_state(g, 0.1), air, opt, obs).complete);
  CHECK(worst < 1e-13);
}

TEST_CASE("linearised acoustics: a single mode oscillates at k / (eps sqrt(a r))") {
  const SpectralGrid g(GridSpec{2, 16, 2 * pi});
  const FrozenAcoustics frozen{1.0 / 1.4, 0.8, 0.1};
  const double k = 2.0;
  const double omega = k / (frozen.eps * std::sqrt(frozen.a * frozen.r));
  const auto x = g.coordinate(0);
  CompressibleState s = rest_state(g, frozen.eps);
  s.q = (k * x).cos();
  const double T = 0.3;
  auto error_at = [&](int steps) {
    CompressibleState y = s;
    for (int i = 0; i < steps; ++i) y = acoustic_rk4_step(g, y, T / steps, frozen);
    return max_abs(y.q - std::cos(omega * T) * (k * x).cos());
  };
  const double e1 = error_at(40);
  const double e2 = error_at(80);
  CHECK(e1 < 1e-3);
  CHECK(std::log2(e1 / e2) > 3.7);
}
