#include "lowmach/incompressible_mhd.hpp"

#include "lowmach/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lowmach {

ScalarField r0_field(const ScalarField& S, const Eos& eos) {
  return S.unaryExpr([&](double s) { return r0(s, eos); });
}

void validate(const SpectralGrid& grid, const IncompressibleState& state) {
  const Index n = grid.size();
  if (state.v.rows() != n || state.Hbar.rows() != n || state.Sbar.size() != n || state.pi.size() != n ||
      state.v.cols() != grid.dim() || state.Hbar.cols() != grid.dim()) {
    throw std::invalid_argument("IncompressibleState: field shapes do not match the grid");
  }
  if (div_h_residual(grid, state.v) > 1e-9 || div_h_residual(grid, state.Hbar) > 1e-9) {
    throw std::invalid_argument("IncompressibleState: v and Hbar must be divergence-free");
  }
  const double scale = std::max(1.0, state.pi.abs().maxCoeff());
  if (std::abs(state.pi.mean()) > 1e-10 * scale) {
    throw std::invalid_argument("IncompressibleState: pi must have zero mean");
  }
}

IncompressibleState axpy(const IncompressibleState& y, double h, const IncompressibleTendency& k) {
  IncompressibleState out;
  out.v = y.v + h * k.v;
  out.Hbar = y.Hbar + h * k.Hbar;
  out.Sbar = y.Sbar + h * k.Sbar;
  out.pi = y.pi;
  out.t = y.t + h;
  return out;
}

VectorField filter_initial_velocity(const SpectralGrid& grid, const VectorField& v0, const ScalarField& S0,
                                    const Eos& eos, double tol) {
  const ScalarField weight = r0_field(S0, eos);
  const ScalarField c = weight.inverse();
  const VectorField z = v0.colwise() * weight;
  ScalarField rhs = -grid.div(VectorField(z.colwise() * c));
  rhs -= rhs.mean();
  const double rhs_norm = grid.norm_l2(rhs);
  VectorField w0 = z.colwise() * c;
  if (rhs_norm <= tol) return w0;
  const ScalarField phi = grid.var_coeff_elliptic_solve(c, rhs, tol / rhs_norm);
  w0 += grid.grad(phi).colwise() * c;
  return w0;
}

namespace {

// Momentum tendency before the pressure gradient.
VectorField unprojected_momentum(const SpectralGrid& grid, const IncompressibleState& state,
                                 const ScalarField& c) {
  const VectorField lorentz = lorentz_force(grid, state.Hbar);
  return -grid.dealias(advect(grid, state.v, state.v)) + grid.dealias(VectorField(lorentz.colwise() * c));
}

ScalarField solve_pressure(const SpectralGrid& grid, const VectorField& momentum, const ScalarField& c,
                           double tol) {
  ScalarField rhs = grid.div(momentum);
  rhs -= rhs.mean();
  return grid.var_coeff_elliptic_solve(c, rhs, tol, FluxTruncation::two_thirds);
}

}  // namespace

ScalarField pressure_solve(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos,
                           double tol) {
  const ScalarField c = r0_field(state.Sbar, eos).inverse();
  return solve_pressure(grid, unprojected_momentum(grid, state, c), c, tol);
}

IncompressibleRhs rhs_incompressible(const SpectralGrid& grid, const IncompressibleState& state,
                                     const Eos& eos, double tol) {
  const ScalarField c = r0_field(state.Sbar, eos).inverse();
  const VectorField momentum = unprojected_momentum(grid, state, c);
  IncompressibleRhs out;
  out.pi = solve_pressure(grid, momentum, c, tol);
  out.tendency.v = momentum - grid.dealias(VectorField(grid.grad(out.pi).colwise() * c));
  out.tendency.Hbar =
      grid.dealias(advect(grid, state.Hbar, state.v)) - grid.dealias(advect(grid, state.v, state.Hbar));
  out.tendency.Sbar = -grid.dealias(ScalarField(directional(state.v, grid.grad(state.Sbar))));
  return out;
}

double stable_dt(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos, double cfl) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("stable_dt: cfl must lie in (0,1)");
  const ScalarField speed = magnitude(state.v) + magnitude(state.Hbar) / r0_field(state.Sbar, eos).sqrt();
  const double c_max = speed.maxCoeff();
  if (c_max == 0.0) return std::numeric_limits<double>::infinity();
  return cfl * grid.spec().dx() / c_max;
}

IncompressibleState rk4_step(const SpectralGrid& grid, const IncompressibleState& state, double dt,
                             const Eos& eos, double tol) {
  auto f = [&](const IncompressibleState& y) { return rhs_incompressible(grid, y, eos, tol).tendency; };
  auto step = [](const IncompressibleState& y, double h, const IncompressibleTendency& k) {
    return axpy(y, h, k);
  };
  auto project = [&](IncompressibleState& y) {
    y.v = grid.leray_project(y.v);
    y.Hbar = grid.leray_project(y.Hbar);
  };
  IncompressibleState out = lowmach::rk4_step(state, dt, f, step, project);
  out.t = state.t + dt;
  if (!(out.v.allFinite() && out.Hbar.allFinite() && out.Sbar.allFinite())) {
    throw std::runtime_error("rk4_step: non-finite incompressible state at t = " + std::to_string(out.t));
  }
  out.pi = pressure_solve(grid, out, eos, tol);
  return out;
}

IncompressibleRunRecord run(const SpectralGrid& grid, const IncompressibleState& state0, const Eos& eos,
                            const RunOptions& options, double tol,
                            std::span<const IncompressibleObserver> observers) {
  if (options.T < 0.0) throw std::invalid_argument("run: horizon must be nonnegative");
  if (options.observer_cadence < 1) throw std::invalid_argument("run: observer cadence must be >= 1");

  IncompressibleRunRecord record;
  IncompressibleState state = state0;
  auto observe = [&](const IncompressibleState& s) {
    for (const auto& obs : observers) obs(s);
    record.observed_times.push_back(s.t);
  };
  observe(state);

  const double t_end = state0.t + options.T;
  const double landing_slack = 1e-12 * std::max(1.0, std::abs(t_end));
  long next_sample = 1;
  while (state.t < t_end - landing_slack) {
    double dt = options.fixed_dt ? *options.fixed_dt : stable_dt(grid, state, eos, options.cfl);
    double target = t_end;
    bool sample_target = false;
    if (options.sample_interval > 0.0) {
      const double ts = state0.t + next_sample * options.sample_interval;
      if (ts < t_end - landing_slack) {
        target = ts;
        sample_target = true;
      }
    }
    bool landed = false;
    if (state.t + dt >= target - landing_slack) {
      dt = target - state.t;
      landed = true;
    }
    try {
      state = rk4_step(grid, state, dt, eos, tol);
    } catch (const std::exception& e) {
      record.complete = false;
      record.failure = e.what();
      record.final_state = state;
      return record;
    }
    if (landed) state.t = target;
    ++record.steps;
    if (landed && sample_target) ++next_sample;
    if (landed || record.steps % options.observer_cadence == 0) observe(state);
  }
  record.final_state = std::move(state);
  return record;
}

}  // namespace lowmach
