#include "lowmach/compressible_mhd.hpp"

#include "lowmach/rk4.hpp"

#include <algorithm>
#include <cmath>

namespace lowmach {

void validate(const SpectralGrid& grid, const CompressibleState& state) {
  const Index n = grid.size();
  const int d = grid.dim();
  if (state.q.size() != n || state.S.size() != n || state.u.rows() != n || state.H.rows() != n ||
      state.u.cols() != d || state.H.cols() != d) {
    throw std::invalid_argument("CompressibleState: field shapes do not match the grid");
  }
  if (!(state.eps > 0.0)) throw std::invalid_argument("CompressibleState: eps must be positive");
  if (!all_finite(state)) throw std::invalid_argument("CompressibleState: non-finite samples");
  if (div_h_residual(grid, state.H) > 1e-10) {
    throw std::invalid_argument("CompressibleState: H is not divergence-free");
  }
}

bool all_finite(const CompressibleState& state) {
  return state.q.allFinite() && state.u.allFinite() && state.H.allFinite() && state.S.allFinite();
}

double div_h_residual(const SpectralGrid& grid, const VectorField& H) {
  const double scale = grid.sobolev_norm(H, 1.0);
  if (scale == 0.0) return 0.0;
  return grid.norm_l2(grid.div(H)) / scale;
}

CompressibleState axpy(const CompressibleState& y, double h, const CompressibleTendency& k) {
  CompressibleState out;
  out.q = y.q + h * k.q;
  out.u = y.u + h * k.u;
  out.H = y.H + h * k.H;
  out.S = y.S + h * k.S;
  out.eps = y.eps;
  out.t = y.t + h;
  return out;
}

CoefficientFields coefficients(const CompressibleState& state, const Eos& eos) {
  const Index n = state.q.size();
  CoefficientFields c{ScalarField(n), ScalarField(n)};
  for (Index i = 0; i < n; ++i) {
    const double eps_q = state.eps * state.q(i);
    c.a(i) = coeff_a(state.S(i), eps_q, eos);
    c.r(i) = coeff_r(state.S(i), eps_q, eos);
  }
  return c;
}

VectorField lorentz_force(const SpectralGrid& grid, const VectorField& H) {
  return grid.dealias(cross(grid.curl(H), H));
}

VectorField faraday(const SpectralGrid& grid, const VectorField& u, const VectorField& H) {
  return grid.curl(grid.dealias(cross(u, H)));
}

VectorField faraday_expanded(const SpectralGrid& grid, const VectorField& u, const VectorField& H) {
  const ScalarField div_h = grid.div(H);
  const ScalarField div_u = grid.div(u);
  VectorField out = grid.dealias(VectorField(u.colwise() * div_h));
  out -= grid.dealias(VectorField(H.colwise() * div_u));
  out += grid.dealias(advect(grid, H, u));
  out -= grid.dealias(advect(grid, u, H));
  return out;
}

SingularTerms singular_terms(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const CoefficientFields c = coefficients(state, eos);
  SingularTerms s;
  s.q = grid.div(state.u) / (state.eps * c.a);
  s.u = grid.grad(state.q).colwise() / (state.eps * c.r);
  return s;
}

CompressibleTendency rhs(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const CoefficientFields c = coefficients(state, eos);
  const VectorField grad_q = grid.grad(state.q);
  const ScalarField div_u = grid.div(state.u);

  CompressibleTendency k;
  k.q = -grid.dealias(ScalarField(directional(state.u, grad_q))) -
        grid.dealias(ScalarField(div_u / (state.eps * c.a)));

  const VectorField force = lorentz_force(grid, state.H) - grad_q / state.eps;
  k.u = -grid.dealias(advect(grid, state.u, state.u)) + grid.dealias(VectorField(force.colwise() / c.r));

  k.H = faraday(grid, state.u, state.H);
  k.S = -grid.dealias(ScalarField(directional(state.u, grid.grad(state.S))));
  return k;
}

double stable_dt(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos, double cfl) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("stable_dt: cfl must lie in (0,1)");
  const CoefficientFields c = coefficients(state, eos);
  const ScalarField speed = magnitude(state.u) + magnitude(state.H) / c.r.sqrt() +
                            1.0 / (state.eps * (c.a * c.r).sqrt());
  return cfl * grid.spec().dx() / speed.maxCoeff();
}

CompressibleState rk4_step(const SpectralGrid& grid, const CompressibleState& state, double dt,
                           const Eos& eos) {
  auto f = [&](const CompressibleState& y) {
    if (!all_finite(y)) {
      throw IntegrationError("rk4_step: non-finite stage at t = " + std::to_string(state.t), state);
    }
    return rhs(grid, y, eos);
  };
  auto step = [](const CompressibleState& y, double h, const CompressibleTendency& k) {
    return axpy(y, h, k);
  };
  CompressibleState out = lowmach::rk4_step(state, dt, f, step, [](CompressibleState&) {});
  out.H = grid.leray_project(out.H);
  out.t = state.t + dt;
  if (!all_finite(out)) {
    throw IntegrationError("rk4_step: non-finite state at t = " + std::to_string(out.t), state);
  }
  return out;
}

RunRecord run(const SpectralGrid& grid, const CompressibleState& state0, const Eos& eos,
              const RunOptions& options, std::span<const CompressibleObserver> observers) {
  if (options.T < 0.0) throw std::invalid_argument("run: horizon must be nonnegative");
  if (options.observer_cadence < 1) throw std::invalid_argument("run: observer cadence must be >= 1");

  RunRecord record;
  CompressibleState state = state0;
  auto observe = [&](const CompressibleState& s) {
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
      state = rk4_step(grid, state, dt, eos);
    } catch (const IntegrationError& e) {
      record.complete = false;
      record.failure = e.what();
      record.final_state = e.snapshot();
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

CompressibleTendency acoustic_rhs(const SpectralGrid& grid, const CompressibleState& state,
                                  const FrozenAcoustics& frozen) {
  CompressibleTendency k;
  k.q = -grid.div(state.u) / (frozen.eps * frozen.a);
  k.u = -grid.grad(state.q) / (frozen.eps * frozen.r);
  k.H = VectorField::Zero(state.H.rows(), state.H.cols());
  k.S = ScalarField::Zero(state.S.size());
  return k;
}

CompressibleState acoustic_rk4_step(const SpectralGrid& grid, const CompressibleState& state,
                                    double dt, const FrozenAcoustics& frozen) {
  auto f = [&](const CompressibleState& y) { return acoustic_rhs(grid, y, frozen); };
  auto step = [](const CompressibleState& y, double h, const CompressibleTendency& k) {
    return axpy(y, h, k);
  };
  CompressibleState out = lowmach::rk4_step(state, dt, f, step, [](CompressibleState&) {});
  out.t = state.t + dt;
  return out;
}

}  // namespace lowmach
