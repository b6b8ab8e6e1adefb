#include "lowmach/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lowmach {

std::array<double, 10> as_row(const DiagnosticsRecord& r) {
  return {r.t,
          r.quad_energy,
          r.sobolev4,
          r.l2_q,
          r.l2_divu,
          r.curl_r0u_norm,
          r.coupling_residual,
          r.identity112_residual,
          r.divH_residual,
          r.total_energy};
}

double quadratic_energy(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const CoefficientFields c = coefficients(state, eos);
  const ScalarField density = c.a * state.q.square() + c.r * state.u.square().rowwise().sum() +
                              state.H.square().rowwise().sum();
  return grid.integral(density);
}

double total_energy(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const double eps2 = state.eps * state.eps;
  ScalarField density(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double p = scaled_pressure(state.eps * state.q(i), eos);
    const double rho = density_R(state.S(i), p, eos);
    const double internal = p / ((eos.gamma - 1.0) * rho);
    density(i) = rho * (internal + 0.5 * eps2 * state.u.row(i).square().sum()) +
                 0.5 * eps2 * state.H.row(i).square().sum();
  }
  return grid.integral(density);
}

double coupling_cancellation_residual(const SpectralGrid& grid, const VectorField& u, const VectorField& H) {
  const VectorField curl_H = grid.curl(H);
  const VectorField curl_uxH = grid.curl(cross(u, H));
  const ScalarField lorentz_work = dot(cross(curl_H, H), u);
  const ScalarField induction_work = dot(curl_uxH, H);
  const ScalarField H_mag = magnitude(H);
  const double scale = grid.integral(magnitude(curl_H) * H_mag * magnitude(u)) +
                       grid.integral(magnitude(curl_uxH) * H_mag);
  if (scale == 0.0) return 0.0;
  return std::abs(grid.integral(lorentz_work) + grid.integral(induction_work)) / scale;
}

double identity112_residual(const SpectralGrid& grid, const VectorField& u, const VectorField& H) {
  const VectorField direct = faraday(grid, u, H);
  const VectorField expanded = faraday_expanded(grid, u, H);
  const double scale = std::max(grid.norm_l2(direct), grid.norm_l2(expanded));
  if (scale == 0.0) return 0.0;
  return grid.norm_l2(VectorField(direct - expanded)) / scale;
}

double skew_adjoint_residual(const SpectralGrid& grid, const ScalarField& q, const VectorField& u) {
  const VectorField grad_q = grid.grad(q);
  const ScalarField div_u = grid.div(u);
  const double scale = grid.norm_l2(grad_q) * grid.norm_l2(u) + grid.norm_l2(q) * grid.norm_l2(div_u);
  if (scale == 0.0) return 0.0;
  return std::abs(grid.inner(grad_q, u) + grid.inner(q, div_u)) / scale;
}

double singular_cancellation_residual(const SpectralGrid& grid, const CompressibleState& state,
                                      const Eos& eos) {
  const CoefficientFields c = coefficients(state, eos);
  const SingularTerms s = singular_terms(grid, state, eos);
  const double q_term = grid.inner(ScalarField(c.a * s.q), state.q);
  const double u_term = grid.inner(VectorField(s.u.colwise() * c.r), state.u);
  const double scale = std::abs(q_term) + std::abs(u_term);
  if (scale == 0.0) return 0.0;
  return std::abs(q_term + u_term) / scale;
}

CurlR0U curl_r0u(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const VectorField weighted = state.u.colwise() * r0_field(state.S, eos);
  CurlR0U out;
  out.field = grid.curl(weighted);
  out.h3_norm = grid.sobolev_norm(out.field, 3.0);
  return out;
}

double sobolev4(const SpectralGrid& grid, const CompressibleState& state) {
  return grid.sobolev_norm(state.S, 4.0) + grid.sobolev_norm(state.q, 4.0) + grid.sobolev_norm(state.u, 4.0) +
         grid.sobolev_norm(state.H, 4.0);
}

DiagnosticsRecord observe(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.quad_energy = quadratic_energy(grid, state, eos);
  r.sobolev4 = sobolev4(grid, state);
  r.l2_q = grid.norm_l2(state.q);
  r.l2_divu = grid.norm_l2(grid.div(state.u));
  r.curl_r0u_norm = curl_r0u(grid, state, eos).h3_norm;
  r.coupling_residual = coupling_cancellation_residual(grid, state.u, state.H);
  r.identity112_residual = identity112_residual(grid, state.u, state.H);
  r.divH_residual = div_h_residual(grid, state.H);
  r.total_energy = total_energy(grid, state, eos);
  return r;
}

std::array<double, 7> as_row(const ReferenceRecord& r) {
  return {r.t, r.energy, r.kinetic_energy, r.magnetic_energy, r.l2_div_v, r.l2_div_H, r.sobolev4};
}

double incompressible_energy(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos) {
  return observe(grid, state, eos).energy;
}

ReferenceRecord observe(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos) {
  ReferenceRecord r;
  r.t = state.t;
  r.kinetic_energy = grid.integral(ScalarField(0.5 * r0_field(state.Sbar, eos) * state.v.square().rowwise().sum()));
  r.magnetic_energy = grid.integral(ScalarField(0.5 * state.Hbar.square().rowwise().sum()));
  r.energy = r.kinetic_energy + r.magnetic_energy;
  r.l2_div_v = grid.norm_l2(grid.div(state.v));
  r.l2_div_H = grid.norm_l2(grid.div(state.Hbar));
  r.sobolev4 = grid.sobolev_norm(state.Sbar, 4.0) + grid.sobolev_norm(state.v, 4.0) +
               grid.sobolev_norm(state.Hbar, 4.0);
  return r;
}

namespace {

// a * P[(u.grad) q], the quantity differentiated in time inside F.
ScalarField advective_flux(const SpectralGrid& grid, const CompressibleState& s, const ScalarField& a) {
  return a * grid.dealias(ScalarField(directional(s.u, grid.grad(s.q))));
}

// eps div P[(u.grad)u] - eps div P[(1/r) P[curl H x H]].
ScalarField momentum_forcing(const SpectralGrid& grid, const CompressibleState& s, const ScalarField& r) {
  const VectorField inertia = grid.dealias(advect(grid, s.u, s.u));
  const VectorField magnetic = grid.dealias(VectorField(lorentz_force(grid, s.H).colwise() / r));
  return s.eps * grid.div(VectorField(inertia - magnetic));
}

ScalarField pressure_operator(const SpectralGrid& grid, const CompressibleState& s, const ScalarField& r) {
  return grid.div(grid.dealias(VectorField(grid.grad(s.q).colwise() / r)));
}

}  // namespace

ScalarField wave_forcing(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos) {
  const CoefficientFields c = coefficients(state, eos);
  const CompressibleTendency k = rhs(grid, state, eos);

  // d/dt a(S, eps q) by a centred difference of the coefficient along the tendency.
  constexpr double delta = 1e-5;
  ScalarField a_rate(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double up = coeff_a(state.S(i) + delta * k.S(i), state.eps * (state.q(i) + delta * k.q(i)), eos);
    const double dn = coeff_a(state.S(i) - delta * k.S(i), state.eps * (state.q(i) - delta * k.q(i)), eos);
    a_rate(i) = (up - dn) / (2.0 * delta);
  }
  const ScalarField transport = grid.dealias(ScalarField(directional(state.u, grid.grad(state.q))));
  const ScalarField transport_rate = grid.dealias(
      ScalarField(directional(k.u, grid.grad(state.q)) + directional(state.u, grid.grad(k.q))));
  const ScalarField flux_rate = a_rate * transport + c.a * transport_rate;

  return -state.eps * state.eps * flux_rate + momentum_forcing(grid, state, c.r);
}

double acoustic_residual(const SpectralGrid& grid, std::span<const CompressibleState, 3> states,
                         const Eos& eos) {
  const CompressibleState& prev = states[0];
  const CompressibleState& mid = states[1];
  const CompressibleState& next = states[2];
  const double h = next.t - mid.t;
  if (!(h != 0.0) || std::abs((mid.t - prev.t) - h) > 1e-9 * std::abs(h)) {
    throw std::invalid_argument("acoustic_residual: states must be equally spaced in time");
  }
  const double eps = mid.eps;
  const CoefficientFields c_prev = coefficients(prev, eos);
  const CoefficientFields c_mid = coefficients(mid, eos);
  const CoefficientFields c_next = coefficients(next, eos);

  const ScalarField a_plus = 0.5 * (c_next.a + c_mid.a);
  const ScalarField a_minus = 0.5 * (c_mid.a + c_prev.a);
  const ScalarField wave = eps * eps * (a_plus * (next.q - mid.q) - a_minus * (mid.q - prev.q)) / (h * h);
  const ScalarField lhs = wave - pressure_operator(grid, mid, c_mid.r);

  const ScalarField flux_rate =
      (advective_flux(grid, next, c_next.a) - advective_flux(grid, prev, c_prev.a)) / (2.0 * h);
  const ScalarField forcing = -eps * eps * flux_rate + momentum_forcing(grid, mid, c_mid.r);

  const double scale = grid.sobolev_norm(mid.q, 2.0);
  const double defect = grid.norm_l2(ScalarField(lhs - forcing));
  if (scale == 0.0) return defect;
  return defect / scale;
}

double acoustic_residual_at(const SpectralGrid& grid, const CompressibleState& center, double h,
                            const Eos& eos) {
  const std::array<CompressibleState, 3> states = {rk4_step(grid, center, -h, eos), center,
                                                   rk4_step(grid, center, h, eos)};
  return acoustic_residual(grid, std::span<const CompressibleState, 3>(states), eos);
}

OrderFit fit_order(std::span<const double> eps, std::span<const double> err) {
  OrderFit fit;
  if (eps.size() != err.size()) throw std::invalid_argument("fit_order: size mismatch");
  const std::size_t n = eps.size();
  if (n < 2) return fit;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(err[i] > 0.0) || !(eps[i] > 0.0) || !std::isfinite(err[i])) return fit;
  }
  Eigen::ArrayXd x(static_cast<Index>(n)), y(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Index>(i)) = std::log(eps[i]);
    y(static_cast<Index>(i)) = std::log(err[i]);
  }
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const double sxx = (x - x_mean).square().sum();
  if (sxx == 0.0) return fit;
  fit.order = ((x - x_mean) * (y - y_mean)).sum() / sxx;
  const Eigen::ArrayXd residual = y - (y_mean + fit.order * (x - x_mean));
  fit.fit_residual = std::sqrt(residual.square().mean());
  fit.defined = true;
  fit.reliable = fit.fit_residual <= 0.3;
  return fit;
}

std::vector<double> pairwise_orders(std::span<const double> eps, std::span<const double> err) {
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < eps.size() && i + 1 < err.size(); ++i) {
    if (err[i] > 0.0 && err[i + 1] > 0.0) {
      orders.push_back(std::log(err[i] / err[i + 1]) / std::log(eps[i] / eps[i + 1]));
    } else {
      orders.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return orders;
}

double metric_value(const EpsMetrics& m, std::string_view name) {
  if (name == "l2t_q") return m.l2t_q;
  if (name == "linf_q") return m.linf_q;
  if (name == "l2t_divu") return m.l2t_divu;
  if (name == "linf_u_err") return m.linf_u_err;
  if (name == "linf_H_err") return m.linf_H_err;
  if (name == "linf_S_err") return m.linf_S_err;
  if (name == "l2t_forcing") return m.l2t_forcing;
  if (name == "sup_sobolev4") return m.sup_sobolev4;
  if (name == "quad_energy_growth") return m.quad_energy_growth;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

double l2_in_time(std::span<const double> t, std::span<const double> values) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    total += 0.5 * (t[i + 1] - t[i]) * (values[i] * values[i] + values[i + 1] * values[i + 1]);
  }
  return std::sqrt(total);
}

ConvergenceReport convergence_metrics(const SpectralGrid& grid, std::span<const CompressibleTrajectory> comp,
                                      std::span<const IncompressibleState> reference, const Eos& eos) {
  std::vector<double> times;
  for (const auto& s : reference) {
    if (s.v.rows() != grid.size()) throw ConfigurationError("convergence_metrics: reference grid mismatch");
    times.push_back(s.t);
  }
  ConvergenceReport report;
  for (const auto& traj : comp) {
    if (traj.samples.size() != reference.size()) {
      throw ConfigurationError("convergence_metrics: trajectories must share the reference time grid");
    }
    EpsMetrics m;
    m.eps = traj.eps;
    std::vector<double> q_norm, divu_norm, forcing_norm;
    double qe0 = 0.0;
    m.quad_energy_growth = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const CompressibleState& s = traj.samples[i];
      const IncompressibleState& ref = reference[i];
      if (s.q.size() != grid.size() || s.u.cols() != ref.v.cols()) {
        throw ConfigurationError("convergence_metrics: spatial grids differ");
      }
      if (std::abs(s.t - ref.t) > 1e-9 * std::max(1.0, std::abs(ref.t))) {
        throw ConfigurationError("convergence_metrics: sample times differ from the reference");
      }
      q_norm.push_back(grid.norm_l2(s.q));
      m.linf_q = std::max(m.linf_q, q_norm.back());
      divu_norm.push_back(grid.norm_l2(grid.div(s.u)));
      forcing_norm.push_back(grid.norm_l2(wave_forcing(grid, s, eos)));
      m.linf_u_err = std::max(m.linf_u_err, grid.norm_l2(VectorField(s.u - ref.v)));
      m.linf_H_err = std::max(m.linf_H_err, grid.norm_l2(VectorField(s.H - ref.Hbar)));
      m.linf_S_err = std::max(m.linf_S_err, grid.norm_l2(ScalarField(s.S - ref.Sbar)));
      m.sup_sobolev4 = std::max(m.sup_sobolev4, sobolev4(grid, s));
      const double qe = quadratic_energy(grid, s, eos);
      if (i == 0) {
        qe0 = qe;
      } else if (s.t > traj.samples.front().t && qe0 > 0.0) {
        m.quad_energy_growth =
            std::max(m.quad_energy_growth, (qe / qe0 - 1.0) / (s.t - traj.samples.front().t));
      }
    }
    if (!std::isfinite(m.quad_energy_growth)) m.quad_energy_growth = 0.0;
    m.l2t_q = l2_in_time(times, q_norm);
    m.l2t_divu = l2_in_time(times, divu_norm);
    m.l2t_forcing = l2_in_time(times, forcing_norm);
    report.per_eps.push_back(m);
  }
  std::vector<double> eps;
  for (const auto& m : report.per_eps) eps.push_back(m.eps);
  for (std::string_view name : kOrderMetrics) {
    std::vector<double> err;
    for (const auto& m : report.per_eps) err.push_back(metric_value(m, name));
    report.orders[std::string(name)] = fit_order(eps, err);
    report.pairwise[std::string(name)] = pairwise_orders(eps, err);
  }
  return report;
}

}  // namespace lowmach
