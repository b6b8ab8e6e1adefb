// Observers on compressible and incompressible states, and the cross-eps
// convergence analysis.
#pragma once

#include "lowmach/incompressible_mhd.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lowmach {

struct DiagnosticsRecord {
  double t = 0.0;
  double quad_energy = 0.0;
  double sobolev4 = 0.0;
  double l2_q = 0.0;
  double l2_divu = 0.0;
  double curl_r0u_norm = 0.0;
  double coupling_residual = 0.0;
  double identity112_residual = 0.0;
  double divH_residual = 0.0;
  double total_energy = 0.0;
};

/// CSV column order of a DiagnosticsRecord row.
inline constexpr std::array<std::string_view, 10> kDiagnosticsColumns = {
    "t",           "quad_energy",          "sobolev4",      "l2_q",        "l2_divu", "curl_r0u_norm",
    "coupling_residual", "identity112_residual", "divH_residual", "total_energy"};

std::array<double, 10> as_row(const DiagnosticsRecord& r);

/// <a q, q> + <r u, u> + <H, H>.
double quadratic_energy(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

/// Integral of rho (e + eps^2 |u|^2 / 2) + eps^2 |H|^2 / 2 with p = p_bar e^{eps q},
/// rho = R(S, p), e = p / ((gamma - 1) rho).
double total_energy(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

/// |int (curl H x H).u + int curl(u x H).H| divided by
/// int |curl H| |H| |u| + int |curl(u x H)| |H|; 0 when that vanishes.
double coupling_cancellation_residual(const SpectralGrid& grid, const VectorField& u, const VectorField& H);

/// ||faraday - faraday_expanded||_2 relative to the larger of the two norms.
double identity112_residual(const SpectralGrid& grid, const VectorField& u, const VectorField& H);

/// <grad q, u> + <q, div u> relative to ||grad q|| ||u|| + ||q|| ||div u||.
double skew_adjoint_residual(const SpectralGrid& grid, const ScalarField& q, const VectorField& u);

/// <a (1/(eps a)) div u, q> + <r (1/(eps r)) grad q, u> relative to the sum
/// of the absolute values of the two terms.
double singular_cancellation_residual(const SpectralGrid& grid, const CompressibleState& state,
                                      const Eos& eos);

struct CurlR0U {
  VectorField field;
  double h3_norm = 0.0;
};
CurlR0U curl_r0u(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

/// ||S||_4 + ||q||_4 + ||u||_4 + ||H||_4.
double sobolev4(const SpectralGrid& grid, const CompressibleState& state);

DiagnosticsRecord observe(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

struct ReferenceRecord {
  double t = 0.0;
  double energy = 0.0;
  double kinetic_energy = 0.0;
  double magnetic_energy = 0.0;
  double l2_div_v = 0.0;
  double l2_div_H = 0.0;
  double sobolev4 = 0.0;
};

inline constexpr std::array<std::string_view, 7> kReferenceColumns = {
    "t", "energy", "kinetic_energy", "magnetic_energy", "l2_div_v", "l2_div_H", "sobolev4"};

std::array<double, 7> as_row(const ReferenceRecord& r);

/// int r0(S) |v|^2 / 2 + |H|^2 / 2, conserved by the limit system.
double incompressible_energy(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos);

ReferenceRecord observe(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos);

/// Forcing of the acoustic wave equation
///   eps^2 d/dt(a dq/dt) - div((1/r) grad q) = F,
///   F = -eps^2 d/dt{a (u.grad)q} + eps div((u.grad)u) - eps div((1/r) curl(H) x H),
/// with the products dealiased exactly as in the compressible tendency.
/// The time derivative is taken from the tendency at this state.
ScalarField wave_forcing(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

/// Residual of the wave equation on three states at t - h, t, t + h, with
/// centred differences in time: ||LHS - F||_2 / ||q(t)||_{H^2}.
double acoustic_residual(const SpectralGrid& grid, std::span<const CompressibleState, 3> states,
                         const Eos& eos);

/// Builds the three states around `center` with RK4 steps of +-h and
/// returns acoustic_residual on them.
double acoustic_residual_at(const SpectralGrid& grid, const CompressibleState& center, double h,
                            const Eos& eos);

struct OrderFit {
  double order = 0.0;
  /// RMS residual of the least-squares line in natural-log space.
  double fit_residual = 0.0;
  bool defined = false;
  bool reliable = false;
};

/// Least-squares slope of ln(err) against ln(eps). Undefined with fewer
/// than two points or any non-positive error.
OrderFit fit_order(std::span<const double> eps, std::span<const double> err);

/// log(err_i / err_{i+1}) / log(eps_i / eps_{i+1}) for consecutive entries.
std::vector<double> pairwise_orders(std::span<const double> eps, std::span<const double> err);

struct CompressibleTrajectory {
  double eps = 0.0;
  std::vector<CompressibleState> samples;
};

struct EpsMetrics {
  double eps = 0.0;
  double l2t_q = 0.0;
  /// sup_t ||q||_2, the acoustic oscillation amplitude.
  double linf_q = 0.0;
  double l2t_divu = 0.0;
  double linf_u_err = 0.0;
  double linf_H_err = 0.0;
  double linf_S_err = 0.0;
  double sup_sobolev4 = 0.0;
  double l2t_forcing = 0.0;
  /// Smallest C with quad_energy(t) <= quad_energy(0) (1 + C t) on the samples.
  double quad_energy_growth = 0.0;
};

inline constexpr std::array<std::string_view, 9> kOrderMetrics = {
    "l2t_q", "linf_q", "l2t_divu", "linf_u_err", "linf_H_err", "linf_S_err", "l2t_forcing", "sup_sobolev4",
    "quad_energy_growth"};

double metric_value(const EpsMetrics& m, std::string_view name);

struct ConvergenceReport {
  std::vector<EpsMetrics> per_eps;
  std::map<std::string, OrderFit> orders;
  std::map<std::string, std::vector<double>> pairwise;
};

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-eps error norms against the reference and fitted orders. Every
/// trajectory must be sampled at the reference's times on the same grid.
ConvergenceReport convergence_metrics(const SpectralGrid& grid, std::span<const CompressibleTrajectory> comp,
                                      std::span<const IncompressibleState> reference, const Eos& eos);

/// Trapezoid-rule sqrt(int_0^T f(t)^2 dt) from samples of f.
double l2_in_time(std::span<const double> t, std::span<const double> values);

}  // namespace lowmach
