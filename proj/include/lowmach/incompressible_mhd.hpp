// Incompressible non-isentropic ideal MHD, the eps -> 0 limit system:
//
//   r0(S) (dv/dt + (v.grad)v) - curl(H) x H + grad(pi) = 0
//   dH/dt + (v.grad)H - (H.grad)v = 0
//   dS/dt + (v.grad)S = 0
//   div v = div H = 0
//
// pi is recovered every stage from a variable-coefficient elliptic problem
// with coefficient 1/r0(S).
#pragma once

#include "lowmach/compressible_mhd.hpp"

namespace lowmach {

struct IncompressibleState {
  VectorField v;
  VectorField Hbar;
  ScalarField Sbar;
  ScalarField pi;
  double t = 0.0;
};

struct IncompressibleTendency {
  VectorField v;
  VectorField Hbar;
  ScalarField Sbar;
};

struct IncompressibleRhs {
  IncompressibleTendency tendency;
  ScalarField pi;
};

/// Throws std::invalid_argument unless div v, div Hbar <= 1e-9 (relative to
/// the H^1 norm) and pi has zero mean.
void validate(const SpectralGrid& grid, const IncompressibleState& state);

IncompressibleState axpy(const IncompressibleState& y, double h, const IncompressibleTendency& k);

/// Divergence-free w0 with curl(r0(S0) w0) = curl(r0(S0) v0).
///
/// Writes r0 w0 = r0 v0 + grad(phi) and solves div((r0 v0 + grad phi)/r0) = 0.
/// `tol` bounds ||div w0||_2 in absolute terms.
VectorField filter_initial_velocity(const SpectralGrid& grid, const VectorField& v0, const ScalarField& S0,
                                    const Eos& eos, double tol);

/// Zero-mean pi with div((1/r0) grad pi) = div(-(v.grad)v + (1/r0) curl(H) x H).
/// `tol` is the relative residual of the elliptic solve.
ScalarField pressure_solve(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos,
                           double tol);

IncompressibleRhs rhs_incompressible(const SpectralGrid& grid, const IncompressibleState& state,
                                     const Eos& eos, double tol);

/// cfl * dx / max(|v| + |Hbar|/sqrt(r0)); +inf for a state at rest.
double stable_dt(const SpectralGrid& grid, const IncompressibleState& state, const Eos& eos, double cfl);

/// RK4 with v and Hbar re-projected after every stage; pi of the result
/// is recomputed at the new state.
IncompressibleState rk4_step(const SpectralGrid& grid, const IncompressibleState& state, double dt,
                             const Eos& eos, double tol);

struct IncompressibleRunRecord {
  std::vector<double> observed_times;
  long steps = 0;
  bool complete = true;
  std::string failure;
  IncompressibleState final_state;
};

using IncompressibleObserver = std::function<void(const IncompressibleState&)>;

IncompressibleRunRecord run(const SpectralGrid& grid, const IncompressibleState& state0, const Eos& eos,
                            const RunOptions& options, double tol,
                            std::span<const IncompressibleObserver> observers);

/// r0(S) pointwise.
ScalarField r0_field(const ScalarField& S, const Eos& eos);

}  // namespace lowmach
