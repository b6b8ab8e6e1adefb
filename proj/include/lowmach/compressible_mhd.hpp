// Mach-scaled compressible non-isentropic ideal MHD:
//
//   dq/dt = -(u.grad)q - div(u) / (eps a)
//   du/dt = -(u.grad)u + (1/r) (-(1/eps) grad q + curl(H) x H)
//   dH/dt = curl(u x H)
//   dS/dt = -(u.grad)S
//
// with a = a(S, eps q), r = r(S, eps q) from eos.hpp, evaluated pointwise.
#pragma once

#include "lowmach/eos.hpp"
#include "lowmach/spectral_grid.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowmach {

using Eos = EosParams<double>;

struct CompressibleState {
  ScalarField q;
  VectorField u;
  VectorField H;
  ScalarField S;
  double eps = 0.1;
  double t = 0.0;
};

struct CompressibleTendency {
  ScalarField q;
  VectorField u;
  VectorField H;
  ScalarField S;
};

/// Throws std::invalid_argument when a state invariant fails: shapes,
/// finiteness, eps > 0, and ||div H|| <= 1e-10 ||H||_{H^1}.
void validate(const SpectralGrid& grid, const CompressibleState& state);
bool all_finite(const CompressibleState& state);

/// ||div H||_2 / ||H||_{H^1}, zero for H = 0.
double div_h_residual(const SpectralGrid& grid, const VectorField& H);

CompressibleState axpy(const CompressibleState& y, double h, const CompressibleTendency& k);

struct CoefficientFields {
  ScalarField a;
  ScalarField r;
};
CoefficientFields coefficients(const CompressibleState& state, const Eos& eos);

/// Dealiased (curl H) x H.
VectorField lorentz_force(const SpectralGrid& grid, const VectorField& H);
/// curl of the dealiased product u x H.
VectorField faraday(const SpectralGrid& grid, const VectorField& u, const VectorField& H);
/// u div H - H div u + (H.grad)u - (u.grad)H with each product dealiased.
VectorField faraday_expanded(const SpectralGrid& grid, const VectorField& u, const VectorField& H);

/// The 1/eps pieces before dealiasing: q part (1/(eps a)) div u and
/// u part (1/(eps r)) grad q. Both enter the tendency with a minus sign.
struct SingularTerms {
  ScalarField q;
  VectorField u;
};
SingularTerms singular_terms(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

CompressibleTendency rhs(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos);

/// cfl * dx / max(|u| + |H|/sqrt(r) + 1/(eps sqrt(a r))).
double stable_dt(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos, double cfl);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, CompressibleState snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const CompressibleState& snapshot() const { return snapshot_; }

 private:
  CompressibleState snapshot_;
};

/// RK4 step followed by a spectral divergence cleanup of H. Throws
/// IntegrationError (carrying the pre-step state) on non-finite output.
CompressibleState rk4_step(const SpectralGrid& grid, const CompressibleState& state, double dt,
                           const Eos& eos);

struct RunOptions {
  double T = 0.5;
  double cfl = 0.4;
  /// Observers fire every `observer_cadence` steps, plus t = 0 and t = T.
  int observer_cadence = 10;
  /// When positive, steps are clipped to land on multiples of this
  /// interval and observers fire there too.
  double sample_interval = 0.0;
  /// Overrides the CFL step when set.
  std::optional<double> fixed_dt;
};

struct RunRecord {
  std::vector<double> observed_times;
  long steps = 0;
  bool complete = true;
  std::string failure;
  CompressibleState final_state;
};

using CompressibleObserver = std::function<void(const CompressibleState&)>;

RunRecord run(const SpectralGrid& grid, const CompressibleState& state0, const Eos& eos,
              const RunOptions& options, std::span<const CompressibleObserver> observers);

/// Acoustics linearised about rest with frozen coefficients:
/// dq/dt = -div(u)/(eps a), du/dt = -grad(q)/(eps r), H and S frozen.
struct FrozenAcoustics {
  double a = 1.0 / 1.4;
  double r = 1.0;
  double eps = 0.1;
};
CompressibleTendency acoustic_rhs(const SpectralGrid& grid, const CompressibleState& state,
                                  const FrozenAcoustics& frozen);
CompressibleState acoustic_rk4_step(const SpectralGrid& grid, const CompressibleState& state,
                                    double dt, const FrozenAcoustics& frozen);

}  // namespace lowmach
