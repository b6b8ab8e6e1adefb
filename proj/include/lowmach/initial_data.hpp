// Initial data families for the eps sweep and the matching limit data.
#pragma once

#include "lowmach/incompressible_mhd.hpp"

#include <cstdint>
#include <string>

namespace lowmach {

enum class DataKind { well_prepared, general };

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

struct DataRecipe {
  DataKind kind = DataKind::well_prepared;
  /// RMS of every random component (solenoidal velocity, gradient
  /// velocity, pressure profile, magnetic field).
  double amplitude = 0.2;
  std::uint64_t seed = 1;
  /// Integer wavenumber shell |m| in [k_min, k_max] of the random fields.
  int k_min = 1;
  int k_max = 4;
  /// max |S0 - base_entropy|.
  double entropy_amplitude = 0.2;
  double base_entropy = 0.0;
  /// Radius of the entropy bump as a fraction of the period.
  double bump_radius = 0.45;
  /// alpha in exp(-alpha rho^2 / (1 - rho^2)); larger is steeper in the
  /// core and flatter at the edge of the support.
  double bump_steepness = 8.0;

  void validate(const GridSpec& grid) const;
};

/// Zero-mean real field with Fourier support in the shell and the given RMS.
ScalarField random_band_limited_field(const SpectralGrid& grid, int k_min, int k_max, double rms,
                                      std::uint64_t seed, std::uint64_t stream);

/// Band-limited, zero-mean, divergence-free field with RMS |u| equal to
/// recipe.amplitude; deterministic in `seed`.
VectorField random_solenoidal_field(const DataRecipe& recipe, const SpectralGrid& grid, std::uint64_t seed);

/// base_entropy + entropy_amplitude * exp(-alpha rho^2 / (1 - rho^2)) for
/// rho < 1 and base_entropy outside, rho = |x - center| / radius, centred
/// on a grid point.
ScalarField entropy_bump(const DataRecipe& recipe, const SpectralGrid& grid);

struct CompressibleData {
  CompressibleState state;
  /// Discrete ||(S, q, u, H)||_4 of this member.
  double h4_norm = 0.0;
  /// eps-independent bound on h4_norm for every member of the family.
  double m0_bound = 0.0;
};

/// Well-prepared: q0 = eps qhat, u0 = w + eps grad(psi).
/// General:       q0 = qhat,     u0 = w + grad(psi).
/// H0 solenoidal and S0 the entropy bump in both cases.
CompressibleData make_compressible_data(const DataRecipe& recipe, double eps, const SpectralGrid& grid,
                                        const Eos& eos);

/// (S0, filtered u0, H0) with pi from the pressure solve.
IncompressibleState make_limit_data(const SpectralGrid& grid, const CompressibleState& comp0, const Eos& eos,
                                    double tol);

/// Limit data of the whole family: the eps -> 0 member (q0 = 0, u0 = w).
IncompressibleState make_family_limit_data(const DataRecipe& recipe, const SpectralGrid& grid, const Eos& eos,
                                           double tol);

}  // namespace lowmach
