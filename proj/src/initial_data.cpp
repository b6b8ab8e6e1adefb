#include "lowmach/initial_data.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lowmach {

namespace {

enum Stream : std::uint64_t { solenoidal = 1, gradient = 2, pressure = 3, magnetic = 4 };

struct Components {
  VectorField w;
  VectorField grad_part;
  ScalarField q_profile;
  VectorField H;
  ScalarField S;
};

Components make_components(const DataRecipe& recipe, const SpectralGrid& grid) {
  Components c;
  c.w = random_solenoidal_field(recipe, grid, recipe.seed * 8 + Stream::solenoidal);
  const ScalarField psi =
      random_band_limited_field(grid, recipe.k_min, recipe.k_max, 1.0, recipe.seed, Stream::gradient);
  c.grad_part = grid.grad(psi);
  const double rms = std::sqrt(c.grad_part.square().rowwise().sum().mean());
  c.grad_part *= rms > 0.0 ? recipe.amplitude / rms : 0.0;
  c.q_profile = random_band_limited_field(grid, recipe.k_min, recipe.k_max, recipe.amplitude, recipe.seed,
                                          Stream::pressure);
  c.H = random_solenoidal_field(recipe, grid, recipe.seed * 8 + Stream::magnetic);
  c.S = entropy_bump(recipe, grid);
  return c;
}

}  // namespace

std::string to_string(DataKind kind) {
  return kind == DataKind::well_prepared ? "well_prepared" : "general";
}

DataKind data_kind_from_string(const std::string& name) {
  if (name == "well_prepared") return DataKind::well_prepared;
  if (name == "general") return DataKind::general;
  throw std::invalid_argument("unknown data kind: " + name);
}

void DataRecipe::validate(const GridSpec& grid) const {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("DataRecipe: amplitude must be nonnegative");
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("DataRecipe: need 1 <= k_min <= k_max");
  if (3 * k_max >= grid.n) throw std::invalid_argument("DataRecipe: k_max must be below n/3");
  if (!(entropy_amplitude >= 0.0)) throw std::invalid_argument("DataRecipe: entropy_amplitude must be >= 0");
  if (!(bump_radius > 0.0 && bump_radius < 0.5)) {
    throw std::invalid_argument("DataRecipe: bump_radius must lie in (0, 0.5)");
  }
  if (!(bump_steepness > 0.0)) throw std::invalid_argument("DataRecipe: bump_steepness must be positive");
}

ScalarField random_band_limited_field(const SpectralGrid& grid, int k_min, int k_max, double rms,
                                      std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  ScalarField noise(grid.size());
  for (Index i = 0; i < grid.size(); ++i) noise(i) = normal(rng);

  const double k0 = 2.0 * std::numbers::pi / grid.spec().length;
  const Eigen::ArrayXd shell = grid.k_squared().sqrt() / k0;
  SpectralField hat = grid.forward(noise);
  for (Index i = 0; i < grid.size(); ++i) {
    if (shell(i) < k_min - 1e-9 || shell(i) > k_max + 1e-9) hat(i) = 0.0;
  }
  ScalarField f = grid.inverse(hat);
  const double current = std::sqrt(f.square().mean());
  if (current == 0.0 || rms == 0.0) return ScalarField::Zero(grid.size());
  return f * (rms / current);
}

VectorField random_solenoidal_field(const DataRecipe& recipe, const SpectralGrid& grid, std::uint64_t seed) {
  VectorField u;
  if (grid.dim() == 2) {
    VectorField psi(grid.size(), 1);
    psi.col(0) = random_band_limited_field(grid, recipe.k_min, recipe.k_max, 1.0, seed, 0);
    u = grid.curl(psi);
  } else {
    VectorField potential(grid.size(), 3);
    for (int c = 0; c < 3; ++c) {
      potential.col(c) = random_band_limited_field(grid, recipe.k_min, recipe.k_max, 1.0, seed, 10 + c);
    }
    u = grid.curl(potential);
  }
  const double rms = std::sqrt(u.square().rowwise().sum().mean());
  if (rms == 0.0 || recipe.amplitude == 0.0) return VectorField::Zero(grid.size(), grid.dim());
  return u * (recipe.amplitude / rms);
}

ScalarField entropy_bump(const DataRecipe& recipe, const SpectralGrid& grid) {
  const double length = grid.spec().length;
  const double radius = recipe.bump_radius * length;
  // n is even, so L/2 is a grid coordinate along every axis.
  const double center = 0.5 * length;
  Eigen::ArrayXd rho2 = Eigen::ArrayXd::Zero(grid.size());
  for (int axis = 0; axis < grid.dim(); ++axis) {
    rho2 += ((grid.coordinate(axis) - center) / radius).square();
  }
  ScalarField S(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double profile =
        rho2(i) < 1.0 ? std::exp(-recipe.bump_steepness * rho2(i) / (1.0 - rho2(i))) : 0.0;
    S(i) = recipe.base_entropy + recipe.entropy_amplitude * profile;
  }
  return S;
}

CompressibleData make_compressible_data(const DataRecipe& recipe, double eps, const SpectralGrid& grid,
                                        const Eos& eos) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("make_compressible_data: eps must lie in (0,1]");
  recipe.validate(grid.spec());
  eos.validate();
  const Components c = make_components(recipe, grid);

  CompressibleData data;
  CompressibleState& s = data.state;
  s.eps = eps;
  s.t = 0.0;
  s.H = c.H;
  s.S = c.S;
  if (recipe.kind == DataKind::well_prepared) {
    s.q = eps * c.q_profile;
    s.u = c.w + eps * c.grad_part;
  } else {
    s.q = c.q_profile;
    s.u = c.w + c.grad_part;
  }
  data.h4_norm = grid.sobolev_norm(s.S, 4.0) + grid.sobolev_norm(s.q, 4.0) + grid.sobolev_norm(s.u, 4.0) +
                 grid.sobolev_norm(s.H, 4.0);
  data.m0_bound = grid.sobolev_norm(c.S, 4.0) + grid.sobolev_norm(c.q_profile, 4.0) +
                  grid.sobolev_norm(c.w, 4.0) + grid.sobolev_norm(c.grad_part, 4.0) +
                  grid.sobolev_norm(c.H, 4.0);
  return data;
}

IncompressibleState make_limit_data(const SpectralGrid& grid, const CompressibleState& comp0, const Eos& eos,
                                    double tol) {
  IncompressibleState s;
  s.Sbar = comp0.S;
  s.Hbar = comp0.H;
  s.v = filter_initial_velocity(grid, comp0.u, comp0.S, eos, tol);
  s.t = comp0.t;
  s.pi = pressure_solve(grid, s, eos, tol);
  return s;
}

IncompressibleState make_family_limit_data(const DataRecipe& recipe, const SpectralGrid& grid, const Eos& eos,
                                           double tol) {
  recipe.validate(grid.spec());
  const Components c = make_components(recipe, grid);
  CompressibleState limit;
  limit.q = ScalarField::Zero(grid.size());
  limit.u = c.w;
  limit.H = c.H;
  limit.S = c.S;
  limit.eps = 1.0;
  return make_limit_data(grid, limit, eos, tol);
}

}  // namespace lowmach
