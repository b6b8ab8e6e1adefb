// Periodic uniform grid with Fourier pseudo-spectral operators.
//
// Samples are stored with the x index fastest: flat = ix + n*(iy + n*iz).
// A VectorField holds one column per component. Out-of-plane quantities in
// 2D (the curl of a planar field, a planar cross product) are 1-column
// VectorFields; curl of a 1-column field returns the planar field
// (d2 psi, -d1 psi).
#pragma once

#include <Eigen/Core>

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lowmach {

using Index = Eigen::Index;
using ScalarField = Eigen::ArrayXd;
using VectorField = Eigen::ArrayXXd;
using SpectralField = Eigen::ArrayXcd;

struct GridSpec {
  int dim = 2;
  int n = 64;
  double length = 2.0 * std::numbers::pi;

  void validate() const;
  Index size() const;
  double dx() const { return length / n; }
  double cell_volume() const;
  double domain_volume() const;
};

class GaugeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved_residual, int iterations)
      : std::runtime_error(what), achieved_residual_(achieved_residual), iterations_(iterations) {}
  double achieved_residual() const { return achieved_residual_; }
  int iterations() const { return iterations_; }

 private:
  double achieved_residual_;
  int iterations_;
};

/// Which spectral truncation the variable-coefficient operator applies to
/// the flux c * grad(phi) before taking its divergence.
enum class FluxTruncation { none, two_thirds };

struct EllipticReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

class SpectralGrid {
 public:
  explicit SpectralGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  Index size() const { return size_; }

  /// Physical wavenumber along `axis` for every flat index, Nyquist included.
  const Eigen::ArrayXd& wavenumber(int axis) const { return k_[axis]; }
  /// Same, with the Nyquist entry zeroed; used by first derivatives.
  const Eigen::ArrayXd& derivative_wavenumber(int axis) const { return kd_[axis]; }
  /// |k|^2 with the true Nyquist wavenumber.
  const Eigen::ArrayXd& k_squared() const { return k2_; }
  const Eigen::Array<bool, Eigen::Dynamic, 1>& dealias_mask() const { return keep_; }

  /// Sample coordinate along `axis` for every flat index.
  Eigen::ArrayXd coordinate(int axis) const;

  SpectralField forward(const ScalarField& f) const;
  ScalarField inverse(const SpectralField& f_hat) const;

  ScalarField partial(const ScalarField& f, int axis) const;
  VectorField grad(const ScalarField& f) const;
  ScalarField div(const VectorField& u) const;
  VectorField curl(const VectorField& u) const;
  ScalarField laplacian(const ScalarField& f) const;

  /// Zero-mean phi with laplacian(phi) = rhs. Throws GaugeError if rhs has
  /// a mean larger than 1e-10 relative to its RMS.
  ScalarField poisson_solve(const ScalarField& rhs) const;

  /// Zero-mean phi with div(c grad phi) = rhs, by conjugate gradients
  /// preconditioned with the inverse of mean(c) * laplacian. Stops once
  /// ||div(c grad phi) - rhs||_2 <= tol * ||rhs||_2.
  ScalarField var_coeff_elliptic_solve(const ScalarField& c, const ScalarField& rhs, double tol,
                                       FluxTruncation truncation = FluxTruncation::none,
                                       EllipticReport* report = nullptr,
                                       int max_iterations = 1000) const;
  /// The operator the solver inverts.
  ScalarField var_coeff_operator(const ScalarField& c, const ScalarField& phi,
                                 FluxTruncation truncation = FluxTruncation::none) const;

  /// Constant-coefficient projection onto divergence-free fields.
  VectorField leray_project(const VectorField& u) const;

  ScalarField dealias(const ScalarField& f) const;
  VectorField dealias(const VectorField& u) const;

  double sobolev_norm(const ScalarField& f, double s) const;
  double sobolev_norm(const VectorField& u, double s) const;

  double inner(const ScalarField& f, const ScalarField& g) const;
  double inner(const VectorField& u, const VectorField& w) const;
  double norm_l2(const ScalarField& f) const;
  double norm_l2(const VectorField& u) const;
  double integral(const ScalarField& f) const;
  double mean(const ScalarField& f) const;

 private:
  void transform_axes(SpectralField& data, bool inverse) const;

  GridSpec spec_;
  Index size_;
  std::array<Eigen::ArrayXd, 3> k_;
  std::array<Eigen::ArrayXd, 3> kd_;
  Eigen::ArrayXd k2_;
  Eigen::ArrayXd lap_symbol_;
  Eigen::Array<bool, Eigen::Dynamic, 1> keep_;
};

// Pointwise vector algebra on grid fields.

/// Cross product with the planar conventions described above.
VectorField cross(const VectorField& a, const VectorField& b);
/// (u . grad) f given the gradient of f.
ScalarField directional(const VectorField& u, const VectorField& grad_f);
/// (u . grad) w for a vector field w, one spectral gradient per component.
VectorField advect(const SpectralGrid& grid, const VectorField& u, const VectorField& w);
ScalarField dot(const VectorField& a, const VectorField& b);
ScalarField magnitude(const VectorField& a);

}  // namespace lowmach
