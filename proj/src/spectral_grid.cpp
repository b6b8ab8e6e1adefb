#include "lowmach/spectral_grid.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace lowmach {

namespace {

using Complex = std::complex<double>;

Eigen::FFT<double>& fft_engine() {
  // kissfft keeps a mutable twiddle cache, so one engine per thread.
  thread_local Eigen::FFT<double> engine;
  return engine;
}

}  // namespace

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("GridSpec: dim must be 2 or 3");
  if (n < 8 || n % 2 != 0) throw std::invalid_argument("GridSpec: n must be even and >= 8");
  if (!(length > 0.0)) throw std::invalid_argument("GridSpec: length must be positive");
}

Index GridSpec::size() const {
  Index total = 1;
  for (int d = 0; d < dim; ++d) total *= n;
  return total;
}

double GridSpec::cell_volume() const { return std::pow(dx(), dim); }

double GridSpec::domain_volume() const { return std::pow(length, dim); }

SpectralGrid::SpectralGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  size_ = spec_.size();
  const int n = spec_.n;
  const double k0 = 2.0 * std::numbers::pi / spec_.length;
  k2_ = Eigen::ArrayXd::Zero(size_);
  lap_symbol_ = Eigen::ArrayXd::Zero(size_);
  keep_ = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(size_, true);
  for (int axis = 0; axis < 3; ++axis) {
    k_[axis] = Eigen::ArrayXd::Zero(size_);
    kd_[axis] = Eigen::ArrayXd::Zero(size_);
  }
  for (Index flat = 0; flat < size_; ++flat) {
    Index rest = flat;
    for (int axis = 0; axis < spec_.dim; ++axis) {
      const int i = static_cast<int>(rest % n);
      rest /= n;
      const int m = i < n / 2 ? i : i - n;
      k_[axis](flat) = k0 * m;
      kd_[axis](flat) = (i == n / 2) ? 0.0 : k0 * m;
      if (3 * std::abs(m) > n) keep_(flat) = false;
    }
  }
  for (int axis = 0; axis < spec_.dim; ++axis) {
    k2_ += k_[axis].square();
    lap_symbol_ -= k_[axis].square();
  }
}

Eigen::ArrayXd SpectralGrid::coordinate(int axis) const {
  Eigen::ArrayXd x(size_);
  Index stride = 1;
  for (int a = 0; a < axis; ++a) stride *= spec_.n;
  for (Index flat = 0; flat < size_; ++flat) {
    x(flat) = static_cast<double>((flat / stride) % spec_.n) * spec_.dx();
  }
  return x;
}

void SpectralGrid::transform_axes(SpectralField& data, bool inverse) const {
  const Index n = spec_.n;
  std::vector<Complex> line(n), out(n);
  auto& engine = fft_engine();
  Index stride = 1;
  for (int axis = 0; axis < spec_.dim; ++axis) {
    const Index block = stride * n;
    for (Index outer = 0; outer < size_; outer += block) {
      for (Index inner = 0; inner < stride; ++inner) {
        const Index base = outer + inner;
        for (Index i = 0; i < n; ++i) line[i] = data(base + i * stride);
        if (inverse) {
          engine.inv(out, line);
        } else {
          engine.fwd(out, line);
        }
        for (Index i = 0; i < n; ++i) data(base + i * stride) = out[i];
      }
    }
    stride = block;
  }
}

SpectralField SpectralGrid::forward(const ScalarField& f) const {
  SpectralField data = f.cast<Complex>();
  transform_axes(data, false);
  return data;
}

ScalarField SpectralGrid::inverse(const SpectralField& f_hat) const {
  SpectralField data = f_hat;
  transform_axes(data, true);
  return data.real();
}

ScalarField SpectralGrid::partial(const ScalarField& f, int axis) const {
  const Complex i_unit(0.0, 1.0);
  return inverse(forward(f) * (i_unit * kd_[axis]));
}

VectorField SpectralGrid::grad(const ScalarField& f) const {
  const Complex i_unit(0.0, 1.0);
  const SpectralField f_hat = forward(f);
  VectorField g(size_, spec_.dim);
  for (int axis = 0; axis < spec_.dim; ++axis) {
    g.col(axis) = inverse(f_hat * (i_unit * kd_[axis]));
  }
  return g;
}

ScalarField SpectralGrid::div(const VectorField& u) const {
  if (u.cols() != spec_.dim) throw std::invalid_argument("div: component count must equal dim");
  const Complex i_unit(0.0, 1.0);
  SpectralField acc = SpectralField::Zero(size_);
  for (int axis = 0; axis < spec_.dim; ++axis) {
    acc += forward(u.col(axis)) * (i_unit * kd_[axis]);
  }
  return inverse(acc);
}

VectorField SpectralGrid::curl(const VectorField& u) const {
  const Complex i_unit(0.0, 1.0);
  auto d = [&](const SpectralField& c_hat, int axis) { return inverse(c_hat * (i_unit * kd_[axis])); };
  if (spec_.dim == 3) {
    if (u.cols() != 3) throw std::invalid_argument("curl: 3D fields need 3 components");
    const SpectralField u0 = forward(u.col(0));
    const SpectralField u1 = forward(u.col(1));
    const SpectralField u2 = forward(u.col(2));
    VectorField w(size_, 3);
    w.col(0) = d(u2, 1) - d(u1, 2);
    w.col(1) = d(u0, 2) - d(u2, 0);
    w.col(2) = d(u1, 0) - d(u0, 1);
    return w;
  }
  if (u.cols() == 2) {
    VectorField w(size_, 1);
    w.col(0) = d(forward(u.col(1)), 0) - d(forward(u.col(0)), 1);
    return w;
  }
  if (u.cols() == 1) {
    const SpectralField psi = forward(u.col(0));
    VectorField w(size_, 2);
    w.col(0) = d(psi, 1);
    w.col(1) = -d(psi, 0);
    return w;
  }
  throw std::invalid_argument("curl: 2D fields need 1 or 2 components");
}

ScalarField SpectralGrid::laplacian(const ScalarField& f) const {
  return inverse(forward(f) * lap_symbol_);
}

ScalarField SpectralGrid::poisson_solve(const ScalarField& rhs) const {
  const double rms = std::sqrt(rhs.square().mean());
  const double avg = rhs.mean();
  if (rms > 0.0 && std::abs(avg) > 1e-10 * rms) {
    throw GaugeError("poisson_solve: right-hand side must have zero mean");
  }
  SpectralField r_hat = forward(rhs);
  for (Index i = 0; i < size_; ++i) {
    r_hat(i) = lap_symbol_(i) != 0.0 ? r_hat(i) / lap_symbol_(i) : Complex(0.0);
  }
  return inverse(r_hat);
}

ScalarField SpectralGrid::var_coeff_operator(const ScalarField& c, const ScalarField& phi,
                                             FluxTruncation truncation) const {
  VectorField flux = grad(phi).colwise() * c;
  if (truncation == FluxTruncation::two_thirds) flux = dealias(flux);
  return div(flux);
}

ScalarField SpectralGrid::var_coeff_elliptic_solve(const ScalarField& c, const ScalarField& rhs,
                                                   double tol, FluxTruncation truncation,
                                                   EllipticReport* report,
                                                   int max_iterations) const {
  if (!(c.minCoeff() > 0.0)) {
    throw std::domain_error("var_coeff_elliptic_solve: coefficient must be strictly positive");
  }
  const double rms = std::sqrt(rhs.square().mean());
  if (rms > 0.0 && std::abs(rhs.mean()) > 1e-10 * rms) {
    throw GaugeError("var_coeff_elliptic_solve: right-hand side must have zero mean");
  }

  // Symbol of -mean(c) * div grad, zero on the operator's null space.
  Eigen::ArrayXd precond_symbol = Eigen::ArrayXd::Zero(size_);
  for (int axis = 0; axis < spec_.dim; ++axis) precond_symbol += kd_[axis].square();
  precond_symbol *= c.mean();
  if (truncation == FluxTruncation::two_thirds) {
    precond_symbol = keep_.select(precond_symbol, 0.0);
  }
  auto restrict_range = [&](const ScalarField& f) {
    SpectralField f_hat = forward(f);
    for (Index i = 0; i < size_; ++i) {
      if (precond_symbol(i) == 0.0) f_hat(i) = 0.0;
    }
    return inverse(f_hat);
  };
  auto precondition = [&](const ScalarField& r) {
    SpectralField r_hat = forward(r);
    for (Index i = 0; i < size_; ++i) {
      r_hat(i) = precond_symbol(i) != 0.0 ? r_hat(i) / precond_symbol(i) : Complex(0.0);
    }
    return inverse(r_hat);
  };
  // CG runs on the SPD operator -div(c grad .).
  auto apply = [&](const ScalarField& p) { return ScalarField(-var_coeff_operator(c, p, truncation)); };

  const ScalarField b = -restrict_range(rhs);
  const double b_norm = std::sqrt(b.square().sum());
  const double rhs_norm = std::sqrt(rhs.square().sum());
  ScalarField phi = ScalarField::Zero(size_);
  if (report) *report = {};
  if (rhs_norm == 0.0) return phi;

  const double target = tol * rhs_norm;
  ScalarField r = b;
  int iterations = 0;
  double true_residual = b_norm;
  while (iterations < max_iterations) {
    ScalarField z = precondition(r);
    ScalarField p = z;
    double rz = (r * z).sum();
    bool converged_recursive = false;
    while (iterations < max_iterations) {
      const ScalarField ap = apply(p);
      const double pap = (p * ap).sum();
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      phi += alpha * p;
      r -= alpha * ap;
      ++iterations;
      if (std::sqrt(r.square().sum()) <= target) {
        converged_recursive = true;
        break;
      }
      z = precondition(r);
      const double rz_next = (r * z).sum();
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    // Confirm against the true residual; restart from it otherwise.
    r = b - apply(phi);
    true_residual = std::sqrt(r.square().sum());
    if (true_residual <= target || !converged_recursive) break;
  }
  if (report) {
    report->iterations = iterations;
    report->relative_residual = true_residual / rhs_norm;
  }
  if (true_residual > target) {
    throw ConvergenceError("var_coeff_elliptic_solve: residual tolerance not reached",
                           true_residual / rhs_norm, iterations);
  }
  phi -= phi.mean();
  return phi;
}

VectorField SpectralGrid::leray_project(const VectorField& u) const {
  return u - grad(poisson_solve(div(u)));
}

ScalarField SpectralGrid::dealias(const ScalarField& f) const {
  SpectralField f_hat = forward(f);
  f_hat = keep_.select(f_hat, Complex(0.0));
  return inverse(f_hat);
}

VectorField SpectralGrid::dealias(const VectorField& u) const {
  VectorField out(u.rows(), u.cols());
  for (Index c = 0; c < u.cols(); ++c) out.col(c) = dealias(ScalarField(u.col(c)));
  return out;
}

double SpectralGrid::sobolev_norm(const ScalarField& f, double s) const {
  const SpectralField f_hat = forward(f);
  const Eigen::ArrayXd weight = (1.0 + k2_).pow(s);
  const double scale = spec_.cell_volume() / static_cast<double>(size_);
  return std::sqrt(scale * (weight * f_hat.abs2()).sum());
}

double SpectralGrid::sobolev_norm(const VectorField& u, double s) const {
  double total = 0.0;
  for (Index c = 0; c < u.cols(); ++c) {
    const double part = sobolev_norm(ScalarField(u.col(c)), s);
    total += part * part;
  }
  return std::sqrt(total);
}

double SpectralGrid::inner(const ScalarField& f, const ScalarField& g) const {
  return spec_.cell_volume() * (f * g).sum();
}

double SpectralGrid::inner(const VectorField& u, const VectorField& w) const {
  return spec_.cell_volume() * (u * w).sum();
}

double SpectralGrid::norm_l2(const ScalarField& f) const { return std::sqrt(inner(f, f)); }

double SpectralGrid::norm_l2(const VectorField& u) const { return std::sqrt(inner(u, u)); }

double SpectralGrid::integral(const ScalarField& f) const { return spec_.cell_volume() * f.sum(); }

double SpectralGrid::mean(const ScalarField& f) const { return f.mean(); }

VectorField cross(const VectorField& a, const VectorField& b) {
  const Index rows = a.rows();
  if (a.cols() == 3 && b.cols() == 3) {
    VectorField c(rows, 3);
    c.col(0) = a.col(1) * b.col(2) - a.col(2) * b.col(1);
    c.col(1) = a.col(2) * b.col(0) - a.col(0) * b.col(2);
    c.col(2) = a.col(0) * b.col(1) - a.col(1) * b.col(0);
    return c;
  }
  if (a.cols() == 2 && b.cols() == 2) {
    VectorField c(rows, 1);
    c.col(0) = a.col(0) * b.col(1) - a.col(1) * b.col(0);
    return c;
  }
  if (a.cols() == 1 && b.cols() == 2) {
    VectorField c(rows, 2);
    c.col(0) = -a.col(0) * b.col(1);
    c.col(1) = a.col(0) * b.col(0);
    return c;
  }
  if (a.cols() == 2 && b.cols() == 1) {
    VectorField c(rows, 2);
    c.col(0) = a.col(1) * b.col(0);
    c.col(1) = -a.col(0) * b.col(0);
    return c;
  }
  throw std::invalid_argument("cross: unsupported component counts");
}

ScalarField directional(const VectorField& u, const VectorField& grad_f) {
  return (u * grad_f).rowwise().sum();
}

VectorField advect(const SpectralGrid& grid, const VectorField& u, const VectorField& w) {
  VectorField out(w.rows(), w.cols());
  for (Index c = 0; c < w.cols(); ++c) {
    out.col(c) = directional(u, grid.grad(ScalarField(w.col(c))));
  }
  return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) { return (a * b).rowwise().sum(); }

ScalarField magnitude(const VectorField& a) { return a.square().rowwise().sum().sqrt(); }

}  // namespace lowmach
