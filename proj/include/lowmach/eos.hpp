// Polytropic equation of state and the coefficient functions of the
// Mach-scaled system.
//
// All solver code reaches the gas law only through density_R and its
// pressure derivative, so replacing the polytropic law means replacing
// those two functions.
#pragma once

#include <cmath>
#include <stdexcept>

namespace lowmach {

template <typename Scalar = double>
struct EosParams {
  Scalar gamma = Scalar(1.4);
  Scalar p_bar = Scalar(1);

  void validate() const {
    if (!(gamma > Scalar(1))) throw std::domain_error("EosParams: gamma must exceed 1");
    if (!(p_bar > Scalar(0))) throw std::domain_error("EosParams: p_bar must be positive");
  }
};

/// Density rho = R(S, p) = p^{1/gamma} exp(-S/gamma).
template <typename Scalar>
Scalar density_R(Scalar entropy, Scalar pressure, const EosParams<Scalar>& eos) {
  using std::exp;
  using std::pow;
  if (!(pressure > Scalar(0))) throw std::domain_error("density_R: pressure must be positive");
  return pow(pressure, Scalar(1) / eos.gamma) * exp(-entropy / eos.gamma);
}

/// dR/dp at fixed entropy.
template <typename Scalar>
Scalar density_dp(Scalar entropy, Scalar pressure, const EosParams<Scalar>& eos) {
  return density_R(entropy, pressure, eos) / (eos.gamma * pressure);
}

template <typename Scalar>
Scalar scaled_pressure(Scalar eps_q, const EosParams<Scalar>& eos) {
  using std::exp;
  return eos.p_bar * exp(eps_q);
}

/// a(S, eps q) = (p / R) dR/dp evaluated at p = p_bar e^{eps q}.
/// Equals 1/gamma for the polytropic law.
template <typename Scalar>
Scalar coeff_a(Scalar entropy, Scalar eps_q, const EosParams<Scalar>& eos) {
  const Scalar p = scaled_pressure(eps_q, eos);
  return p / density_R(entropy, p, eos) * density_dp(entropy, p, eos);
}

/// r(S, eps q) = R(S, p) / p at p = p_bar e^{eps q}.
template <typename Scalar>
Scalar coeff_r(Scalar entropy, Scalar eps_q, const EosParams<Scalar>& eos) {
  const Scalar p = scaled_pressure(eps_q, eos);
  return density_R(entropy, p, eos) / p;
}

template <typename Scalar>
Scalar r0(Scalar entropy, const EosParams<Scalar>& eos) {
  return coeff_r(entropy, Scalar(0), eos);
}

/// g with eps * g = 1 - r0(S) / r(S, eps q).
///
/// Below eps = 1e-6 the quotient is replaced by its expansion in eps,
/// using d ln r / d(eps q) = a - 1 at eps q = 0.
template <typename Scalar>
Scalar g_factor(Scalar entropy, Scalar q, Scalar eps, const EosParams<Scalar>& eos) {
  if (eps < Scalar(0)) throw std::domain_error("g_factor: eps must be nonnegative");
  if (eps >= Scalar(1e-6)) {
    return (Scalar(1) - r0(entropy, eos) / coeff_r(entropy, eps * q, eos)) / eps;
  }
  const Scalar slope = coeff_a(entropy, Scalar(0), eos) - Scalar(1);
  return q * slope * (Scalar(1) - Scalar(0.5) * eps * q * slope);
}

}  // namespace lowmach
