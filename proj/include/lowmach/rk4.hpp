// Classical four-stage Runge-Kutta on a method-of-lines system.
#pragma once

#include <utility>

namespace lowmach {

/// One RK4 step. `rhs(y)` returns a tendency, `axpy(y, h, k)` returns
/// y + h*k with its clock advanced by h, and `project(y)` is applied to
/// every stage state and to the result.
template <typename Scalar, typename State, typename Rhs, typename Axpy, typename Project>
State rk4_step(const State& y, Scalar dt, Rhs&& rhs, Axpy&& axpy, Project&& project) {
  const Scalar half = dt / Scalar(2);
  const auto k1 = rhs(y);
  State y2 = axpy(y, half, k1);
  project(y2);
  const auto k2 = rhs(y2);
  State y3 = axpy(y, half, k2);
  project(y3);
  const auto k3 = rhs(y3);
  State y4 = axpy(y, dt, k3);
  project(y4);
  const auto k4 = rhs(y4);

  State out = axpy(y, dt / Scalar(6), k1);
  out = axpy(out, dt / Scalar(3), k2);
  out = axpy(out, dt / Scalar(3), k3);
  out = axpy(out, dt / Scalar(6), k4);
  project(out);
  return out;
}

}  // namespace lowmach
