#pragma once

#include <Eigen/Dense>

namespace fwav {

/// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <typename Vector, typename Rhs>
Vector rk4_step(const Rhs& f, double t, const Vector& x, double dt) {
  const Vector k1 = f(t, x);
  const Vector k2 = f(t + 0.5 * dt, Vector(x + 0.5 * dt * k1));
  const Vector k3 = f(t + 0.5 * dt, Vector(x + 0.5 * dt * k2));
  const Vector k4 = f(t + dt, Vector(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fwav
