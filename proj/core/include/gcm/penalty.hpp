#pragma once

#include <cmath>
#include <string>

#include "gcm/error.hpp"

namespace gcm {

namespace detail {

inline void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("huber epsilon must be > 0, got " + std::to_string(epsilon));
  }
}

inline void require_delta(double delta) {
  if (!(delta >= 0.0)) {
    throw DomainError("smoothed hinge delta must be >= 0, got " + std::to_string(delta));
  }
}

}  // namespace detail

// Huber penalty: quadratic t^2 / (2 eps) on |t| <= eps, linear |t| - eps/2
// outside. Continuously differentiable; approaches |t| as eps -> 0.
inline double huber(double t, double epsilon) {
  detail::require_epsilon(epsilon);
  const double a = std::abs(t);
  return a <= epsilon ? t * t / (2.0 * epsilon) : a - 0.5 * epsilon;
}

inline double huber_prime(double t, double epsilon) {
  detail::require_epsilon(epsilon);
  if (std::abs(t) <= epsilon) return t / epsilon;
  return t > 0.0 ? 1.0 : -1.0;
}

// Smoothed hinge loss on the soft margin t:
//   0                      t >= 1
//   (1 - t)^2 / (4 delta)  1 - 2 delta < t < 1
//   1 - t - delta          t <= 1 - 2 delta
// The branches meet with equal value and slope, so the junction is assigned
// to the linear piece, where the slope is exactly -1.
// delta = 0 is the exact hinge max(0, 1 - t); the quadratic band is empty.
inline double smoothed_hinge(double t, double delta) {
  detail::require_delta(delta);
  if (t >= 1.0) return 0.0;
  if (t > 1.0 - 2.0 * delta) {
    const double r = 1.0 - t;
    return r * r / (4.0 * delta);
  }
  return 1.0 - t - delta;
}

// Derivative of smoothed_hinge. At delta = 0 this is the subgradient element
// -1 for t < 1 and 0 for t >= 1.
inline double smoothed_hinge_prime(double t, double delta) {
  detail::require_delta(delta);
  if (t >= 1.0) return 0.0;
  if (t > 1.0 - 2.0 * delta) return (t - 1.0) / (2.0 * delta);
  return -1.0;
}

inline double hinge(double t) { return t < 1.0 ? 1.0 - t : 0.0; }

}  // namespace gcm
