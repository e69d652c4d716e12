#pragma once

// Helpers for arithmetic on logarithms of positive quantities. Every
// integral over the radial coordinate is carried as its logarithm so that
// weights like sinh(r)^a stay representable for r in the thousands.

#include <cmath>
#include <limits>

namespace hardykit::logspace {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

/// log(e^a + e^b) without overflow.
inline double add(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  if (a == pos_inf || b == pos_inf) return pos_inf;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// log(e^a - e^b) for a >= b. Returns -inf when the difference vanishes.
inline double sub(double a, double b) {
  if (b == neg_inf) return a;
  if (b >= a) return neg_inf;
  return a + std::log1p(-std::exp(b - a));
}

/// log(sinh(x)) for x > 0, stable for both tiny and huge x.
inline double log_sinh(double x) {
  if (x > 20.0) return x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}

/// log(cosh(x)), stable for huge |x|.
inline double log_cosh(double x) {
  x = std::fabs(x);
  if (x > 20.0) return x - std::log(2.0) + std::log1p(std::exp(-2.0 * x));
  return std::log(std::cosh(x));
}

/// exp() that maps -inf to 0 and saturates at +inf.
inline double to_linear(double log_value) { return std::exp(log_value); }

}  // namespace hardykit::logspace
