#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature.
//
// Two engines share the rule:
//  * a linear one for signed integrands on finite intervals, and
//  * a log-scaled one for positive integrands given through their
//    logarithm, used for every weight integral over (0, R) and (R, inf).
//    Semi-infinite pieces are integrated in x = log(r - lo) and closed off
//    by extrapolating the local exponential rate of the integrand in x,
//    which is exact for pure power laws. This keeps integrals such as
//    int_1^inf r^{-1.001} dr (value 1000) accurate.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"

namespace hardykit::quad {

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-14;
  int max_subdivisions = 2000;

  Tolerance tightened(double factor) const {
    Tolerance t = *this;
    t.rel /= factor;
    t.abs /= factor;
    return t;
  }
  void validate() const {
    if (!(rel > 0.0) || !(abs > 0.0) || max_subdivisions <= 0) {
      throw DomainError("tolerances must be positive");
    }
  }
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 0;
};

/// Result of the log-scaled engine: the integral is exp(log_value).
struct LogQuadResult {
  double log_value = logspace::neg_inf;
  double rel_error = 0.0;
  int subdivisions = 0;

  double value() const { return std::exp(log_value); }
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights.
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for xgk[1], xgk[3], xgk[5], xgk[7].
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr double eps = std::numeric_limits<double>::epsilon();

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <class F>
Panel gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  auto sample = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite integrand value " << y << " at " << x;
      throw IntegrandError(os.str(), x);
    }
    return y;
  };
  const double fc = sample(c);
  double k = wgk[7] * fc;
  double g = wg[3] * fc;
  double kabs = std::fabs(k);
  for (int i = 0; i < 7; ++i) {
    const double f1 = sample(c - h * xgk[i]);
    const double f2 = sample(c + h * xgk[i]);
    k += wgk[i] * (f1 + f2);
    kabs += wgk[i] * (std::fabs(f1) + std::fabs(f2));
    if (i % 2 == 1) g += wg[i / 2] * (f1 + f2);
  }
  const double err = std::max(std::fabs(k - g), 50.0 * eps * kabs) * std::fabs(h);
  return {a, b, k * h, err};
}

struct LogPanel {
  // log_floor bounds the error caused by rounding in the samples of g and
  // in x itself; bisection cannot go below it.
  double a, b, log_value, log_err, log_floor;
  bool operator<(const LogPanel& o) const { return log_err < o.log_err; }
};

// Kronrod/Gauss sums of exp(y_i) on the 15 nodes; y_0 is the centre and
// y_{1+2i}, y_{2+2i} the pair at -/+ xgk[i]. Returns log K, log |K - G| and
// the largest y.
struct LogSums {
  double m, log_k, log_diff;
};

inline LogSums log_sums(const std::array<double, 15>& y) {
  double m = logspace::neg_inf;
  for (double v : y) m = std::max(m, v);
  if (m == logspace::neg_inf) return {m, m, m};
  auto e = [&](int i) { return std::exp(y[i] - m); };
  double k = wgk[7] * e(0);
  double gs = wg[3] * e(0);
  for (int i = 0; i < 7; ++i) {
    const double pair = e(1 + 2 * i) + e(2 + 2 * i);
    k += wgk[i] * pair;
    if (i % 2 == 1) gs += wg[i / 2] * pair;
  }
  const double diff = std::max(std::fabs(k - gs), 50.0 * eps * k);
  return {m, m + std::log(k), m + std::log(diff)};
}

inline double max_abs_finite(const std::array<double, 15>& y) {
  double r = 0.0;
  for (double v : y) {
    if (std::isfinite(v)) r = std::max(r, std::fabs(v));
  }
  return r;
}

// Rule for panels on which exp(g) falls by many orders of magnitude away
// from the left end: with kappa ~ -g'(a) and
//   x(t) = a - log(1 - t (1 - E)) / kappa,  E = exp(-kappa (b - a)),
// the integral becomes (1 - E)/kappa * int_0^1 exp(g(x) + kappa (x - a)) dt,
// whose integrand is nearly constant when g is nearly linear near a.
// dir = -1 anchors at the right end instead.
// noise_scale multiplies kappa in the rounding-noise estimate: the size of
// the coordinate in which g is really evaluated.
template <class G>
LogPanel log_gk15_fitted(const G& g, double a, double b, double kappa, int dir, double noise_scale) {
  const double w = b - a;
  const double E = std::exp(-kappa * w);
  const double one_minus_E = -std::expm1(-kappa * w);
  std::array<double, 15> z{};
  double ymax = 0.0;
  auto sample = [&](double t) {
    // 1 - t (1 - E) written to avoid cancellation near t = 1.
    const double s = E + (1.0 - t) * one_minus_E;
    const double d = -std::log(s) / kappa;  // distance from the anchor
    const double x = dir > 0 ? a + std::min(d, w) : b - std::min(d, w);
    const double gx = g(x);
    if (std::isnan(gx) || gx == logspace::pos_inf) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite log-integrand value " << gx << " at " << x;
      throw IntegrandError(os.str(), x);
    }
    if (std::isfinite(gx)) ymax = std::max(ymax, std::fabs(gx));
    return gx + kappa * d;
  };
  z[0] = sample(0.5);
  for (int i = 0; i < 7; ++i) {
    z[1 + 2 * i] = sample(0.5 - 0.5 * xgk[i]);
    z[2 + 2 * i] = sample(0.5 + 0.5 * xgk[i]);
  }
  const LogSums sums = log_sums(z);
  if (sums.m == logspace::neg_inf) return {a, b, logspace::neg_inf, logspace::neg_inf, logspace::neg_inf};
  const double scale = std::log(0.5 * one_minus_E / kappa);
  const double noise = 4.0 * eps * (ymax + kappa * noise_scale);
  const double log_value = sums.log_k + scale;
  return {a, b, log_value, sums.log_diff + scale, log_value + std::log(noise + 1e-300)};
}

template <class G>
LogPanel log_gk15(const G& g, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> y{};
  y[0] = g(c);
  for (int i = 0; i < 7; ++i) {
    y[1 + 2 * i] = g(c - h * xgk[i]);
    y[2 + 2 * i] = g(c + h * xgk[i]);
  }
  for (int i = 0; i < 15; ++i) {
    if (std::isnan(y[i]) || y[i] == logspace::pos_inf) {
      const double x = i == 0 ? c : (i % 2 == 1 ? c - h * xgk[(i - 1) / 2] : c + h * xgk[(i - 1) / 2]);
      std::ostringstream os;
      os.precision(17);
      os << "non-finite log-integrand value " << y[i] << " at " << x;
      throw IntegrandError(os.str(), x);
    }
  }
  const LogSums sums = log_sums(y);
  if (sums.m == logspace::neg_inf) return {a, b, logspace::neg_inf, logspace::neg_inf, logspace::neg_inf};
  double slope = 0.0;
  if (std::isfinite(y[13]) && std::isfinite(y[14])) {
    slope = std::fabs(y[14] - y[13]) / (2.0 * h * xgk[6]);
  }
  const double noise = 4.0 * eps * (max_abs_finite(y) + slope * std::max(std::fabs(a), std::fabs(b)));
  const double log_value = sums.log_k + std::log(h);
  LogPanel plain{a, b, log_value, sums.log_diff + std::log(h), log_value + std::log(noise + 1e-300)};

  // Steep panels: try the rule fitted to the heavier end, both in x and in
  // r = exp(x). Weights that decay exponentially in r are linear in the
  // latter, where the fitted rule is exact.
  constexpr double steep = 10.0;
  if (!(std::fabs(y[1] - y[2]) > steep) || !std::isfinite(y[1]) || !std::isfinite(y[2])) return plain;
  const int dir = y[1] > y[2] ? 1 : -1;
  LogPanel best = plain;
  auto consider = [&](const auto& gf, double lo, double hi, double noise_scale) {
    const double anchor = dir > 0 ? lo : hi;
    const double w = hi - lo;
    // Decay rate at the anchor from the mean rate over the panel, refined
    // by a one-sided Richardson difference: the fitted rule is only as
    // good as this rate.
    double kappa = std::fabs(y[1] - y[2]) / w;
    const double step = std::min(1e-3 / kappa, 0.01 * w) * dir;
    const double g0 = gf(anchor), g1 = gf(anchor + step), g2 = gf(anchor + 2 * step);
    if (!std::isfinite(g0) || !std::isfinite(g1) || !std::isfinite(g2)) return;
    const double k2 = -(4.0 * (g1 - g0) - (g2 - g0)) / (2.0 * step) * dir;
    if (!(k2 * w > steep)) return;
    LogPanel f = log_gk15_fitted(gf, lo, hi, k2, dir, noise_scale);
    if (f.log_err - f.log_value < best.log_err - best.log_value) {
      best = f;
      best.a = a;
      best.b = b;
    }
  };
  const double xmax = std::max(std::fabs(a), std::fabs(b));
  consider(g, a, b, xmax);
  if (b < 700.0 && a > -700.0) {
    // Samples still pass through x = log(rho), so the rounding of x sets
    // the noise: d g / d x = kappa * rho.
    auto gr = [&](double rho) { return g(std::log(rho)) - std::log(rho); };
    consider(gr, std::exp(a), std::exp(b), std::exp(b) * std::max(1.0, xmax));
  }
  return best;
}

}  // namespace detail

/// Plain adaptive bisection on [lo, hi] without endpoint treatment.
template <class F>
QuadResult integrate_adaptive(const F& f, double lo, double hi, const Tolerance& tol) {
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15(f, lo, hi));
  int subdivisions = 1;
  for (;;) {
    // Summing in interval order keeps results independent of heap layout.
    std::vector<detail::Panel> panels;
    {
      auto copy = heap;
      while (!copy.empty()) {
        panels.push_back(copy.top());
        copy.pop();
      }
    }
    std::sort(panels.begin(), panels.end(),
              [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    double value = 0.0;
    double err = 0.0;
    for (const auto& p : panels) {
      value += p.value;
      err += p.err;
    }
    if (err <= std::max(tol.abs, tol.rel * std::fabs(value))) {
      return {value, err, subdivisions};
    }
    if (subdivisions >= tol.max_subdivisions) {
      std::ostringstream os;
      os.precision(17);
      os << "divergence suspected: no convergence within " << tol.max_subdivisions
         << " subdivisions on [" << lo << ", " << hi << "], partial value " << value;
      throw DivergenceError(os.str(), value);
    }
    detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      std::ostringstream os;
      os << "divergence suspected: interval exhausted near " << worst.a;
      throw DivergenceError(os.str(), value);
    }
    heap.push(detail::gk15(f, worst.a, mid));
    heap.push(detail::gk15(f, mid, worst.b));
    ++subdivisions;
  }
}

/// Integral of f over [lo, hi]. An integrable power singularity at lo is
/// detected by probing and removed by the substitution r = lo + t^2.
template <class F>
QuadResult integrate_finite(const F& f, double lo, double hi, const Tolerance& tol = {}) {
  tol.validate();
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("integrate_finite needs finite lo < hi");
  }
  const double w = hi - lo;
  bool singular = true;
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double x = lo + 1e-3 * w * std::pow(4.0, -k);
    const double y = std::fabs(f(x));
    if (!std::isfinite(y)) throw IntegrandError("non-finite integrand value near lower limit", x);
    if (k > 0 && !(y > prev)) singular = false;
    prev = y;
  }
  if (!singular) return integrate_adaptive(f, lo, hi, tol);
  auto g = [&](double t) { return 2.0 * t * f(lo + t * t); };
  return integrate_adaptive(g, 0.0, std::sqrt(w), tol);
}

/// Log-scaled adaptive integral of exp(g(x)) over the finite interval [a, b].
/// The relative tolerance applies to the larger of the integral and
/// exp(log_reference), for integrals that will be added to a known amount.
template <class G>
LogQuadResult log_integrate(const G& g, double a, double b, const Tolerance& tol = {},
                            double log_reference = logspace::neg_inf) {
  if (!(a < b)) {
    if (a == b) return {logspace::neg_inf, 0.0, 0};
    throw DomainError("log_integrate needs a <= b");
  }
  const double log_rel = std::log(tol.rel);
  const detail::LogPanel first = detail::log_gk15(g, a, b);
  {
    const double scale = std::max(first.log_value, log_reference);
    if (first.log_value == logspace::neg_inf && log_reference == logspace::neg_inf) return {first.log_value, 0.0, 1};
    if (first.log_err <= log_rel + scale || first.log_err <= first.log_floor + std::log(2.0)) {
      const double rel = first.log_value == logspace::neg_inf
                             ? 0.0
                             : std::exp(std::max(first.log_err, first.log_floor) - first.log_value);
      return {first.log_value, rel, 1};
    }
  }
  // Panels whose error stops shrinking under bisection while already small
  // are limited by noise in g (for example a cancellation inside g) and are
  // frozen; their error is reported but no longer refined.
  std::vector<detail::LogPanel> panels{first};
  std::vector<char> frozen{0};
  int subdivisions = 1;
  for (;;) {
    double total = logspace::neg_inf, err = logspace::neg_inf, floor = logspace::neg_inf;
    std::size_t worst = panels.size();
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const auto& p = panels[i];
      total = logspace::add(total, p.log_value);
      err = logspace::add(err, p.log_err);
      floor = logspace::add(floor, frozen[i] ? p.log_err : p.log_floor);
      if (!frozen[i] && (worst == panels.size() || p.log_err > panels[worst].log_err)) worst = i;
    }
    if (total == logspace::neg_inf || err <= log_rel + std::max(total, log_reference) ||
        err <= floor + std::log(2.0) || worst == panels.size()) {
      const double rel = total == logspace::neg_inf ? 0.0 : std::exp(std::max(err, floor) - total);
      return {total, rel, subdivisions};
    }
    if (subdivisions >= tol.max_subdivisions) {
      std::ostringstream os;
      os.precision(17);
      os << "divergence suspected: no convergence within " << tol.max_subdivisions
         << " subdivisions on [" << a << ", " << b << "] (log scale)";
      throw DivergenceError(os.str(), std::exp(total));
    }
    const detail::LogPanel parent = panels[worst];
    const double mid = 0.5 * (parent.a + parent.b);
    if (!(mid > parent.a && mid < parent.b)) {
      throw DivergenceError("divergence suspected: interval exhausted", std::exp(total));
    }
    const detail::LogPanel left = detail::log_gk15(g, parent.a, mid);
    const detail::LogPanel right = detail::log_gk15(g, mid, parent.b);
    const double children_err = logspace::add(left.log_err, right.log_err);
    if (children_err >= parent.log_err) {
      // Bisection made things worse (the halves fell back to a cruder
      // rule); the parent estimate is the best available.
      frozen[worst] = 1;
      ++subdivisions;
      continue;
    }
    const bool stalled = children_err > parent.log_err + std::log(0.5) &&
                         parent.log_err - parent.log_value < std::log(1e-5);
    panels[worst] = left;
    frozen[worst] = stalled;
    panels.push_back(right);
    frozen.push_back(stalled);
    ++subdivisions;
  }
}

/// Largest |x| at which exp(x) is still a normal double.
inline constexpr double log_scale_cap = 708.0;

/// Log-scaled integral of exp(g(x)) over [x0, inf).
///
/// Marches in widening steps and stops when the remaining mass, estimated
/// from the local decay rate k = -g'(X) as exp(g(X))/k, is negligible or
/// when the rate is constant (exponential decay in x, i.e. a power law in
/// the original variable), in which case the estimate is exact. If the
/// integrand still fails to decay at x = log_scale_cap the integral is
/// reported as divergent.
template <class G>
LogQuadResult log_integrate_to_infinity(const G& g, double x0, const Tolerance& tol = {},
                                        double x_cap = log_scale_cap) {
  constexpr double min_rate = 1e-7;
  constexpr double delta = 1e-4;
  double total = logspace::neg_inf;
  double err = logspace::neg_inf;
  int subdivisions = 0;
  double x = x0;
  double h = 1.0;
  const double cap = std::max(x_cap, x0 + 8.0);
  const double log_rel = std::log(tol.rel);
  auto rate_at = [&](double at) { return -(g(at) - g(at - delta)) / delta; };
  for (;;) {
    const double g_next = g(x + h);
    if (g_next == logspace::pos_inf || std::isnan(g_next)) {
      // The log of the integrand left the double range (a NaN here is
      // inf - inf between overflowing terms). Decide from the trend at the
      // last representable point.
      if (g_next == logspace::pos_inf || rate_at(x) <= 0.0) {
        std::ostringstream os;
        os.precision(6);
        os << "divergence: log of the integrand overflows at log-scale " << x + h;
        throw DivergenceError(os.str(), logspace::pos_inf);
      }
      break;  // decaying: what is left is below exp(-1e300)
    }
    LogQuadResult seg = log_integrate(g, x, x + h, tol);
    total = logspace::add(total, seg.log_value);
    if (seg.log_value != logspace::neg_inf) {
      err = logspace::add(err, seg.log_value + std::log(std::max(seg.rel_error, 1e-300)));
    }
    subdivisions += seg.subdivisions;
    x += h;
    const double gx = g(x);
    if (std::isnan(gx) || gx == logspace::pos_inf) {
      throw IntegrandError("non-finite log-integrand in tail", x);
    }
    if (gx == logspace::neg_inf) break;
    const double k1 = rate_at(x);
    const double k2 = rate_at(x - 0.5 * h);
    if (k1 > min_rate) {
      const double rest = gx - std::log(k1);
      const double spread = std::fabs(k1 - k2) / k1;
      if (spread <= 1e-6) {
        total = logspace::add(total, rest);
        err = logspace::add(err, rest + std::log(spread + 1e-9));
        break;
      }
      if (rest <= log_rel - 7.0 + total) {
        total = logspace::add(total, rest);
        err = logspace::add(err, rest);
        break;
      }
      if (x >= cap) {
        // Slowly varying rate at the end of the representable range: keep
        // the extrapolated remainder and report it entirely as error.
        total = logspace::add(total, rest);
        err = logspace::add(err, rest);
        break;
      }
    } else if (x >= cap) {
      std::ostringstream os;
      os.precision(6);
      os << "divergence suspected: integrand does not decay (log-rate " << k1 << " at log-scale "
         << x << ")";
      throw DivergenceError(os.str(), std::exp(total));
    }
    h = std::min(2.0 * h, 32.0);
    h = std::min(h, std::max(cap - x, 1.0));
  }
  const double rel = total == logspace::neg_inf ? 0.0 : std::exp(err - total);
  return {total, rel, subdivisions};
}

/// Log-scaled integral of exp(g(x)) over (-inf, x1].
template <class G>
LogQuadResult log_integrate_from_minus_infinity(const G& g, double x1, const Tolerance& tol = {},
                                                double x_cap = log_scale_cap) {
  auto mirrored = [&](double y) { return g(-y); };
  return log_integrate_to_infinity(mirrored, -x1, tol, x_cap);
}

/// Integral of f over [lo, inf) for f eventually monotone and of one sign.
/// Non-decay of the tail is reported as DivergenceError.
template <class F>
QuadResult integrate_tail(const F& f, double lo, const Tolerance& tol = {}) {
  tol.validate();
  if (!(lo > 0.0) || !std::isfinite(lo)) throw DomainError("integrate_tail needs finite lo > 0");
  // The sign is read off the far field.
  int sign = 0;
  for (int k = 4; k <= 12 && sign == 0; ++k) {
    const double y = f(std::ldexp(std::max(lo, 1.0), k));
    if (y > 0) sign = 1;
    if (y < 0) sign = -1;
  }
  if (sign == 0) sign = 1;
  auto g = [&](double x) {
    const double r = std::exp(x);
    const double y = sign * f(r);
    if (std::isnan(y) || std::isinf(y)) throw IntegrandError("non-finite tail integrand", r);
    if (y < 0) throw IntegrandError("tail integrand changes sign", r);
    return y == 0.0 ? logspace::neg_inf : std::log(y) + x;
  };
  LogQuadResult res = log_integrate_to_infinity(g, std::log(lo), tol);
  const double v = sign * res.value();
  return {v, std::fabs(v) * res.rel_error, res.subdivisions};
}

}  // namespace hardykit::quad
