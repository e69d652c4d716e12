#pragma once

// Cumulative radial integrals on a shared logarithmic grid.
//
// Every weight integral reduces to int exp(l(rho)) d rho over (0, r) or
// (r, inf), with l a log-integrand (log weight + log density). A
// RadialCumulative stores these on grid nodes as prefix (or suffix) sums of
// per-segment integrals plus the end piece; values between nodes are the
// nearest node value plus one partial integral.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/parallel.hpp"
#include "hardykit/quad.hpp"

namespace hardykit {

enum class Direction { from_origin, to_infinity };

inline Direction opposite(Direction d) {
  return d == Direction::from_origin ? Direction::to_infinity : Direction::from_origin;
}

/// Log-integrand as a function of the radius.
using LogFn = std::function<double(double)>;

class RadialGrid {
 public:
  /// Nodes lo * 10^(k / per_decade), k = 0..K, with the last node at hi.
  static RadialGrid log_spaced(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 2) throw DomainError("bad radial grid");
    RadialGrid g;
    const double decades = std::log10(hi / lo);
    const int steps = std::max(2, static_cast<int>(std::ceil(decades * per_decade - 1e-9)));
    const double x0 = std::log(lo), x1 = std::log(hi);
    g.x_.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) g.x_[k] = x0 + (x1 - x0) * k / steps;
    g.x_.back() = x1;
    g.r_.resize(g.x_.size());
    for (std::size_t k = 0; k < g.x_.size(); ++k) g.r_[k] = std::exp(g.x_[k]);
    g.per_decade_ = per_decade;
    return g;
  }

  /// The default search grid: 1e-6 to 1e6, 60 points per decade.
  static const RadialGrid& standard() {
    static const RadialGrid g = log_spaced(1e-6, 1e6, 60);
    return g;
  }

  std::size_t size() const { return r_.size(); }
  double r(std::size_t i) const { return r_[i]; }
  double x(std::size_t i) const { return x_[i]; }
  double lo() const { return r_.front(); }
  double hi() const { return r_.back(); }
  int per_decade() const { return per_decade_; }

  /// Index i with r(i) <= r < r(i+1), clamped to [0, size() - 2].
  std::size_t locate(double r) const {
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    std::size_t i = it == r_.begin() ? 0 : static_cast<std::size_t>(it - r_.begin()) - 1;
    return std::min(i, r_.size() - 2);
  }

 private:
  std::vector<double> r_, x_;
  int per_decade_ = 0;
};

/// int_a^b exp(l(rho)) d rho for 0 < a < b < inf, integrated in log rho.
/// The tolerance is relative to max(result, exp(log_reference)).
inline quad::LogQuadResult radial_segment(const LogFn& l, double a, double b, const quad::Tolerance& tol,
                                          double log_reference = logspace::neg_inf) {
  auto g = [&](double x) { return l(std::exp(x)) + x; };
  return quad::log_integrate(g, std::log(a), std::log(b), tol, log_reference);
}

/// int_0^b exp(l(rho)) d rho. Throws DivergenceError if it diverges at 0.
inline quad::LogQuadResult radial_origin(const LogFn& l, double b, const quad::Tolerance& tol) {
  auto g = [&](double x) { return l(std::exp(x)) + x; };
  return quad::log_integrate_from_minus_infinity(g, std::log(b), tol);
}

/// int_a^inf exp(l(rho)) d rho. Throws DivergenceError if it diverges.
inline quad::LogQuadResult radial_tail(const LogFn& l, double a, const quad::Tolerance& tol) {
  auto g = [&](double x) { return l(std::exp(x)) + x; };
  return quad::log_integrate_to_infinity(g, std::log(a), tol);
}

/// int over (a, b) of exp(l), where l vanishes outside [lo, hi]. a may be
/// 0 and b may be infinite.
inline quad::LogQuadResult radial_span(const LogFn& l, double a, double b, const quad::Tolerance& tol,
                                       double lo = 0.0, double hi = std::numeric_limits<double>::infinity(),
                                       double log_reference = logspace::neg_inf) {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (!(a < b)) return {logspace::neg_inf, 0.0, 0};
  if (a == 0.0 && std::isinf(b)) {
    auto left = radial_origin(l, 1.0, tol);
    auto right = radial_tail(l, 1.0, tol);
    const double total = logspace::add(left.log_value, right.log_value);
    const double err = logspace::add(left.log_value + std::log(left.rel_error + 1e-300),
                                     right.log_value + std::log(right.rel_error + 1e-300));
    return {total, std::exp(err - total), left.subdivisions + right.subdivisions};
  }
  if (a == 0.0) return radial_origin(l, b, tol);
  if (std::isinf(b)) return radial_tail(l, a, tol);
  return radial_segment(l, a, b, tol, log_reference);
}

/// Whether int_0^inf exp(l) is finite.
inline bool radially_integrable(const LogFn& l, const quad::Tolerance& tol) {
  try {
    radial_span(l, 0.0, std::numeric_limits<double>::infinity(), tol);
    return true;
  } catch (const DivergenceError&) {
    return false;
  }
}

/// r -> int_0^r exp(l) (from_origin) or r -> int_r^inf exp(l) (to_infinity),
/// with l restricted to the support [lo, hi].
class RadialCumulative {
 public:
  RadialCumulative(LogFn l, Direction dir, const RadialGrid& grid, const quad::Tolerance& tol,
                   double support_lo = 0.0, double support_hi = std::numeric_limits<double>::infinity())
      : l_(std::move(l)), dir_(dir), grid_(&grid), tol_(tol), lo_(support_lo), hi_(support_hi) {
    const std::size_t n = grid.size();
    std::vector<quad::LogQuadResult> seg(n - 1);
    parallel_for(n - 1, [&](std::size_t i) { seg[i] = span(grid.r(i), grid.r(i + 1)); });
    quad::LogQuadResult end;
    try {
      end = dir == Direction::from_origin ? span(0.0, grid.r(0))
                                          : span(grid.r(n - 1), std::numeric_limits<double>::infinity());
    } catch (const DivergenceError& e) {
      divergent_ = true;
      reason_ = e.what();
      log_.assign(n, logspace::pos_inf);
      return;
    }
    log_.resize(n);
    std::vector<double> err(n);
    auto log_err = [](const quad::LogQuadResult& q) {
      return q.log_value + std::log(std::max(q.rel_error, 1e-300));
    };
    if (dir == Direction::from_origin) {
      log_[0] = end.log_value;
      err[0] = log_err(end);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        log_[i + 1] = logspace::add(log_[i], seg[i].log_value);
        err[i + 1] = logspace::add(err[i], log_err(seg[i]));
      }
    } else {
      log_[n - 1] = end.log_value;
      err[n - 1] = log_err(end);
      for (std::size_t i = n - 1; i-- > 0;) {
        log_[i] = logspace::add(log_[i + 1], seg[i].log_value);
        err[i] = logspace::add(err[i + 1], log_err(seg[i]));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (log_[i] != logspace::neg_inf) rel_ = std::max(rel_, std::exp(err[i] - log_[i]));
    }
  }

  bool divergent() const { return divergent_; }
  const std::string& divergence_reason() const { return reason_; }
  Direction direction() const { return dir_; }
  const RadialGrid& grid() const { return *grid_; }
  /// Largest relative error estimate over the nodes.
  double rel_error() const { return rel_; }

  double log_at(std::size_t i) const { return log_[i]; }

  double log_value(double r) const {
    if (divergent_) return logspace::pos_inf;
    const RadialGrid& g = *grid_;
    const std::size_t n = g.size();
    const double inf = std::numeric_limits<double>::infinity();
    if (dir_ == Direction::from_origin) {
      if (r <= g.r(0)) return span(0.0, r).log_value;
      if (r >= g.r(n - 1)) return logspace::add(log_[n - 1], span(g.r(n - 1), r).log_value);
      const std::size_t i = g.locate(r);
      if (r == g.r(i)) return log_[i];
      return logspace::add(log_[i], span(g.r(i), r, log_[i]).log_value);
    }
    if (r >= g.r(n - 1)) return span(r, inf).log_value;
    if (r <= g.r(0)) return logspace::add(log_[0], span(r, g.r(0)).log_value);
    const std::size_t j = g.locate(r) + 1;
    if (r == g.r(j)) return log_[j];
    return logspace::add(log_[j], span(r, g.r(j), log_[j]).log_value);
  }

  double value(double r) const { return std::exp(log_value(r)); }

 private:
  quad::LogQuadResult span(double a, double b, double log_reference = logspace::neg_inf) const {
    return radial_span(l_, a, b, tol_, lo_, hi_, log_reference);
  }

  LogFn l_;
  Direction dir_;
  const RadialGrid* grid_;
  quad::Tolerance tol_;
  double lo_, hi_;
  std::vector<double> log_;
  double rel_ = 0.0;
  bool divergent_ = false;
  std::string reason_;
};

}  // namespace hardykit
