#pragma once

// Supremum of a positive function of r over (0, inf), located on a
// logarithmic grid and refined by golden-section search in log r.
//
// Unbounded growth toward either end is read off the grid: the log-values
// must be nondecreasing over the outermost two decades, with a last-decade
// slope (per unit log r) above 1e-5 that has not dropped below half of the
// slope of the decade before. A bounded function approaching its supremum
// at an end fails the slope test and is reported with its boundary value.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/parallel.hpp"
#include "hardykit/radial.hpp"

namespace hardykit {

enum class Outcome { finite, divergent };

struct SupremumResult {
  Outcome outcome = Outcome::finite;
  double log_value = logspace::neg_inf;
  /// Location of the maximum; 0 or +inf for divergence toward that end.
  double argmax_r = 0.0;
  std::string note;

  bool finite() const { return outcome == Outcome::finite; }
  double value() const { return outcome == Outcome::finite ? std::exp(log_value) : logspace::pos_inf; }
};

namespace detail {

// ys runs from the interior toward the end being tested.
inline bool grows_toward_end(const std::vector<double>& ys, int per_decade) {
  const std::size_t span = 2 * static_cast<std::size_t>(per_decade);
  if (ys.size() <= span) return false;
  const std::size_t m = ys.size() - 1;
  if (ys[m] == logspace::pos_inf) return true;
  for (std::size_t k = m - span; k < m; ++k) {
    if (!std::isfinite(ys[k]) || !std::isfinite(ys[k + 1])) return false;
    if (ys[k + 1] < ys[k] - 1e-9 * std::max(1.0, std::fabs(ys[k]))) return false;
  }
  const double decade = std::log(10.0);
  const std::size_t d = static_cast<std::size_t>(per_decade);
  const double last = (ys[m] - ys[m - d]) / decade;
  const double prev = (ys[m - d] - ys[m - 2 * d]) / decade;
  return last > 1e-5 && last >= 0.5 * prev;
}

}  // namespace detail

/// Supremum given log h at the grid nodes and log h as a function for
/// refinement between nodes. Values of -inf mean h = 0 there.
inline SupremumResult supremum_from_nodes(const std::vector<double>& node_log, const std::function<double(double)>& log_h,
                                          const RadialGrid& grid, double x_width = 1e-8) {
  const std::size_t n = grid.size();
  if (node_log.size() != n) throw DomainError("node values do not match the grid");
  SupremumResult res;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(node_log[i])) throw Error("evaluation error: NaN in supremum search at r = " + std::to_string(grid.r(i)));
    if (node_log[i] == logspace::pos_inf) {
      res.outcome = Outcome::divergent;
      res.argmax_r = grid.r(i);
      res.note = "infinite at r = " + std::to_string(grid.r(i));
      return res;
    }
  }
  std::vector<double> toward_inf(node_log.begin(), node_log.end());
  if (detail::grows_toward_end(toward_inf, grid.per_decade())) {
    res.outcome = Outcome::divergent;
    res.argmax_r = logspace::pos_inf;
    res.note = "unbounded as r -> inf";
    return res;
  }
  std::vector<double> toward_zero(node_log.rbegin(), node_log.rend());
  if (detail::grows_toward_end(toward_zero, grid.per_decade())) {
    res.outcome = Outcome::divergent;
    res.argmax_r = 0.0;
    res.note = "unbounded as r -> 0";
    return res;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (node_log[i] > node_log[best]) best = i;
  }
  res.log_value = node_log[best];
  res.argmax_r = grid.r(best);
  if (node_log[best] == logspace::neg_inf) {
    res.note = "identically zero on the grid";
    return res;
  }
  if (best == 0 || best == n - 1) {
    res.note = best == 0 ? "supremum approached as r -> 0" : "supremum approached as r -> inf";
    return res;
  }
  // Golden-section search in x = log r between the neighbouring nodes.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = grid.x(best - 1), b = grid.x(best + 1);
  auto f = [&](double x) {
    const double y = log_h(std::exp(x));
    return std::isnan(y) ? logspace::neg_inf : y;
  };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  const double xm = fc >= fd ? c : d;
  const double fm = std::max(fc, fd);
  if (fm > res.log_value) {
    res.log_value = fm;
    res.argmax_r = std::exp(xm);
  }
  return res;
}

/// Supremum of log h over (0, inf) on the given grid.
inline SupremumResult supremum_search_log(const std::function<double(double)>& log_h,
                                          const RadialGrid& grid = RadialGrid::standard()) {
  std::vector<double> nodes(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { nodes[i] = log_h(grid.r(i)); });
  return supremum_from_nodes(nodes, log_h, grid);
}

/// Supremum of a positive function h over (0, inf). Non-finite samples are
/// skipped; all samples non-finite is an evaluation error.
inline SupremumResult supremum_search(const std::function<double(double)>& h,
                                      const RadialGrid& grid = RadialGrid::standard()) {
  std::size_t bad = 0;
  std::vector<double> nodes(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = h(grid.r(i));
    if (std::isnan(y) || std::isinf(y)) {
      ++bad;
      nodes[i] = y == logspace::pos_inf ? y : logspace::neg_inf;
    } else {
      nodes[i] = y > 0.0 ? std::log(y) : logspace::neg_inf;
    }
  }
  if (bad == grid.size()) throw Error("evaluation error: every sample of the function is non-finite");
  auto log_h = [&](double r) {
    const double y = h(r);
    return y > 0.0 && std::isfinite(y) ? std::log(y) : logspace::neg_inf;
  };
  return supremum_from_nodes(nodes, log_h, grid);
}

}  // namespace hardykit
