#pragma once

// Closed-form admissibility of power-type weights on homogeneous groups,
// hyperbolic spaces and constant-curvature Cartan-Hadamard manifolds.
//
//  * homogeneous group, u = r^alpha, v = r^beta: admissible iff
//      alpha + Q < 0,  beta(1-p') + Q > 0,
//      (alpha + Q)/q + (beta(1-p') + Q)/p' = 0,
//    and then L <= C <= (p')^{1/p'} p^{1/q} L with
//      L = sigma^{1/q+1/p'} / (|alpha+Q|^{1/q} (beta(1-p')+Q)^{1/p'}).
//  * hyperbolic space, u = sinh(r)^alpha, v = sinh(r)^beta, with
//    S = (alpha+n)/q + (beta(1-p')+n)/p':
//      alpha + n >= 0 (case A): alpha + n < 1, beta(1-p') + n > 0,
//                               S <= 1/q + 1/p';
//      alpha + n <  0 (case B): beta(1-p') + n > 0, 0 <= S <= 1/q + 1/p'.
//  * Cartan-Hadamard with curvature -b: b = 0 is the homogeneous case with
//    Q = n, b > 0 the hyperbolic one with weights sinh(sqrt(b) r)^alpha.
//
// The balance equation is tested with absolute tolerance 1e-12. Non-strict
// inequalities accept the same 1e-12 of rounding; strict ones are exact.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/functionals.hpp"
#include "hardykit/space.hpp"
#include "hardykit/wexpr.hpp"

namespace hardykit {

inline constexpr double balance_tolerance = 1e-12;

struct Verdict {
  bool admissible = false;
  std::vector<std::string> failed_conditions;
  std::optional<Interval> constant_interval;
  std::optional<std::string> regime;
  std::vector<std::string> warnings;
};

inline bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }

inline bool same_verdict(const Verdict& a, const Verdict& b) {
  return a.admissible == b.admissible && a.failed_conditions == b.failed_conditions &&
         a.constant_interval == b.constant_interval && a.regime == b.regime && a.warnings == b.warnings;
}

namespace detail {

inline void require_exponents(double p, double q) { Exponents::make(p, q); }

inline void finish(Verdict& v) { v.admissible = v.failed_conditions.empty(); }

}  // namespace detail

inline Verdict check_homogeneous(double Q, double sigma, double p, double q, double alpha, double beta) {
  detail::require_exponents(p, q);
  if (!(Q > 0.0) || !std::isfinite(Q)) throw DomainError("homogeneous dimension Q must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw DomainError("alpha and beta must be finite");
  const double pc = p / (p - 1.0);
  const double a = alpha + Q;
  const double g = beta * (1.0 - pc) + Q;
  const double balance = a / q + g / pc;
  Verdict v;
  if (!(a < 0.0)) v.failed_conditions.push_back("alpha+Q<0");
  if (!(g > 0.0)) v.failed_conditions.push_back("beta(1-p')+Q>0");
  if (!(std::fabs(balance) <= balance_tolerance)) {
    v.failed_conditions.push_back("(alpha+Q)/q+(beta(1-p')+Q)/p'=0");
    if (std::fabs(balance) < 1e-6) {
      std::ostringstream os;
      os << "boundary case: balance " << balance << " is within 1e-6 of 0 but outside the tolerance "
         << balance_tolerance;
      v.warnings.push_back(os.str());
    }
  }
  detail::finish(v);
  if (v.admissible) {
    const double L = std::pow(sigma, 1.0 / q + 1.0 / pc) / (std::pow(std::fabs(a), 1.0 / q) * std::pow(g, 1.0 / pc));
    v.constant_interval = Interval{L, std::pow(pc, 1.0 / pc) * std::pow(p, 1.0 / q) * L};
  }
  return v;
}

inline Verdict check_hyperbolic(int n, double p, double q, double alpha, double beta) {
  detail::require_exponents(p, q);
  if (n < 2) throw DomainError("hyperbolic dimension must be >= 2");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw DomainError("alpha and beta must be finite");
  const double pc = p / (p - 1.0);
  const double a = alpha + n;
  const double g = beta * (1.0 - pc) + n;
  const double S = a / q + g / pc;
  const double top = 1.0 / q + 1.0 / pc;
  Verdict v;
  if (std::fabs(a) < 1e-9) {
    v.warnings.push_back("alpha+n is within 1e-9 of the regime boundary 0; case A applied");
  }
  if (a >= 0.0) {
    v.regime = "A";
    if (!(a < 1.0)) v.failed_conditions.push_back("alpha+n<1");
    if (!(g > 0.0)) v.failed_conditions.push_back("beta(1-p')+n>0");
    if (!(S <= top + balance_tolerance)) v.failed_conditions.push_back("S<=1/q+1/p'");
  } else {
    v.regime = "B";
    if (!(g > 0.0)) v.failed_conditions.push_back("beta(1-p')+n>0");
    if (!(S >= -balance_tolerance)) v.failed_conditions.push_back("0<=S");
    if (!(S <= top + balance_tolerance)) v.failed_conditions.push_back("S<=1/q+1/p'");
  }
  detail::finish(v);
  return v;
}

inline Verdict check_cartan_hadamard(int n, double b, double p, double q, double alpha, double beta) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("curvature magnitude b must be >= 0");
  if (n < 2) throw DomainError("dimension must be >= 2");
  if (b == 0.0) {
    Verdict v = check_homogeneous(n, euclidean_sphere_area(n), p, q, alpha, beta);
    v.regime = "b=0";
    return v;
  }
  return check_hyperbolic(n, p, q, alpha, beta);
}

/// r^alpha and r^beta.
inline WeightPair power_weights(double alpha, double beta) {
  using wexpr::Op;
  using wexpr::WeightExpr;
  const auto r = WeightExpr::variable();
  return {WeightExpr::binary(Op::pow, r, WeightExpr::number(alpha)),
          WeightExpr::binary(Op::pow, r, WeightExpr::number(beta))};
}

/// sinh(sqrt(b) r)^alpha and sinh(sqrt(b) r)^beta.
inline WeightPair sinh_power_weights(double alpha, double beta, double b = 1.0) {
  using wexpr::Op;
  using wexpr::WeightExpr;
  WeightExpr arg = WeightExpr::variable();
  if (b != 1.0) arg = WeightExpr::binary(Op::mul, WeightExpr::number(std::sqrt(b)), arg);
  const auto s = WeightExpr::unary(Op::sinh, arg);
  return {WeightExpr::binary(Op::pow, s, WeightExpr::number(alpha)),
          WeightExpr::binary(Op::pow, s, WeightExpr::number(beta))};
}

/// Whether D1 is finite, for comparing a closed-form verdict with numerics.
inline bool numerically_admissible(const Space& space, const WeightPair& w, const Exponents& e,
                                   const FunctionalOptions& opts = {}) {
  return d_condition(1, space, w, e, opts).finite();
}

}  // namespace hardykit
