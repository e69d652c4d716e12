#pragma once

// Direct tests of the Hardy inequality and its conjugate on trial functions,
// and a constructive lower bound for the best constant C.
//
// For a radial f the inner integral reduces to Phi(r) = int_0^r f Lambda
// (int_r^inf f Lambda for the conjugate) and
//   lhs = (int Phi^q u Lambda)^{1/q},   rhs = (int |f|^p v Lambda)^{1/p}.
// Characteristic functions are exact truncations of the integration limits.
//
// The cutoff trial f = v^{1-p'} on (0, t) gives rhs = V(t)^{1/p} and
//   lhs^q = Y(t) + V(t)^q U(t),   Y(t) = int_0^t V^q u Lambda,
// so the whole family is read off three cumulative profiles. The quotient
// is at least U(t)^{1/q} V(t)^{1/p'}, hence sup_t quotient >= D1.

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/functionals.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/radial.hpp"
#include "hardykit/space.hpp"
#include "hardykit/supremum.hpp"
#include "hardykit/wexpr.hpp"

namespace hardykit {

struct TrialFunction {
  enum class Kind { proof_cutoff, expr };

  Kind kind = Kind::proof_cutoff;
  double t = 1.0;
  std::optional<wexpr::WeightExpr> f;
  double support_lo = 0.0;
  double support_hi = std::numeric_limits<double>::infinity();
  std::string description;

  /// v^{1-p'} restricted to (0, t), or to (t, inf) for the conjugate.
  static TrialFunction proof_cutoff(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("cutoff t must be finite and > 0");
    TrialFunction tf;
    tf.t = t;
    std::ostringstream os;
    os << "v^(1-p') cut at t=" << t;
    tf.description = os.str();
    return tf;
  }

  /// |f| restricted to (lo, hi).
  static TrialFunction expression(wexpr::WeightExpr f, double lo = 0.0,
                                  double hi = std::numeric_limits<double>::infinity()) {
    if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("trial support must satisfy 0 <= lo < hi");
    TrialFunction tf;
    tf.kind = Kind::expr;
    tf.description = f.format();
    tf.f = std::move(f);
    tf.support_lo = lo;
    tf.support_hi = hi;
    if (lo > 0.0 || std::isfinite(hi)) {
      std::ostringstream os;
      os << tf.description << " on (" << lo << ", " << hi << ")";
      tf.description = os.str();
    }
    return tf;
  }
};

struct QuotientReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double quotient = 0.0;
  TrialFunction trial;
  /// lhs infinite with rhs finite: the trial violates the inequality for every C.
  bool violated = false;
  double rel_error = 0.0;
  std::string note;
};

namespace detail {

inline QuotientReport quotient_impl(const Space& space, const WeightPair& w, const Exponents& e,
                                    const TrialFunction& trial, const FunctionalOptions& opts, bool conjugate) {
  e.validate();
  const double pc = e.p_conj();
  double lo = trial.support_lo, hi = trial.support_hi;
  if (trial.kind == TrialFunction::Kind::proof_cutoff) {
    lo = conjugate ? trial.t : 0.0;
    hi = conjugate ? std::numeric_limits<double>::infinity() : trial.t;
  } else if (!trial.f) {
    throw DomainError("expression trial without an expression");
  }
  const wexpr::WeightExpr v = w.v;
  const std::optional<wexpr::WeightExpr> f = trial.f;
  LogFn log_f;
  if (trial.kind == TrialFunction::Kind::proof_cutoff) {
    log_f = [v, pc](double r) { return (1.0 - pc) * v.eval_log(r); };
  } else {
    log_f = [f](double r) { return f->eval_signed_log(r).log_abs; };
  }
  auto in_support = [lo, hi](double r) { return r > lo && r < hi; };
  const Space sp = space;

  QuotientReport rep;
  rep.trial = trial;

  LogFn norm_integrand = [=](double r) {
    if (!in_support(r)) return logspace::neg_inf;
    const double lf = log_f(r);
    if (lf == logspace::neg_inf) return lf;
    return e.p * lf + v.eval_log(r) + sp.log_density(r);
  };
  quad::LogQuadResult norm;
  try {
    norm = radial_span(norm_integrand, lo, hi, opts.tol);
  } catch (const DivergenceError& err) {
    throw DomainError(std::string("trial has infinite weighted norm: ") + err.what());
  }
  if (norm.log_value == logspace::neg_inf) throw DegenerateTrialError("trial function has zero weighted norm");
  rep.rhs = std::exp(norm.log_value / e.p);

  LogFn mass = [=](double r) {
    const double lf = log_f(r);
    return lf == logspace::neg_inf ? lf : lf + sp.log_density(r);
  };
  const Direction dir = conjugate ? Direction::to_infinity : Direction::from_origin;
  RadialCumulative phi(mass, dir, *opts.grid, opts.tol.tightened(10.0), lo, hi);
  auto violated = [&](const std::string& why) {
    rep.violated = true;
    rep.lhs = logspace::pos_inf;
    rep.quotient = logspace::pos_inf;
    rep.note = "inequality violated at trial: " + why;
    return rep;
  };
  if (phi.divergent()) return violated("the inner integral of f diverges: " + phi.divergence_reason());

  const wexpr::WeightExpr u = w.u;
  const double q = e.q;
  LogFn outer = [=, &phi](double r) {
    const double lp = phi.log_value(r);
    if (lp == logspace::neg_inf) return lp;
    return q * lp + u.eval_log(r) + sp.log_density(r);
  };
  quad::LogQuadResult left;
  try {
    left = conjugate ? radial_span(outer, 0.0, hi, opts.tol) : radial_span(outer, lo, logspace::pos_inf, opts.tol);
  } catch (const DivergenceError& err) {
    return violated(err.what());
  }
  rep.lhs = std::exp(left.log_value / q);
  rep.quotient = std::exp(left.log_value / q - norm.log_value / e.p);
  rep.rel_error = left.rel_error / q + norm.rel_error / e.p + phi.rel_error();
  return rep;
}

}  // namespace detail

/// (int (int_0^r f Lambda)^q u Lambda)^{1/q} / (int |f|^p v Lambda)^{1/p}.
inline QuotientReport hardy_quotient(const Space& space, const WeightPair& w, const Exponents& e,
                                     const TrialFunction& trial, const FunctionalOptions& opts = {}) {
  return detail::quotient_impl(space, w, e, trial, opts, false);
}

/// Same with the inner integral over (r, inf).
inline QuotientReport conjugate_quotient(const Space& space, const WeightPair& w, const Exponents& e,
                                         const TrialFunction& trial, const FunctionalOptions& opts = {}) {
  return detail::quotient_impl(space, w, e, trial, opts, true);
}

struct LowerBound {
  Outcome outcome = Outcome::finite;
  double c_lower = 0.0;
  double best_t = 0.0;
  double error_estimate = 0.0;
  /// (t, quotient(t)) at every decade of the sweep, and at every grid node.
  std::vector<std::pair<double, double>> samples;
  std::vector<std::pair<double, double>> curve;
  std::string note;

  bool finite() const { return outcome == Outcome::finite; }
};

namespace detail {

inline LowerBound lower_bound_impl(const Space& space, const WeightPair& w, const Exponents& e,
                                   const FunctionalOptions& opts, bool conjugate) {
  HardyFunctionals hf(space, w, e, opts, conjugate);
  LowerBound lb;
  auto divergent = [&](std::string why) {
    lb.outcome = Outcome::divergent;
    lb.c_lower = logspace::pos_inf;
    lb.note = std::move(why);
    return lb;
  };
  if (!hf.hypotheses().ok()) return divergent("hypothesis violated: " + hf.hypotheses().detail);
  const RadialCumulative& A = hf.U();
  const RadialCumulative& B = hf.V();
  if (B.divergent()) return divergent("the cutoff trials have infinite norm: " + B.divergence_reason());
  if (A.divergent()) return divergent("every cutoff trial violates the inequality: " + A.divergence_reason());

  const double q = e.q, p = e.p;
  const Space sp = space;
  const wexpr::WeightExpr u = w.u;
  LogFn y_integrand = [=, &B](double r) {
    const double lb_ = B.log_value(r);
    if (lb_ == logspace::neg_inf) return lb_;
    return u.eval_log(r) + sp.log_density(r) + q * lb_;
  };
  const RadialGrid& grid = *opts.grid;
  RadialCumulative Y(y_integrand, B.direction(), grid, opts.tol);
  if (Y.divergent()) return divergent("every cutoff trial violates the inequality: " + Y.divergence_reason());

  auto combine = [q, p](double y, double a, double b) {
    if (b == logspace::neg_inf) return logspace::neg_inf;
    return logspace::add(y, q * b + a) / q - b / p;
  };
  std::vector<double> nodes(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) nodes[i] = combine(Y.log_at(i), A.log_at(i), B.log_at(i));
  auto log_h = [&](double r) { return combine(Y.log_value(r), A.log_value(r), B.log_value(r)); };
  for (std::size_t i = 0; i < grid.size(); ++i) lb.curve.emplace_back(grid.r(i), std::exp(nodes[i]));
  for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(grid.per_decade())) {
    lb.samples.push_back(lb.curve[i]);
  }
  const SupremumResult sup = supremum_from_nodes(nodes, log_h, grid);
  if (!sup.finite()) return divergent("quotient(t) grows without bound: " + sup.note);
  lb.c_lower = std::exp(sup.log_value);
  lb.best_t = sup.argmax_r;
  lb.error_estimate = lb.c_lower * (Y.rel_error() / q + A.rel_error() / q + (1.0 + 1.0 / p) * B.rel_error() + 1e-12);
  lb.note = sup.note;
  return lb;
}

}  // namespace detail

/// sup over t of the cutoff-trial quotient, a lower bound for C.
inline LowerBound lower_bound_C(const Space& space, const WeightPair& w, const Exponents& e,
                                const FunctionalOptions& opts = {}) {
  return detail::lower_bound_impl(space, w, e, opts, false);
}

inline LowerBound conjugate_lower_bound_C(const Space& space, const WeightPair& w, const Exponents& e,
                                          const FunctionalOptions& opts = {}) {
  return detail::lower_bound_impl(space, w, e, opts, true);
}

struct BracketCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BracketReport {
  bool conjugate = false;
  FunctionalValue d1;
  std::optional<Interval> bracket;
  LowerBound lower;
  std::vector<QuotientReport> trials;
  double epsilon = 0.0;
  std::vector<BracketCheck> checks;
  std::string note;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

namespace detail {

inline BracketReport bracket_impl(const Space& space, const WeightPair& w, const Exponents& e,
                                  const FunctionalOptions& opts, const std::vector<TrialFunction>& trials,
                                  bool conjugate) {
  BracketReport rep;
  rep.conjugate = conjugate;
  HardyFunctionals hf(space, w, e, opts, conjugate);
  rep.d1 = hf.d(1);
  rep.lower = lower_bound_impl(space, w, e, opts, conjugate);
  for (const auto& t : trials) rep.trials.push_back(quotient_impl(space, w, e, t, opts, conjugate));

  std::ostringstream os;
  os.precision(12);
  if (!rep.d1.finite()) {
    // No finite constant exists; the sweep should show why.
    rep.checks.push_back({"D1 finite", false, rep.d1.note});
    const bool grows = !rep.lower.finite();
    os << (grows ? "" : "not ") << "observed: " << rep.lower.note;
    rep.checks.push_back({"unbounded quotient family", grows, os.str()});
    rep.note = "inadmissible: D1 is infinite (" + rep.d1.note + ")";
    return rep;
  }
  rep.bracket = constant_bracket(rep.d1, e);
  double trial_err = 0.0;
  for (const auto& t : rep.trials) {
    if (!t.violated) trial_err = std::max(trial_err, t.quotient * t.rel_error);
  }
  const double lower_err = rep.lower.finite() ? rep.lower.error_estimate : 0.0;
  rep.epsilon = 10.0 * (rep.d1.error_estimate + lower_err + trial_err);

  if (!rep.lower.finite()) {
    rep.checks.push_back({"D1 - eps <= c_lower", false, "cutoff sweep diverged: " + rep.lower.note});
  } else {
    os << "D1=" << rep.d1.value << " c_lower=" << rep.lower.c_lower << " eps=" << rep.epsilon;
    rep.checks.push_back({"D1 - eps <= c_lower", rep.d1.value - rep.epsilon <= rep.lower.c_lower, os.str()});
    os.str("");
    os << "max cutoff quotient=" << rep.lower.c_lower << " upper=" << rep.bracket->hi;
    rep.checks.push_back({"cutoff quotients <= upper + eps", rep.lower.c_lower <= rep.bracket->hi + rep.epsilon,
                          os.str()});
  }
  for (const auto& t : rep.trials) {
    os.str("");
    if (t.violated) {
      os << t.note;
      rep.checks.push_back({"quotient <= upper + eps [" + t.trial.description + "]", false, os.str()});
    } else {
      os << "quotient=" << t.quotient << " upper=" << rep.bracket->hi;
      rep.checks.push_back({"quotient <= upper + eps [" + t.trial.description + "]",
                            t.quotient <= rep.bracket->hi + rep.epsilon, os.str()});
    }
  }
  return rep;
}

}  // namespace detail

/// D1, the constant bracket, the cutoff lower bound and any extra trials,
/// checked against each other.
inline BracketReport bracket_check(const Space& space, const WeightPair& w, const Exponents& e,
                                   const FunctionalOptions& opts = {}, const std::vector<TrialFunction>& trials = {}) {
  return detail::bracket_impl(space, w, e, opts, trials, false);
}

inline BracketReport conjugate_bracket_check(const Space& space, const WeightPair& w, const Exponents& e,
                                             const FunctionalOptions& opts = {},
                                             const std::vector<TrialFunction>& trials = {}) {
  return detail::bracket_impl(space, w, e, opts, trials, true);
}

}  // namespace hardykit
