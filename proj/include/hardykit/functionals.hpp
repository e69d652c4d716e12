#pragma once

// Weight functionals of the two-weight Hardy inequality
//
//   ( int_X |int_{B(a,|x|)} f|^q u dx )^{1/q} <= C ( int_X |f|^p v dx )^{1/p}
//
// and of its conjugate, in terms of
//   U(r) = int_{|y|>r} u,   V(r) = int_{|y|<r} v^{1-p'}
// (with the domains swapped for the conjugate inequality).
//
// All five conditions, for both inequalities and for the general
// (f, g, alpha, beta) family, are instances of one template built from two
// cumulative profiles P (weight a, direction dP) and R (weight b, direction
// dR):
//   K1 = P^alpha R^beta
//   K2 = (int_{dP} a R^{(beta-s)/alpha})^alpha R^s
//   K3 = (int_{dR} b P^{(alpha-s)/beta})^beta P^s
//   K4 = (int_{opposite dP} a R^{(beta+s)/alpha})^alpha R^{-s}
//   K5 = (int_{opposite dR} b P^{(alpha+s)/beta})^beta P^{-s}
// where int_{dP} at r means the integral over the same side of r as P(r).
// Each condition is the supremum of its K over r > 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/quad.hpp"
#include "hardykit/radial.hpp"
#include "hardykit/space.hpp"
#include "hardykit/supremum.hpp"
#include "hardykit/wexpr.hpp"

namespace hardykit {

struct Exponents {
  double p = 2.0;
  double q = 2.0;
  double s = 1.0;

  static Exponents make(double p, double q, double s = 1.0) {
    Exponents e{p, q, s};
    e.validate();
    return e;
  }
  double p_conj() const { return p / (p - 1.0); }
  void validate() const {
    if (!(p > 1.0) || !(q >= p) || !std::isfinite(q)) throw DomainError("exponents need 1 < p <= q < inf");
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("s must be > 0");
  }
};

struct WeightPair {
  wexpr::WeightExpr u;
  wexpr::WeightExpr v;

  /// v^{1-p'} as an expression.
  wexpr::WeightExpr dual_v(const Exponents& e) const {
    return wexpr::WeightExpr::binary(wexpr::Op::pow, v, wexpr::WeightExpr::number(1.0 - e.p_conj()));
  }
};

struct GeneralPair {
  wexpr::WeightExpr f;
  wexpr::WeightExpr g;
  double alpha = 1.0;
  double beta = 1.0;
  double s = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(s > 0.0)) throw DomainError("alpha, beta and s must be > 0");
  }
};

struct FunctionalValue {
  Outcome outcome = Outcome::finite;
  double value = 0.0;
  double error_estimate = 0.0;
  double argmax_r = 0.0;
  std::string note;
  bool proviso_violated = false;

  bool finite() const { return outcome == Outcome::finite; }
  static FunctionalValue divergent(std::string why, double at = 0.0) {
    FunctionalValue v;
    v.outcome = Outcome::divergent;
    v.value = logspace::pos_inf;
    v.argmax_r = at;
    v.note = std::move(why);
    return v;
  }
};

struct FunctionalOptions {
  quad::Tolerance tol{};
  const RadialGrid* grid = &RadialGrid::standard();
  /// When false, conditions whose L1 proviso fails are computed anyway and
  /// flagged instead of raising ProvisoError.
  bool enforce_proviso = true;
};

/// rho -> power * log w(rho) + log Lambda(rho).
inline LogFn log_weighted_density(const Space& space, const wexpr::WeightExpr& w, double power = 1.0) {
  return [space, w, power](double rho) {
    const double lw = w.eval_log(rho);
    const double term = power == 1.0 ? lw : (lw == logspace::neg_inf && power == 0.0 ? 0.0 : power * lw);
    if (std::isnan(term) || term == logspace::pos_inf) {
      std::ostringstream os;
      os.precision(17);
      os << "weight '" << w.format() << "' raised to " << power << " is not finite at r=" << rho;
      throw IntegrandError(os.str(), rho);
    }
    return term + space.log_density(rho);
  };
}

/// The five quantities over a pair of cumulative profiles.
class QuantityFamily {
 public:
  struct Side {
    LogFn log_density;  // log of weight * Lambda
    Direction dir;
    std::string name;   // for messages, e.g. "U"
  };

  QuantityFamily(Side a, Side b, double alpha, double beta, const FunctionalOptions& opts)
      : a_(std::move(a)), b_(std::move(b)), alpha_(alpha), beta_(beta), opts_(opts) {
    const quad::Tolerance inner = opts.tol.tightened(10.0);
    P_ = std::make_unique<RadialCumulative>(a_.log_density, a_.dir, *opts.grid, inner);
    R_ = std::make_unique<RadialCumulative>(b_.log_density, b_.dir, *opts.grid, inner);
  }

  const RadialCumulative& P() const { return *P_; }
  const RadialCumulative& R() const { return *R_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  bool a_integrable() const { return integrability().first; }
  bool b_integrable() const { return integrability().second; }

  /// sup over r of K_k(r; s), k = 1..5.
  FunctionalValue quantity(int k, double s) const {
    if (k < 1 || k > 5) throw DomainError("condition index must be 1..5");
    if (!(s > 0.0)) throw DomainError("s must be > 0");
    if (P_->divergent()) return FunctionalValue::divergent(a_.name + " is infinite: " + P_->divergence_reason());
    if (R_->divergent()) return FunctionalValue::divergent(b_.name + " is infinite: " + R_->divergence_reason());

    FunctionalValue out;
    const bool a_integrable_ = k >= 4 ? a_integrable() : true;
    const bool b_integrable_ = k >= 4 ? b_integrable() : true;
    if (k >= 4 && !(a_integrable_ && b_integrable_)) {
      const std::string msg = "L1 proviso fails: " + std::string(a_integrable_ ? "" : "the " + a_.name + " weight") +
                              std::string(!a_integrable_ && !b_integrable_ ? " and " : "") +
                              std::string(b_integrable_ ? "" : "the " + b_.name + " weight") +
                              (!a_integrable_ && !b_integrable_ ? " are" : " is") +
                              " not integrable over the whole space";
      if (opts_.enforce_proviso) throw ProvisoError(msg);
      out.proviso_violated = true;
      out.note = msg + "; computed anyway";
    }

    const RadialGrid& grid = *opts_.grid;
    const RadialCumulative& P = *P_;
    const RadialCumulative& R = *R_;
    std::vector<double> nodes(grid.size());
    std::function<double(double)> log_h;
    double rel = 0.0;

    if (k == 1) {
      for (std::size_t i = 0; i < grid.size(); ++i) nodes[i] = alpha_ * P.log_at(i) + beta_ * R.log_at(i);
      log_h = [&](double r) { return alpha_ * P.log_value(r) + beta_ * R.log_value(r); };
      rel = alpha_ * P.rel_error() + beta_ * R.rel_error();
    } else {
      // Outer integral over the weight of one side, powered by the other
      // side's profile, and the exponents that combine them.
      const bool on_a = k == 2 || k == 4;
      const Side& w = on_a ? a_ : b_;
      const RadialCumulative& other = on_a ? R : P;
      const std::string& other_name = on_a ? b_.name : a_.name;
      const double outer = on_a ? alpha_ : beta_;
      const double inner_power = on_a ? (k == 2 ? (beta_ - s) / alpha_ : (beta_ + s) / alpha_)
                                      : (k == 3 ? (alpha_ - s) / beta_ : (alpha_ + s) / beta_);
      const double trailing = k <= 3 ? s : -s;
      const Direction dir = k <= 3 ? w.dir : opposite(w.dir);

      LogFn integrand = [&w, &other, &other_name, inner_power](double rho) {
        const double base = w.log_density(rho);
        if (inner_power == 0.0 || base == logspace::neg_inf) return base;
        const double lo = other.log_value(rho);
        if (inner_power < 0.0 && lo == logspace::neg_inf) {
          std::ostringstream os;
          os << other_name << " vanishes at r=" << rho << " under a negative power";
          throw MakesSenseError(os.str(), rho);
        }
        return base + inner_power * lo;
      };
      RadialCumulative W(integrand, dir, grid, opts_.tol);
      if (W.divergent()) {
        return FunctionalValue::divergent("the integral in condition " + std::to_string(k) +
                                          " diverges: " + W.divergence_reason());
      }
      auto tail_term = [&other, &other_name, trailing](double lo, double r) {
        if (trailing < 0.0 && lo == logspace::neg_inf) {
          std::ostringstream os;
          os << other_name << " vanishes at r=" << r << " under a negative power";
          throw MakesSenseError(os.str(), r);
        }
        return trailing * lo;
      };
      for (std::size_t i = 0; i < grid.size(); ++i) {
        nodes[i] = outer * W.log_at(i) + tail_term(other.log_at(i), grid.r(i));
      }
      log_h = [&, outer](double r) { return outer * W.log_value(r) + tail_term(other.log_value(r), r); };
      rel = outer * (W.rel_error() + std::fabs(inner_power) * other.rel_error()) +
            std::fabs(trailing) * other.rel_error();
      SupremumResult sup = supremum_from_nodes(nodes, log_h, grid);
      return finish(std::move(out), sup, rel);
    }
    SupremumResult sup = supremum_from_nodes(nodes, log_h, grid);
    return finish(std::move(out), sup, rel);
  }

 private:
  static FunctionalValue finish(FunctionalValue out, const SupremumResult& sup, double rel) {
    if (!sup.finite()) {
      FunctionalValue d = FunctionalValue::divergent(sup.note, sup.argmax_r);
      d.proviso_violated = out.proviso_violated;
      if (!out.note.empty()) d.note = out.note + "; " + d.note;
      return d;
    }
    out.value = std::exp(sup.log_value);
    out.error_estimate = out.value * (rel + 1e-12);
    out.argmax_r = sup.argmax_r;
    if (!sup.note.empty()) out.note = out.note.empty() ? sup.note : out.note + "; " + sup.note;
    return out;
  }

  Side a_, b_;
  double alpha_, beta_;
  FunctionalOptions opts_;
  std::unique_ptr<RadialCumulative> P_, R_;
  // Whole-space integrability of the two weights, computed on first use.
  mutable std::once_flag integrability_once_;
  mutable std::pair<bool, bool> integrability_{false, false};

  const std::pair<bool, bool>& integrability() const {
    std::call_once(integrability_once_, [this] {
      const quad::Tolerance inner = opts_.tol.tightened(10.0);
      integrability_ = {radially_integrable(a_.log_density, inner), radially_integrable(b_.log_density, inner)};
    });
    return integrability_;
  }
};

/// Operational check of the hypotheses on (u, v): the outer profile must
/// have a finite tail past r = 1 and the inner one must be integrable on
/// (0, 1] (mirrored for the conjugate inequality).
struct HypothesisReport {
  bool u_ok = true;
  bool dual_v_ok = true;
  std::string detail;
  bool ok() const { return u_ok && dual_v_ok; }
};

inline HypothesisReport check_hypotheses(const Space& space, const WeightPair& w, const Exponents& e,
                                         bool conjugate, const quad::Tolerance& tol = {}) {
  HypothesisReport rep;
  const LogFn lu = log_weighted_density(space, w.u);
  const LogFn lv = log_weighted_density(space, w.v, 1.0 - e.p_conj());
  auto probe = [&](const LogFn& l, bool tail, const char* what) {
    try {
      if (tail) {
        radial_tail(l, 1.0, tol);
      } else {
        radial_origin(l, 1.0, tol);
      }
      return true;
    } catch (const DivergenceError& err) {
      if (!rep.detail.empty()) rep.detail += "; ";
      rep.detail += std::string(what) + ": " + err.what();
      return false;
    }
  };
  if (!conjugate) {
    rep.u_ok = probe(lu, true, "u is not integrable away from the base point");
    rep.dual_v_ok = probe(lv, false, "v^{1-p'} is not locally integrable");
  } else {
    rep.u_ok = probe(lu, false, "u is not locally integrable");
    rep.dual_v_ok = probe(lv, true, "v^{1-p'} is not integrable away from the base point");
  }
  return rep;
}

namespace detail {
// D_k in terms of the family: D3 and D4 swap relative to K3/K4.
inline int family_index(int k) {
  static constexpr std::array<int, 6> map = {0, 1, 2, 4, 3, 5};
  if (k < 1 || k > 5) throw DomainError("condition index must be 1..5");
  return map[k];
}
}  // namespace detail

/// D_1..D_5 for the Hardy inequality (conjugate = false) or its conjugate.
class HardyFunctionals {
 public:
  HardyFunctionals(const Space& space, const WeightPair& w, const Exponents& e, const FunctionalOptions& opts = {},
                   bool conjugate = false)
      : exps_(e), conjugate_(conjugate) {
    e.validate();
    hyp_ = check_hypotheses(space, w, e, conjugate, opts.tol);
    const Direction du = conjugate ? Direction::from_origin : Direction::to_infinity;
    family_ = std::make_unique<QuantityFamily>(
        QuantityFamily::Side{log_weighted_density(space, w.u), du, conjugate ? "U*" : "U"},
        QuantityFamily::Side{log_weighted_density(space, w.v, 1.0 - e.p_conj()), opposite(du),
                             conjugate ? "V*" : "V"},
        1.0 / e.q, 1.0 / e.p_conj(), opts);
  }

  const HypothesisReport& hypotheses() const { return hyp_; }
  const QuantityFamily& family() const { return *family_; }
  const RadialCumulative& U() const { return family_->P(); }
  const RadialCumulative& V() const { return family_->R(); }

  FunctionalValue d(int k) const { return d(k, exps_.s); }
  FunctionalValue d(int k, double s) const {
    if (!hyp_.ok()) return FunctionalValue::divergent("hypothesis violated: " + hyp_.detail);
    return family_->quantity(detail::family_index(k), s);
  }

 private:
  Exponents exps_;
  bool conjugate_;
  HypothesisReport hyp_;
  std::unique_ptr<QuantityFamily> family_;
};

/// A_1..A_5 with F(r) = int_{|y|>r} f and G(r) = int_{|y|<r} g.
class GeneralFunctionals {
 public:
  GeneralFunctionals(const Space& space, const GeneralPair& pair, const FunctionalOptions& opts = {})
      : pair_(pair) {
    pair.validate();
    family_ = std::make_unique<QuantityFamily>(
        QuantityFamily::Side{log_weighted_density(space, pair.f), Direction::to_infinity, "F"},
        QuantityFamily::Side{log_weighted_density(space, pair.g), Direction::from_origin, "G"}, pair.alpha,
        pair.beta, opts);
  }
  const QuantityFamily& family() const { return *family_; }
  FunctionalValue a(int k) const { return family_->quantity(k, pair_.s); }

 private:
  GeneralPair pair_;
  std::unique_ptr<QuantityFamily> family_;
};

/// U(r) = int_r^inf u Lambda.
inline quad::QuadResult big_U(const Space& space, const WeightPair& w, double r, const quad::Tolerance& tol = {}) {
  if (!(r > 0.0)) throw DomainError("r must be > 0");
  auto res = radial_tail(log_weighted_density(space, w.u), r, tol);
  return {res.value(), res.value() * res.rel_error, res.subdivisions};
}

/// V(r) = int_0^r v^{1-p'} Lambda.
inline quad::QuadResult big_V(const Space& space, const WeightPair& w, const Exponents& e, double r,
                              const quad::Tolerance& tol = {}) {
  if (!(r > 0.0)) throw DomainError("r must be > 0");
  auto res = radial_origin(log_weighted_density(space, w.v, 1.0 - e.p_conj()), r, tol);
  return {res.value(), res.value() * res.rel_error, res.subdivisions};
}

inline FunctionalValue d_condition(int k, const Space& space, const WeightPair& w, const Exponents& e,
                                   const FunctionalOptions& opts = {}) {
  return HardyFunctionals(space, w, e, opts).d(k);
}

inline FunctionalValue d_star_condition(int k, const Space& space, const WeightPair& w, const Exponents& e,
                                        const FunctionalOptions& opts = {}) {
  return HardyFunctionals(space, w, e, opts, true).d(k);
}

inline FunctionalValue a_quantity(int k, const Space& space, const GeneralPair& pair,
                                  const FunctionalOptions& opts = {}) {
  return GeneralFunctionals(space, pair, opts).a(k);
}

/// The (f, g, alpha, beta) pair that turns A_1 into D_1.
inline GeneralPair general_pair_of(const WeightPair& w, const Exponents& e) {
  return GeneralPair{w.u, w.dual_v(e), 1.0 / e.q, 1.0 / e.p_conj(), e.s};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// [D1, D1 (p')^{1/p'} p^{1/q}], or nothing when D1 diverges.
inline std::optional<Interval> constant_bracket(const FunctionalValue& d1, const Exponents& e) {
  if (!d1.finite()) return std::nullopt;
  const double pc = e.p_conj();
  return Interval{d1.value, d1.value * std::pow(pc, 1.0 / pc) * std::pow(e.p, 1.0 / e.q)};
}

/// lower * X <= Y <= upper * X.
struct FactorRelation {
  std::string x;
  std::string y;
  double lower = 1.0;
  double upper = 1.0;
};

/// The four relations between A1 and A2..A5 at (alpha, beta, s).
inline std::vector<FactorRelation> general_factors(double alpha, double beta, double s) {
  return {
      {"A1", "A2", std::pow(std::max(1.0, s / beta), -alpha), std::pow(std::max(1.0, beta / s), alpha)},
      {"A1", "A3", std::pow(std::max(1.0, s / alpha), -beta), std::pow(std::max(1.0, alpha / s), beta)},
      {"A1", "A4", std::pow(1.0 + s / beta, -alpha), std::pow((beta + s) / s, alpha)},
      {"A1", "A5", std::pow(1.0 + s / alpha, -beta), std::pow((alpha + s) / s, beta)},
  };
}

/// The four relations between D1 and D2..D5.
inline std::vector<FactorRelation> hardy_factors(const Exponents& e) {
  const double pc = e.p_conj(), q = e.q, s = e.s;
  return {
      {"D1", "D2", std::pow(std::max(1.0, pc * s), -1.0 / q), std::pow(std::max(1.0, 1.0 / (pc * s)), 1.0 / q)},
      {"D1", "D3", std::pow(1.0 + s * pc, -1.0 / q), std::pow((1.0 + s * pc) / (s * pc), 1.0 / q)},
      {"D1", "D4", std::pow(std::max(1.0, q * s), -1.0 / pc), std::pow(std::max(1.0, 1.0 / (q * s)), 1.0 / pc)},
      {"D1", "D5", std::pow(1.0 + s * q, -1.0 / pc), std::pow((1.0 + s * q) / (s * q), 1.0 / pc)},
  };
}

/// All eight relations; the general ones at (alpha, beta) = (1/q, 1/p')
/// unless given.
inline std::vector<FactorRelation> equivalence_factors(const Exponents& e, std::optional<double> alpha = {},
                                                       std::optional<double> beta = {}) {
  e.validate();
  auto rows = hardy_factors(e);
  auto more = general_factors(alpha.value_or(1.0 / e.q), beta.value_or(1.0 / e.p_conj()), e.s);
  rows.insert(rows.end(), more.begin(), more.end());
  return rows;
}

struct AuditRow {
  FactorRelation relation;
  FunctionalValue x;
  FunctionalValue y;
  std::string status;  // "pass", "fail", "skipped"
  double slack = 0.0;  // relative; negative means violated
  std::string note;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const AuditRow& r) { return r.status != "fail"; });
  }
};

inline AuditRow audit_relation(const FactorRelation& rel, const FunctionalValue& x, const FunctionalValue& y,
                               double tolerance = 1e-6) {
  AuditRow row{rel, x, y, "pass", 0.0, ""};
  if (x.finite() && y.finite()) {
    const double lo = rel.lower * x.value, hi = rel.upper * x.value;
    const double a = lo > 0.0 ? (y.value - lo) / lo : (y.value >= lo ? 0.0 : -1.0);
    const double b = hi > 0.0 ? (hi - y.value) / hi : (y.value <= hi ? 0.0 : -1.0);
    row.slack = std::min(a, b);
    row.status = row.slack >= -tolerance ? "pass" : "fail";
  } else if (!x.finite() && !y.finite()) {
    row.slack = 0.0;
    row.note = "both divergent";
  } else if (x.proviso_violated || y.proviso_violated) {
    row.status = "skipped";
    row.note = "L1 proviso fails and one side diverges";
  } else {
    row.status = "fail";
    row.slack = -logspace::pos_inf;
    row.note = "one side finite, the other divergent";
  }
  if (x.proviso_violated || y.proviso_violated) {
    row.note = row.note.empty() ? "L1 proviso fails; computed anyway" : row.note;
  }
  return row;
}

/// Evaluates both sides of every relation and checks them. Conditions with
/// a failing L1 proviso are computed anyway and annotated.
inline AuditReport equivalence_audit(const Space& space, const WeightPair& w, const Exponents& e,
                                     const FunctionalOptions& opts = {}, std::optional<GeneralPair> general = {},
                                     double tolerance = 1e-6) {
  FunctionalOptions o = opts;
  o.enforce_proviso = false;
  AuditReport rep;
  const HardyFunctionals hf(space, w, e, o);
  std::array<FunctionalValue, 6> d;
  for (int k = 1; k <= 5; ++k) d[k] = hf.d(k);
  auto hrows = hardy_factors(e);
  for (int k = 2; k <= 5; ++k) rep.rows.push_back(audit_relation(hrows[k - 2], d[1], d[k], tolerance));

  const GeneralPair gp = general.value_or(general_pair_of(w, e));
  const GeneralFunctionals gf(space, gp, o);
  std::array<FunctionalValue, 6> a;
  for (int k = 1; k <= 5; ++k) a[k] = gf.a(k);
  auto grows = general_factors(gp.alpha, gp.beta, gp.s);
  for (int k = 2; k <= 5; ++k) rep.rows.push_back(audit_relation(grows[k - 2], a[1], a[k], tolerance));
  return rep;
}

}  // namespace hardykit
