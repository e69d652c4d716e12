#pragma once

// Command-line front end: check | compute | verify | equiv.
//
// Exit codes: 0 success (admissible / all checks pass), 1 negative outcome
// (not admissible / a check failed), 2 usage or evaluation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hardykit/hardykit.hpp"

namespace hardykit::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

/// A field-level usage error; reported with exit code 2.
class UsageError : public Error {
 public:
  UsageError(const std::string& field, const std::string& what) : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct JobConfig {
  std::string command;
  std::string space = "half-line";
  std::optional<int> n;
  std::optional<double> Q, b, sigma;
  std::optional<std::string> density;
  std::optional<std::string> u, v;
  std::optional<double> alpha, beta;
  double p = 2.0, q = 2.0, s = 1.0;
  double tol_rel = 1e-10, tol_abs = 1e-14;
  std::string format = "json";
  std::string out;
  bool conjugate = false;
  bool general = false;
  std::optional<std::string> trial;
  double trial_lo = 0.0;
  double trial_hi = std::numeric_limits<double>::infinity();
};

namespace detail {

// Config-file keys by section, and the flag each one feeds.
inline const std::map<std::string, std::string>& config_keys() {
  static const std::map<std::string, std::string> keys = {
      {"space.kind", "--space"},       {"space.n", "--n"},
      {"space.Q", "--Q"},              {"space.b", "--b"},
      {"space.sigma", "--sigma"},      {"space.density", "--density"},
      {"weights.u", "--u"},            {"weights.v", "--v"},
      {"weights.alpha", "--alpha"},    {"weights.beta", "--beta"},
      {"exponents.p", "-p"},           {"exponents.q", "-q"},
      {"exponents.s", "--s"},          {"options.tol_rel", "--tol-rel"},
      {"options.tol_abs", "--tol-abs"}, {"options.format", "--format"},
      {"options.out", "--out"},        {"options.conjugate", "--conjugate"},
      {"options.general", "--general"}, {"options.trial", "--trial"},
      {"options.trial_lo", "--trial-lo"}, {"options.trial_hi", "--trial-hi"},
  };
  return keys;
}

inline bool is_flag_key(const std::string& flag) { return flag == "--conjugate" || flag == "--general"; }

/// Flags from an INI file, to be placed before the command-line flags so
/// that the latter win.
inline std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config", "cannot open '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError("--config", e.what());
  }
  std::vector<std::string> args;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key = item.fullname();
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    const auto it = config_keys().find(key);
    if (it == config_keys().end()) throw UsageError("--config", "unknown key '" + item.fullname() + "'");
    if (item.inputs.size() != 1) throw UsageError(item.fullname(), "expected one value");
    const std::string& value = item.inputs.front();
    if (is_flag_key(it->second)) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        args.push_back(it->second);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw UsageError(item.fullname(), "expected a boolean, got '" + value + "'");
      }
      continue;
    }
    args.push_back(it->second);
    args.push_back(value);
  }
  return args;
}

inline void add_common(CLI::App& sub, JobConfig& c) {
  sub.add_option("--space", c.space, "half-line | euclidean | homogeneous | hyperbolic | cartan-hadamard | generic")
      ->check(CLI::IsMember({"half-line", "euclidean", "homogeneous", "hyperbolic", "cartan-hadamard", "generic"}));
  sub.add_option("--n", c.n, "topological dimension");
  sub.add_option("--Q", c.Q, "homogeneous dimension");
  sub.add_option("--b", c.b, "curvature magnitude (curvature -b)");
  sub.add_option("--sigma", c.sigma, "sphere constant");
  sub.add_option("--density", c.density, "radial density expression for --space generic");
  sub.add_option("--u", c.u, "outer weight u(r)");
  sub.add_option("--v", c.v, "inner weight v(r)");
  sub.add_option("--alpha", c.alpha, "power of u (check, or power weights when --u is absent)");
  sub.add_option("--beta", c.beta, "power of v");
  sub.add_option("-p", c.p, "exponent p");
  sub.add_option("-q", c.q, "exponent q");
  sub.add_option("--s", c.s, "auxiliary exponent s > 0");
  sub.add_option("--tol-rel", c.tol_rel, "relative quadrature tolerance");
  sub.add_option("--tol-abs", c.tol_abs, "absolute quadrature tolerance");
  sub.add_option("--format", c.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
  sub.add_option("--out", c.out, "write the report to this file instead of stdout");
  sub.add_option("--config", "INI file with [space], [weights], [exponents], [options]");
  for (auto* opt : sub.get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline Json number(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Instance {
  Space space = Space::half_line();
  Json space_json;
  Exponents exps;
  FunctionalOptions opts;
  quad::Tolerance tol;
};

inline double require(const std::optional<double>& x, const char* field, const std::string& why) {
  if (!x) throw UsageError(field, "required " + why);
  return *x;
}

inline Instance build_instance(const JobConfig& c) {
  Instance in;
  try {
    in.exps = Exponents::make(c.p, c.q, c.s);
  } catch (const DomainError& e) {
    throw UsageError("-p/-q/--s", e.what());
  }
  in.tol.rel = c.tol_rel;
  in.tol.abs = c.tol_abs;
  try {
    in.tol.validate();
  } catch (const DomainError& e) {
    throw UsageError("--tol-rel/--tol-abs", e.what());
  }
  in.opts.tol = in.tol;
  Json sj;
  sj["kind"] = c.space;
  auto need_n = [&] {
    if (!c.n) throw UsageError("--n", "required for --space " + c.space);
    sj["n"] = *c.n;
    return *c.n;
  };
  try {
    if (c.space == "half-line") {
      in.space = Space::half_line();
    } else if (c.space == "euclidean") {
      const int n = need_n();
      in.space = c.sigma ? Space::euclidean(n, *c.sigma) : Space::euclidean(n);
    } else if (c.space == "homogeneous") {
      const double Q = require(c.Q, "--Q", "for --space homogeneous");
      sj["Q"] = Q;
      in.space = Space::homogeneous_group(Q, c.sigma.value_or(1.0));
    } else if (c.space == "hyperbolic") {
      in.space = Space::hyperbolic(need_n());
    } else if (c.space == "cartan-hadamard") {
      const int n = need_n();
      const double b = require(c.b, "--b", "for --space cartan-hadamard");
      sj["b"] = b;
      in.space = Space::cartan_hadamard(n, b);
    } else {
      if (!c.density) throw UsageError("--density", "required for --space generic");
      sj["density"] = *c.density;
      in.space = Space::generic(wexpr::WeightExpr::parse(*c.density), c.sigma.value_or(1.0));
    }
  } catch (const wexpr::ParseError& e) {
    throw UsageError("--density", e.what());
  } catch (const DomainError& e) {
    throw UsageError("--space", e.what());
  }
  sj["sigma"] = in.space.sigma();
  in.space_json = sj;
  return in;
}

inline wexpr::WeightExpr parse_field(const std::string& text, const char* field) {
  try {
    return wexpr::WeightExpr::parse(text);
  } catch (const wexpr::ParseError& e) {
    throw UsageError(field, e.what());
  }
}

// Power weights matching the geometry: r^a, or sinh(sqrt(b) r)^a on curved spaces.
inline WeightPair default_power_weights(const JobConfig& c, double alpha, double beta) {
  if (c.space == "hyperbolic") return sinh_power_weights(alpha, beta);
  if (c.space == "cartan-hadamard" && c.b && *c.b > 0.0) return sinh_power_weights(alpha, beta, *c.b);
  return power_weights(alpha, beta);
}

inline WeightPair build_weights(const JobConfig& c) {
  if (c.u && c.v) return {parse_field(*c.u, "--u"), parse_field(*c.v, "--v")};
  if (!c.u && !c.v && c.alpha && c.beta) return default_power_weights(c, *c.alpha, *c.beta);
  throw UsageError(c.u ? "--v" : "--u", "weights need --u and --v, or --alpha and --beta for power weights");
}

inline Json weights_json(const WeightPair& w) {
  Json j;
  j["u"] = w.u.format();
  j["v"] = w.v.format();
  return j;
}

inline Json input_json(const JobConfig& c, const Instance& in, const Json& weights) {
  Json j;
  j["space"] = in.space_json;
  j["weights"] = weights;
  j["exponents"] = {{"p", in.exps.p}, {"q", in.exps.q}, {"s", in.exps.s}};
  j["options"] = {{"tol_rel", c.tol_rel}, {"tol_abs", c.tol_abs}};
  return j;
}

inline Json value_json(const FunctionalValue& v) {
  Json j;
  if (v.finite()) {
    j["value"] = v.value;
    j["error_estimate"] = v.error_estimate;
  } else {
    j["value"] = "divergent";
    j["error_estimate"] = nullptr;
  }
  j["argmax_r"] = number(v.argmax_r);
  j["proviso_violated"] = v.proviso_violated;
  j["note"] = v.note;
  return j;
}

inline FunctionalValue failed_value(const std::exception& e) {
  FunctionalValue v = FunctionalValue::divergent(std::string("not computed: ") + e.what());
  return v;
}

struct Report {
  Json json;
  int exit_code = 0;
  std::string csv;
  std::string text;
};

// ---------------------------------------------------------------- check

inline Report cmd_check(const JobConfig& c) {
  const Instance in = build_instance(c);
  if (c.space == "generic") {
    throw UsageError("--space", "closed forms exist only for power weights on half-line, euclidean, homogeneous, "
                                "hyperbolic and cartan-hadamard spaces; use 'compute' for general weights");
  }
  const bool curved = c.space == "hyperbolic" || (c.space == "cartan-hadamard" && c.b.value_or(0.0) > 0.0);
  auto extract = [&](const std::optional<double>& given, const std::optional<std::string>& text, const char* field,
                     const char* power_flag) -> double {
    if (given) return *given;
    if (!text) throw UsageError(power_flag, "required (or give the weight as a pure power)");
    const auto e = parse_field(*text, field);
    std::optional<double> a = curved ? wexpr::power_of_sinh_r(e) : wexpr::power_of_r(e);
    if (curved && c.space == "cartan-hadamard" && *c.b != 1.0 && e.root().op != wexpr::Op::number) a.reset();
    if (!a) {
      throw UsageError(field, std::string("closed forms require a weight of the form ") +
                                  (curved ? "sinh(r)^a" : "r^a") + "; pass " + power_flag +
                                  " or use 'compute' for general weights");
    }
    return *a;
  };
  const double alpha = extract(c.alpha, c.u, "--u", "--alpha");
  const double beta = extract(c.beta, c.v, "--v", "--beta");
  const double p = in.exps.p, q = in.exps.q;
  Verdict v;
  if (c.space == "half-line") {
    v = check_homogeneous(1.0, 1.0, p, q, alpha, beta);
  } else if (c.space == "euclidean") {
    v = check_homogeneous(*c.n, in.space.sigma(), p, q, alpha, beta);
  } else if (c.space == "homogeneous") {
    v = check_homogeneous(*c.Q, in.space.sigma(), p, q, alpha, beta);
  } else if (c.space == "hyperbolic") {
    v = check_hyperbolic(*c.n, p, q, alpha, beta);
  } else {
    v = check_cartan_hadamard(*c.n, *c.b, p, q, alpha, beta);
  }

  Report rep;
  rep.exit_code = v.admissible ? 0 : 1;
  Json res;
  res["admissible"] = v.admissible;
  res["regime"] = v.regime ? Json(*v.regime) : Json(nullptr);
  res["failed_conditions"] = v.failed_conditions;
  res["constant_interval"] =
      v.constant_interval ? Json::array({v.constant_interval->lo, v.constant_interval->hi}) : Json(nullptr);
  res["warnings"] = v.warnings;
  res["balance_tolerance"] = balance_tolerance;
  Json weights = {{"alpha", alpha}, {"beta", beta}};
  rep.json["input"] = input_json(c, in, weights);
  rep.json["result"] = res;

  std::ostringstream csv, text;
  csv << "field,value\n";
  csv << "admissible," << (v.admissible ? "true" : "false") << "\n";
  csv << "regime," << v.regime.value_or("") << "\n";
  for (const auto& f : v.failed_conditions) csv << "failed_condition," << csv_field(f) << "\n";
  if (v.constant_interval) {
    csv << "interval_lo," << fmt(v.constant_interval->lo) << "\ninterval_hi," << fmt(v.constant_interval->hi) << "\n";
  }
  for (const auto& w : v.warnings) csv << "warning," << csv_field(w) << "\n";
  text << (v.admissible ? "admissible" : "not admissible");
  if (v.regime) text << " (regime " << *v.regime << ")";
  text << "\n";
  for (const auto& f : v.failed_conditions) text << "  failed: " << f << "\n";
  if (v.constant_interval) {
    text << "  best constant in [" << fmt(v.constant_interval->lo) << ", " << fmt(v.constant_interval->hi) << "]\n";
  }
  for (const auto& w : v.warnings) text << "  warning: " << w << "\n";
  text << "  balance tolerance " << balance_tolerance << "\n";
  rep.csv = csv.str();
  rep.text = text.str();
  return rep;
}

// ---------------------------------------------------------------- compute / equiv

inline Json audit_json(const AuditReport& a) {
  Json rows = Json::array();
  for (const auto& r : a.rows) {
    Json j;
    j["x"] = r.relation.x;
    j["y"] = r.relation.y;
    j["lower"] = r.relation.lower;
    j["upper"] = r.relation.upper;
    j["x_value"] = r.x.finite() ? Json(r.x.value) : Json("divergent");
    j["y_value"] = r.y.finite() ? Json(r.y.value) : Json("divergent");
    j["status"] = r.status;
    j["slack"] = number(r.slack);
    j["note"] = r.note;
    rows.push_back(j);
  }
  return rows;
}

struct Computed {
  std::array<FunctionalValue, 6> d;
  std::array<FunctionalValue, 6> d_star;
  std::array<FunctionalValue, 6> a;
  GeneralPair general;
  AuditReport audit;
  HypothesisReport hypotheses;
};

inline Computed compute_all(const Instance& in, const WeightPair& w, bool conjugate) {
  FunctionalOptions o = in.opts;
  o.enforce_proviso = false;
  Computed out;
  auto guarded = [](auto&& f) {
    try {
      return f();
    } catch (const MakesSenseError& e) {
      return failed_value(e);
    }
  };
  const HardyFunctionals hf(in.space, w, in.exps, o);
  out.hypotheses = hf.hypotheses();
  for (int k = 1; k <= 5; ++k) out.d[k] = guarded([&] { return hf.d(k); });
  out.general = general_pair_of(w, in.exps);
  const GeneralFunctionals gf(in.space, out.general, o);
  for (int k = 1; k <= 5; ++k) out.a[k] = guarded([&] { return gf.a(k); });
  const auto hrows = hardy_factors(in.exps);
  const auto grows = general_factors(out.general.alpha, out.general.beta, out.general.s);
  for (int k = 2; k <= 5; ++k) out.audit.rows.push_back(audit_relation(hrows[k - 2], out.d[1], out.d[k]));
  for (int k = 2; k <= 5; ++k) out.audit.rows.push_back(audit_relation(grows[k - 2], out.a[1], out.a[k]));
  if (conjugate) {
    const HardyFunctionals cf(in.space, w, in.exps, o, true);
    for (int k = 1; k <= 5; ++k) out.d_star[k] = guarded([&] { return cf.d(k); });
  }
  return out;
}

inline Report cmd_compute(const JobConfig& c, bool audit_only) {
  const Instance in = build_instance(c);
  const WeightPair w = build_weights(c);
  const Computed r = compute_all(in, w, c.conjugate && !audit_only);

  Report rep;
  rep.json["input"] = input_json(c, in, weights_json(w));
  Json res;
  Json hyp = {{"u_ok", r.hypotheses.u_ok}, {"dual_v_ok", r.hypotheses.dual_v_ok}, {"detail", r.hypotheses.detail}};
  if (!audit_only) {
    Json f;
    for (int k = 1; k <= 5; ++k) f["D" + std::to_string(k)] = value_json(r.d[k]);
    res["functionals"] = f;
    if (c.conjugate) {
      Json fs;
      for (int k = 1; k <= 5; ++k) fs["D*" + std::to_string(k)] = value_json(r.d_star[k]);
      res["conjugate_functionals"] = fs;
    }
    if (c.general) {
      Json g;
      g["alpha"] = r.general.alpha;
      g["beta"] = r.general.beta;
      for (int k = 1; k <= 5; ++k) g["A" + std::to_string(k)] = value_json(r.a[k]);
      res["general_functionals"] = g;
    }
    const auto br = constant_bracket(r.d[1], in.exps);
    res["constant_bracket"] = br ? Json::array({br->lo, br->hi}) : Json(nullptr);
  }
  res["hypotheses"] = hyp;
  res["audit"] = audit_json(r.audit);
  res["audit_pass"] = r.audit.all_pass();
  rep.json["result"] = res;
  rep.exit_code = audit_only ? (r.audit.all_pass() ? 0 : 1) : 0;

  std::ostringstream csv, text;
  if (!audit_only) {
    csv << "functional,value,error_estimate,argmax_r,proviso_violated,note\n";
    auto line = [&](const std::string& name, const FunctionalValue& v) {
      csv << name << "," << (v.finite() ? fmt(v.value) : "divergent") << ","
          << (v.finite() ? fmt(v.error_estimate) : "") << "," << fmt(v.argmax_r) << ","
          << (v.proviso_violated ? "true" : "false") << "," << csv_field(v.note) << "\n";
      text << name << " = " << (v.finite() ? fmt(v.value) : "divergent");
      if (v.finite()) text << " +- " << fmt(v.error_estimate) << " at r = " << fmt(v.argmax_r);
      if (!v.note.empty()) text << "  (" << v.note << ")";
      text << "\n";
    };
    for (int k = 1; k <= 5; ++k) line("D" + std::to_string(k), r.d[k]);
    if (c.conjugate) {
      for (int k = 1; k <= 5; ++k) line("D*" + std::to_string(k), r.d_star[k]);
    }
    if (c.general) {
      for (int k = 1; k <= 5; ++k) line("A" + std::to_string(k), r.a[k]);
    }
  } else {
    csv << "x,y,lower,upper,x_value,y_value,status,slack,note\n";
    for (const auto& row : r.audit.rows) {
      csv << row.relation.x << "," << row.relation.y << "," << fmt(row.relation.lower) << ","
          << fmt(row.relation.upper) << "," << (row.x.finite() ? fmt(row.x.value) : "divergent") << ","
          << (row.y.finite() ? fmt(row.y.value) : "divergent") << "," << row.status << "," << fmt(row.slack) << ","
          << csv_field(row.note) << "\n";
    }
  }
  if (!r.hypotheses.ok()) text << "hypotheses: " << r.hypotheses.detail << "\n";
  for (const auto& row : r.audit.rows) {
    text << fmt(row.relation.lower) << " * " << row.relation.x << " <= " << row.relation.y
         << " <= " << fmt(row.relation.upper) << " * " << row.relation.x << ": " << row.status;
    if (row.status != "skipped") text << " (slack " << fmt(row.slack) << ")";
    if (!row.note.empty()) text << "  " << row.note;
    text << "\n";
  }
  rep.csv = csv.str();
  rep.text = text.str();
  return rep;
}

// ---------------------------------------------------------------- verify

inline Json quotient_json(const QuotientReport& q) {
  Json j;
  j["trial"] = q.trial.description;
  j["lhs"] = number(q.lhs);
  j["rhs"] = number(q.rhs);
  j["quotient"] = number(q.quotient);
  j["violated"] = q.violated;
  j["note"] = q.note;
  return j;
}

inline Report cmd_verify(const JobConfig& c) {
  const Instance in = build_instance(c);
  const WeightPair w = build_weights(c);
  std::vector<TrialFunction> trials;
  if (c.trial) {
    try {
      trials.push_back(TrialFunction::expression(parse_field(*c.trial, "--trial"), c.trial_lo, c.trial_hi));
    } catch (const DomainError& e) {
      throw UsageError("--trial-lo/--trial-hi", e.what());
    }
  }
  FunctionalOptions o = in.opts;
  const BracketReport br = c.conjugate ? conjugate_bracket_check(in.space, w, in.exps, o, trials)
                                       : bracket_check(in.space, w, in.exps, o, trials);
  Report rep;
  rep.exit_code = br.passed() ? 0 : 1;
  rep.json["input"] = input_json(c, in, weights_json(w));
  Json res;
  res["conjugate"] = br.conjugate;
  res["D1"] = value_json(br.d1);
  res["constant_bracket"] = br.bracket ? Json::array({br.bracket->lo, br.bracket->hi}) : Json(nullptr);
  Json lb;
  lb["c_lower"] = number(br.lower.c_lower);
  lb["best_t"] = number(br.lower.best_t);
  lb["error_estimate"] = br.lower.error_estimate;
  lb["note"] = br.lower.note;
  Json samples = Json::array();
  for (const auto& [t, qv] : br.lower.samples) samples.push_back({{"t", t}, {"quotient", number(qv)}});
  lb["samples"] = samples;
  res["lower_bound"] = lb;
  Json tj = Json::array();
  for (const auto& t : br.trials) tj.push_back(quotient_json(t));
  res["trials"] = tj;
  res["epsilon"] = br.epsilon;
  Json checks = Json::array();
  for (const auto& ck : br.checks) checks.push_back({{"name", ck.name}, {"pass", ck.pass}, {"detail", ck.detail}});
  res["checks"] = checks;
  res["passed"] = br.passed();
  res["note"] = br.note;
  rep.json["result"] = res;

  // Sweep for plotting: the cutoff quotient and the two profiles per node.
  std::ostringstream csv, text;
  csv << "t,quotient,U,V\n";
  if (!br.lower.curve.empty()) {
    const HardyFunctionals hf(in.space, w, in.exps, o, c.conjugate);
    for (std::size_t i = 0; i < br.lower.curve.size(); ++i) {
      csv << fmt(br.lower.curve[i].first) << "," << fmt(br.lower.curve[i].second) << "," << fmt(hf.U().value(br.lower.curve[i].first))
          << "," << fmt(hf.V().value(br.lower.curve[i].first)) << "\n";
    }
  }
  text << (br.passed() ? "PASS" : "FAIL") << (br.conjugate ? " (conjugate)" : "") << "\n";
  text << "D1 = " << (br.d1.finite() ? fmt(br.d1.value) : "divergent") << "\n";
  if (br.bracket) text << "best constant in [" << fmt(br.bracket->lo) << ", " << fmt(br.bracket->hi) << "]\n";
  text << "cutoff lower bound " << fmt(br.lower.c_lower) << " at t = " << fmt(br.lower.best_t);
  if (!br.lower.note.empty()) text << "  (" << br.lower.note << ")";
  text << "\n";
  for (const auto& t : br.trials) text << "trial " << t.trial.description << ": quotient " << fmt(t.quotient) << "\n";
  for (const auto& ck : br.checks) text << (ck.pass ? "  ok   " : "  FAIL ") << ck.name << ": " << ck.detail << "\n";
  if (!br.note.empty()) text << br.note << "\n";
  rep.csv = csv.str();
  rep.text = text.str();
  return rep;
}

inline std::string render(const Report& rep, const JobConfig& c) {
  if (c.format == "csv") return rep.csv;
  if (c.format == "text") return rep.text;
  Json j;
  j["schema_version"] = schema_version;
  j["command"] = c.command;
  j["exit_code"] = rep.exit_code;
  for (auto it = rep.json.begin(); it != rep.json.end(); ++it) j[it.key()] = it.value();
  return j.dump(2) + "\n";
}

inline Json error_json(const std::string& command, const std::string& field, const std::string& message) {
  Json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  j["exit_code"] = 2;
  j["error"] = {{"field", field}, {"message", message}};
  return j;
}

}  // namespace detail

/// Runs one invocation; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  JobConfig c;
  CLI::App app{"hardykit: weighted Hardy inequalities on radial spaces"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  auto* check = app.add_subcommand("check", "closed-form admissibility of power weights");
  auto* compute = app.add_subcommand("compute", "D1..D5 with error estimates and the factor audit");
  auto* verify = app.add_subcommand("verify", "test the inequality on trial functions and bracket C");
  auto* equiv = app.add_subcommand("equiv", "audit every factor relation between the conditions");
  for (auto* sub : {check, compute, verify, equiv}) detail::add_common(*sub, c);
  for (auto* sub : {compute, verify}) {
    sub->add_flag("--conjugate", c.conjugate, "also (compute) or only (verify) the conjugate inequality");
  }
  compute->add_flag("--general", c.general, "also the general family A1..A5");
  verify->add_option("--trial", c.trial, "extra trial function f(r)");
  verify->add_option("--trial-lo", c.trial_lo, "trial support lower end");
  verify->add_option("--trial-hi", c.trial_hi, "trial support upper end");

  // Config file first, so flags given on the command line override it.
  std::vector<std::string> argv = args;
  std::string command = argv.empty() ? "" : argv.front();
  auto emit_error = [&](const std::string& field, const std::string& message) {
    const bool prefixed = field.empty() || message.rfind(field, 0) == 0;
    err << "error: " << (prefixed ? "" : field + ": ") << message << "\n";
    if (c.format == "json") out << detail::error_json(command, field, message).dump(2) << "\n";
    return 2;
  };
  try {
    for (std::size_t i = 1; i + 1 < argv.size(); ++i) {
      if (argv[i] == "--config") {
        auto extra = detail::config_args(argv[i + 1]);
        argv.erase(argv.begin() + static_cast<long>(i), argv.begin() + static_cast<long>(i) + 2);
        argv.insert(argv.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
  } catch (const UsageError& e) {
    return emit_error(e.field(), e.what());
  }
  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    // The format may itself be the bad value; anything but csv/text gets JSON.
    if (c.format != "csv" && c.format != "text") c.format = "json";
    const std::string message = e.what();
    std::string field;
    for (const auto& a : args) {
      if (a.size() > 1 && a[0] == '-' && message.find(a) != std::string::npos) {
        field = a;
        break;
      }
    }
    return emit_error(field, message);
  }
  c.command = app.get_subcommands().front()->get_name();
  command = c.command;

  detail::Report rep;
  try {
    if (c.command == "check") {
      rep = detail::cmd_check(c);
    } else if (c.command == "compute") {
      rep = detail::cmd_compute(c, false);
    } else if (c.command == "verify") {
      rep = detail::cmd_verify(c);
    } else {
      rep = detail::cmd_compute(c, true);
    }
  } catch (const UsageError& e) {
    return emit_error(e.field(), e.what());
  } catch (const std::exception& e) {
    return emit_error("", e.what());
  }
  const std::string text = detail::render(rep, c);
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream f(c.out);
    if (!f || !(f << text)) return emit_error("--out", "cannot write '" + c.out + "'");
  }
  return rep.exit_code;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace hardykit::cli
