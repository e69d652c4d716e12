#pragma once

// A small expression language for positive radial functions of r.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'r' | 'pi' | func '(' expr ')'
//            | ('min' | 'max') '(' expr ',' expr ')' | '(' expr ')'
//   func    := sinh | cosh | exp | log | sqrt | abs
//
// Closed subtrees are folded to literals while parsing, so "(1-3)" becomes
// the literal -2.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"

namespace hardykit::wexpr {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::set<std::string> expected)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::set<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "' at offset " + std::to_string(offset),
                   offset, {}),
        name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class EvalError : public Error {
 public:
  EvalError(const std::string& reason, std::string subexpression, double r)
      : Error(reason + " in '" + subexpression + "' at r=" + fmt_r(r)),
        subexpression_(std::move(subexpression)),
        r_(r) {}
  const std::string& subexpression() const noexcept { return subexpression_; }
  double r() const noexcept { return r_; }

 private:
  static std::string fmt_r(double r) {
    std::ostringstream os;
    os.precision(17);
    os << r;
    return os.str();
  }
  std::string subexpression_;
  double r_;
};

enum class Op { number, var, neg, add, sub, mul, div, pow, sinh, cosh, exp, log, sqrt, abs, min, max };

/// A value represented as sign * exp(log_abs).
struct SignedLog {
  int sign = 0;
  double log_abs = logspace::neg_inf;

  static SignedLog from(double v) {
    if (v == 0.0) return {0, logspace::neg_inf};
    return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
  }
  double linear() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

class WeightExpr {
 public:
  struct Node {
    Op op = Op::number;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
  };

  WeightExpr() : WeightExpr(number(1.0)) {}

  // Tree builders. Unlike parse() these never fold constants.
  static WeightExpr number(double v) {
    WeightExpr e(0);
    e.root_ = e.push({Op::number, v, -1, -1});
    return e;
  }
  static WeightExpr variable() {
    WeightExpr e(0);
    e.root_ = e.push({Op::var, 0.0, -1, -1});
    return e;
  }
  static WeightExpr unary(Op op, const WeightExpr& a) {
    WeightExpr e(0);
    int ia = e.graft(a);
    e.root_ = e.push({op, 0.0, ia, -1});
    return e;
  }
  static WeightExpr binary(Op op, const WeightExpr& a, const WeightExpr& b) {
    WeightExpr e(0);
    int ia = e.graft(a);
    int ib = e.graft(b);
    e.root_ = e.push({op, 0.0, ia, ib});
    return e;
  }

  static WeightExpr parse(std::string_view text);

  /// Plain IEEE double evaluation.
  double eval(double r) const { return eval_node(root_, r); }

  /// Evaluation carried in sign/log form; never overflows for large r.
  SignedLog eval_signed_log(double r) const { return eval_log_node(root_, r); }

  /// log of the value; throws EvalError unless the value is positive.
  double eval_log(double r) const {
    SignedLog v = eval_log_node(root_, r);
    if (v.sign < 0) throw EvalError("negative weight value", format(), r);
    if (std::isnan(v.log_abs)) throw EvalError("undefined weight value", format(), r);
    return v.log_abs;
  }

  std::string format() const { return format_node(root_); }

  bool operator==(const WeightExpr& other) const {
    return equal_nodes(root_, other, other.root_);
  }

  bool depends_on_r() const { return uses_var(root_); }

  const Node& root() const { return nodes_[root_]; }
  const Node& node(int i) const { return nodes_[i]; }

  /// Subtree at index i as a standalone expression.
  WeightExpr subtree(int i) const {
    WeightExpr e(0);
    e.root_ = e.copy_from(*this, i);
    return e;
  }

 private:
  explicit WeightExpr(int) {}

  int push(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }
  int graft(const WeightExpr& other) { return copy_from(other, other.root_); }
  int copy_from(const WeightExpr& other, int i) {
    Node n = other.nodes_[i];
    if (n.lhs >= 0) n.lhs = copy_from(other, n.lhs);
    if (n.rhs >= 0) n.rhs = copy_from(other, n.rhs);
    return push(n);
  }

  bool uses_var(int i) const {
    const Node& n = nodes_[i];
    if (n.op == Op::var) return true;
    return (n.lhs >= 0 && uses_var(n.lhs)) || (n.rhs >= 0 && uses_var(n.rhs));
  }

  bool equal_nodes(int i, const WeightExpr& o, int j) const {
    const Node& a = nodes_[i];
    const Node& b = o.nodes_[j];
    if (a.op != b.op) return false;
    if (a.op == Op::number) {
      return std::signbit(a.value) == std::signbit(b.value) &&
             (a.value == b.value || (std::isnan(a.value) && std::isnan(b.value)));
    }
    if ((a.lhs < 0) != (b.lhs < 0) || (a.rhs < 0) != (b.rhs < 0)) return false;
    if (a.lhs >= 0 && !equal_nodes(a.lhs, o, b.lhs)) return false;
    if (a.rhs >= 0 && !equal_nodes(a.rhs, o, b.rhs)) return false;
    return true;
  }

  [[noreturn]] void fail(const char* reason, int i, double r) const {
    throw EvalError(reason, format_node(i), r);
  }

  static double power(double base, double expo, bool& ok) {
    ok = true;
    if (base > 0.0) return std::exp(expo * std::log(base));
    if (base == 0.0) {
      if (expo > 0.0) return 0.0;
      if (expo == 0.0) return 1.0;
      ok = false;
      return 0.0;
    }
    if (std::nearbyint(expo) == expo) return std::pow(base, expo);
    ok = false;
    return 0.0;
  }

  double eval_node(int i, double r) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::number: return n.value;
      case Op::var: return r;
      case Op::neg: return -eval_node(n.lhs, r);
      case Op::add: return eval_node(n.lhs, r) + eval_node(n.rhs, r);
      case Op::sub: return eval_node(n.lhs, r) - eval_node(n.rhs, r);
      case Op::mul: return eval_node(n.lhs, r) * eval_node(n.rhs, r);
      case Op::div: {
        double a = eval_node(n.lhs, r);
        double b = eval_node(n.rhs, r);
        if (b == 0.0) fail("division by zero", i, r);
        return a / b;
      }
      case Op::pow: {
        bool ok = true;
        double v = power(eval_node(n.lhs, r), eval_node(n.rhs, r), ok);
        if (!ok) fail("power undefined", i, r);
        return v;
      }
      case Op::sinh: return std::sinh(eval_node(n.lhs, r));
      case Op::cosh: return std::cosh(eval_node(n.lhs, r));
      case Op::exp: return std::exp(eval_node(n.lhs, r));
      case Op::log: {
        double a = eval_node(n.lhs, r);
        if (!(a > 0.0)) fail("log of non-positive value", i, r);
        return std::log(a);
      }
      case Op::sqrt: {
        double a = eval_node(n.lhs, r);
        if (a < 0.0) fail("sqrt of negative value", i, r);
        return std::sqrt(a);
      }
      case Op::abs: return std::fabs(eval_node(n.lhs, r));
      case Op::min: return std::min(eval_node(n.lhs, r), eval_node(n.rhs, r));
      case Op::max: return std::max(eval_node(n.lhs, r), eval_node(n.rhs, r));
    }
    return 0.0;
  }

  static SignedLog signed_add(SignedLog a, SignedLog b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.sign == b.sign) return {a.sign, logspace::add(a.log_abs, b.log_abs)};
    if (a.log_abs == b.log_abs) return {0, logspace::neg_inf};
    if (a.log_abs > b.log_abs) return {a.sign, logspace::sub(a.log_abs, b.log_abs)};
    return {b.sign, logspace::sub(b.log_abs, a.log_abs)};
  }

  static bool less(SignedLog a, SignedLog b) {
    if (a.sign != b.sign) return a.sign < b.sign;
    if (a.sign == 0) return false;
    return a.sign > 0 ? a.log_abs < b.log_abs : a.log_abs > b.log_abs;
  }

  SignedLog eval_log_node(int i, double r) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::number: return SignedLog::from(n.value);
      case Op::var: return SignedLog::from(r);
      case Op::neg: {
        SignedLog a = eval_log_node(n.lhs, r);
        return {-a.sign, a.log_abs};
      }
      case Op::add: return signed_add(eval_log_node(n.lhs, r), eval_log_node(n.rhs, r));
      case Op::sub: {
        SignedLog b = eval_log_node(n.rhs, r);
        return signed_add(eval_log_node(n.lhs, r), {-b.sign, b.log_abs});
      }
      case Op::mul: {
        SignedLog a = eval_log_node(n.lhs, r);
        SignedLog b = eval_log_node(n.rhs, r);
        if (a.sign == 0 || b.sign == 0) return {0, logspace::neg_inf};
        return {a.sign * b.sign, a.log_abs + b.log_abs};
      }
      case Op::div: {
        SignedLog a = eval_log_node(n.lhs, r);
        SignedLog b = eval_log_node(n.rhs, r);
        if (b.sign == 0) fail("division by zero", i, r);
        if (a.sign == 0) return {0, logspace::neg_inf};
        return {a.sign * b.sign, a.log_abs - b.log_abs};
      }
      case Op::pow: {
        SignedLog a = eval_log_node(n.lhs, r);
        double e = eval_log_node(n.rhs, r).linear();
        if (a.sign > 0) return {1, e * a.log_abs};
        if (a.sign == 0) {
          if (e > 0.0) return {0, logspace::neg_inf};
          if (e == 0.0) return {1, 0.0};
          fail("power undefined", i, r);
        }
        if (std::nearbyint(e) != e) fail("power undefined", i, r);
        int s = std::fmod(std::fabs(e), 2.0) == 1.0 ? -1 : 1;
        return {s, e * a.log_abs};
      }
      case Op::sinh: {
        double x = eval_log_node(n.lhs, r).linear();
        if (x == 0.0) return {0, logspace::neg_inf};
        return {x > 0 ? 1 : -1, logspace::log_sinh(std::fabs(x))};
      }
      case Op::cosh: return {1, logspace::log_cosh(eval_log_node(n.lhs, r).linear())};
      case Op::exp: return {1, eval_log_node(n.lhs, r).linear()};
      case Op::log: {
        SignedLog a = eval_log_node(n.lhs, r);
        if (a.sign <= 0) fail("log of non-positive value", i, r);
        return SignedLog::from(a.log_abs);
      }
      case Op::sqrt: {
        SignedLog a = eval_log_node(n.lhs, r);
        if (a.sign < 0) fail("sqrt of negative value", i, r);
        return {a.sign, 0.5 * a.log_abs};
      }
      case Op::abs: {
        SignedLog a = eval_log_node(n.lhs, r);
        return {a.sign == 0 ? 0 : 1, a.log_abs};
      }
      case Op::min: {
        SignedLog a = eval_log_node(n.lhs, r);
        SignedLog b = eval_log_node(n.rhs, r);
        return less(b, a) ? b : a;
      }
      case Op::max: {
        SignedLog a = eval_log_node(n.lhs, r);
        SignedLog b = eval_log_node(n.rhs, r);
        return less(a, b) ? b : a;
      }
    }
    return {};
  }

  static int precedence(const Node& n) {
    switch (n.op) {
      case Op::add:
      case Op::sub: return 1;
      case Op::mul:
      case Op::div: return 2;
      case Op::neg: return 3;
      case Op::pow: return 4;
      case Op::number: return (std::signbit(n.value) || !std::isfinite(n.value)) ? 3 : 5;
      default: return 5;
    }
  }

  static std::string format_number(double v) {
    if (std::isnan(v)) return "(0/0)";
    if (std::isinf(v)) return v > 0 ? "(1/0)" : "(-1/0)";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  std::string wrap(int i, bool parens) const {
    std::string s = format_node(i);
    return parens ? "(" + s + ")" : s;
  }

  std::string format_node(int i) const {
    const Node& n = nodes_[i];
    const int prec = precedence(n);
    switch (n.op) {
      case Op::number: return format_number(n.value);
      case Op::var: return "r";
      case Op::neg: return "-" + wrap(n.lhs, precedence(nodes_[n.lhs]) < 3);
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div: {
        const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? "*" : "/";
        return wrap(n.lhs, precedence(nodes_[n.lhs]) < prec) + sym +
               wrap(n.rhs, precedence(nodes_[n.rhs]) <= prec);
      }
      case Op::pow:
        return wrap(n.lhs, precedence(nodes_[n.lhs]) <= prec) + "^" +
               wrap(n.rhs, precedence(nodes_[n.rhs]) < prec);
      case Op::min: return "min(" + format_node(n.lhs) + ", " + format_node(n.rhs) + ")";
      case Op::max: return "max(" + format_node(n.lhs) + ", " + format_node(n.rhs) + ")";
      default: return std::string(function_name(n.op)) + "(" + format_node(n.lhs) + ")";
    }
  }

 public:
  static const char* function_name(Op op) {
    switch (op) {
      case Op::sinh: return "sinh";
      case Op::cosh: return "cosh";
      case Op::exp: return "exp";
      case Op::log: return "log";
      case Op::sqrt: return "sqrt";
      case Op::abs: return "abs";
      case Op::min: return "min";
      case Op::max: return "max";
      default: return "";
    }
  }

 private:
  friend class Parser;
  std::vector<Node> nodes_;
  int root_ = -1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  WeightExpr run() {
    if (text_.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ParseError("empty expression", 0, {"expression"});
    }
    WeightExpr e(0);
    out_ = &e;
    e.root_ = expression();
    skip_ws();
    if (pos_ < text_.size()) {
      syntax_error({"operator", "end of input"});
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void syntax_error(std::set<std::string> expected) {
    std::string got = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    std::string list;
    for (const auto& s : expected) list += (list.empty() ? "" : ", ") + s;
    throw ParseError("syntax error at offset " + std::to_string(pos_) + ": got " + got +
                         ", expected one of {" + list + "}",
                     pos_, std::move(expected));
  }

  void expect(char c) {
    if (!accept(c)) syntax_error({std::string("'") + c + "'"});
  }

  int make(Op op, int lhs, int rhs) {
    int idx = out_->push({op, 0.0, lhs, rhs});
    const auto& nodes = out_->nodes_;
    bool closed = nodes[lhs].op == Op::number && (rhs < 0 || nodes[rhs].op == Op::number);
    if (!closed) return idx;
    try {
      double v = out_->eval_node(idx, 0.0);
      if (std::isfinite(v)) {
        // Children stay in the pool unreferenced; harmless.
        out_->nodes_[idx] = {Op::number, v, -1, -1};
      }
    } catch (const EvalError&) {
      // Leave unfolded so the error surfaces at evaluation time.
    }
    return idx;
  }

  int expression() {
    int lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) {
      int a = unary();
      return make(Op::neg, a, -1);
    }
    return power();
  }

  int power() {
    int base = primary();
    if (accept('^')) {
      int expo = unary();
      return make(Op::pow, base, expo);
    }
    return base;
  }

  int primary() {
    skip_ws();
    if (pos_ >= text_.size()) syntax_error({"number", "r", "pi", "function", "'('"});
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      int e = expression();
      expect(')');
      return e;
    }
    syntax_error({"number", "r", "pi", "function", "'('"});
  }

  int number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      syntax_error({"digit"});
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || !std::isfinite(v)) {
      pos_ = start;
      syntax_error({"finite number"});
    }
    return out_->push({Op::number, v, -1, -1});
  }

  int identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    if (name == "r") return out_->push({Op::var, 0.0, -1, -1});
    if (name == "pi") return out_->push({Op::number, M_PI, -1, -1});

    static const std::pair<const char*, Op> unary_fns[] = {
        {"sinh", Op::sinh}, {"cosh", Op::cosh}, {"exp", Op::exp},
        {"log", Op::log},   {"sqrt", Op::sqrt}, {"abs", Op::abs}};
    for (const auto& [fn, op] : unary_fns) {
      if (name == fn) {
        expect('(');
        int a = expression();
        expect(')');
        return make(op, a, -1);
      }
    }
    if (name == "min" || name == "max") {
      expect('(');
      int a = expression();
      expect(',');
      int b = expression();
      expect(')');
      return make(name == "min" ? Op::min : Op::max, a, b);
    }
    throw UnknownIdentifierError(name, start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  WeightExpr* out_ = nullptr;
};

inline WeightExpr WeightExpr::parse(std::string_view text) { return Parser(text).run(); }

inline WeightExpr parse(std::string_view text) { return WeightExpr::parse(text); }

/// If e has the form r^a (or a literal constant, read as r^0), returns a.
inline std::optional<double> power_of_r(const WeightExpr& e) {
  const auto& root = e.root();
  if (root.op == Op::var) return 1.0;
  if (root.op == Op::number && root.value == 1.0) return 0.0;
  if (root.op == Op::pow && e.node(root.lhs).op == Op::var && e.node(root.rhs).op == Op::number) {
    return e.node(root.rhs).value;
  }
  return std::nullopt;
}

/// If e has the form sinh(r)^a (or sinh(r), or the literal 1), returns a.
inline std::optional<double> power_of_sinh_r(const WeightExpr& e) {
  auto is_sinh_r = [&](const WeightExpr::Node& n) {
    return n.op == Op::sinh && e.node(n.lhs).op == Op::var;
  };
  const auto& root = e.root();
  if (is_sinh_r(root)) return 1.0;
  if (root.op == Op::number && root.value == 1.0) return 0.0;
  if (root.op == Op::pow && is_sinh_r(e.node(root.lhs)) && e.node(root.rhs).op == Op::number) {
    return e.node(root.rhs).value;
  }
  return std::nullopt;
}

}  // namespace hardykit::wexpr
