#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <random>

#include "hardykit/wexpr.hpp"

using namespace hardykit::wexpr;
using Catch::Approx;

TEST_CASE("parse folds constant subtrees", "[wexpr]") {
  auto e = parse("r^-2");
  auto expected = WeightExpr::binary(Op::pow, WeightExpr::variable(), WeightExpr::number(-2.0));
  CHECK(e == expected);

  auto s = parse("sinh(r)^(1-3)");
  auto sinh_r = WeightExpr::unary(Op::sinh, WeightExpr::variable());
  CHECK(s == WeightExpr::binary(Op::pow, sinh_r, WeightExpr::number(-2.0)));

  CHECK(parse("2*pi*r").eval(1.0) == Approx(6.283185307179586).epsilon(1e-15));
}

TEST_CASE("precedence and associativity", "[wexpr]") {
  CHECK(parse("2^3^2").eval(0) == Approx(512.0));
  CHECK(parse("-2^2").eval(0) == Approx(-4.0));
  CHECK(parse("1 - 2 - 3").eval(0) == Approx(-4.0));
  CHECK(parse("8 / 4 / 2").eval(0) == Approx(1.0));
  CHECK(parse(" 1+2 * 3 ").eval(0) == Approx(7.0));
  CHECK(parse("min(r, 2) + max(r, 2)").eval(5.0) == Approx(7.0));
  CHECK(parse("abs(-r) + sqrt(r) + cosh(0) + log(exp(r))").eval(4.0) == Approx(4 + 2 + 1 + 4));
  CHECK(parse("1.5e2").eval(0) == Approx(150.0));
}

TEST_CASE("evaluation examples", "[wexpr]") {
  CHECK(parse("r^-2").eval(2.0) == Approx(0.25).epsilon(1e-15));
  CHECK(parse("sinh(r)").eval(0.0) == 0.0);
  // Independent value: exp(-1) to 30 digits.
  CHECK(parse("r^0.5 * exp(-r)").eval(1.0) == Approx(0.367879441171442321595523770161).epsilon(1e-15));
}

TEST_CASE("evaluation errors", "[wexpr]") {
  CHECK_THROWS_AS(parse("r^-1").eval(0.0), EvalError);
  CHECK_THROWS_AS(parse("log(r)").eval(0.0), EvalError);
  CHECK_THROWS_AS(parse("log(r - 2)").eval(1.0), EvalError);
  CHECK_THROWS_AS(parse("(r - 2)^0.5").eval(1.0), EvalError);
  CHECK_THROWS_AS(parse("1/(r-1)").eval(1.0), EvalError);
  CHECK(parse("(r - 2)^3").eval(1.0) == Approx(-1.0));
  try {
    parse("2 + log(r)").eval(-1.0);
    FAIL("expected EvalError");
  } catch (const EvalError& err) {
    CHECK(err.subexpression() == "log(r)");
    CHECK(err.r() == -1.0);
  }
}

TEST_CASE("parse errors carry offset and expectations", "[wexpr]") {
  try {
    parse("2 * (r + ");
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 9);
    CHECK(err.expected().count("'('") == 1);
  }
  try {
    parse("r r");
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.offset() == 2);
    CHECK(err.expected().count("end of input") == 1);
  }
  CHECK_THROWS_AS(parse("sinh r"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("   "), ParseError);
  try {
    parse("r + foo(r)");
    FAIL("expected UnknownIdentifierError");
  } catch (const UnknownIdentifierError& err) {
    CHECK(err.name() == "foo");
    CHECK(err.offset() == 4);
  }
  CHECK_THROWS_AS(parse("x"), UnknownIdentifierError);
}

TEST_CASE("log-scaled evaluation never overflows", "[wexpr]") {
  auto e = parse("sinh(r)^-3 * exp(2*r)");
  // log value = -3 log sinh(r) + 2r ~ -r + 3 log 2 for large r.
  CHECK(e.eval_log(1e6) == Approx(-1e6 + 3 * std::log(2.0)).epsilon(1e-14));
  CHECK(std::isinf(parse("sinh(r)").eval(1e6)));
  CHECK(parse("r^-2").eval_log(1e-200) == Approx(400 * std::log(10.0)).epsilon(1e-14));
  CHECK_THROWS_AS(parse("-r").eval_log(1.0), EvalError);
  CHECK(parse("0*r").eval_log(2.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("power of r matches exp(a log r)", "[wexpr]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(-6.0, 6.0), ur(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double a = ua(rng);
    const double r = std::exp(ur(rng));
    auto e = WeightExpr::binary(Op::pow, WeightExpr::variable(), WeightExpr::number(a));
    const double want = std::exp(a * std::log(r));
    CHECK(e.eval(r) == Approx(want).epsilon(4 * std::numeric_limits<double>::epsilon()));
  }
}

namespace {

// Random trees whose evaluation is defined for r in [0.5, 2].
WeightExpr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 11);
  std::uniform_real_distribution<double> lit(0.25, 4.0);
  int choice = depth <= 0 ? pick(rng) % 2 : pick(rng);
  switch (choice) {
    case 0: return WeightExpr::number(lit(rng));
    case 1: return WeightExpr::variable();
    case 2: return WeightExpr::binary(Op::add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return WeightExpr::binary(Op::sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return WeightExpr::binary(Op::mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: {
      auto den = WeightExpr::binary(Op::add, WeightExpr::number(lit(rng)),
                                    WeightExpr::unary(Op::exp, random_tree(rng, depth - 1)));
      return WeightExpr::binary(Op::div, random_tree(rng, depth - 1), den);
    }
    case 6: {
      auto base = WeightExpr::unary(Op::abs, random_tree(rng, depth - 1));
      auto shifted = WeightExpr::binary(Op::add, base, WeightExpr::number(lit(rng)));
      return WeightExpr::binary(Op::pow, shifted, WeightExpr::number(lit(rng) - 2.0));
    }
    case 7: return WeightExpr::unary(Op::neg, random_tree(rng, depth - 1));
    case 8: return WeightExpr::unary(Op::sinh, WeightExpr::unary(Op::sqrt, WeightExpr::unary(Op::abs, random_tree(rng, depth - 1))));
    case 9: {
      auto pos = WeightExpr::binary(Op::add, WeightExpr::unary(Op::abs, random_tree(rng, depth - 1)),
                                    WeightExpr::number(lit(rng)));
      return WeightExpr::unary(Op::log, pos);
    }
    case 10: return WeightExpr::binary(Op::min, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    default: return WeightExpr::binary(Op::max, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("format/parse round trip is exact", "[wexpr]") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> ur(0.5, 2.0);
  for (int i = 0; i < 1000; ++i) {
    WeightExpr tree = random_tree(rng, 5);
    const std::string text = tree.format();
    WeightExpr once = parse(text);
    WeightExpr twice = parse(once.format());
    INFO(text);
    REQUIRE(once == twice);
    const double r = ur(rng);
    double direct = 0.0;
    bool direct_ok = true;
    try {
      direct = tree.eval(r);
    } catch (const EvalError&) {
      direct_ok = false;
    }
    if (!direct_ok) {
      CHECK_THROWS_AS(once.eval(r), EvalError);
      continue;
    }
    const double reparsed = once.eval(r);
    if (std::isnan(direct)) {
      CHECK(std::isnan(reparsed));
    } else {
      CHECK(std::bit_cast<std::uint64_t>(direct) == std::bit_cast<std::uint64_t>(reparsed));
    }
  }
}

TEST_CASE("signed-log evaluation agrees with plain evaluation", "[wexpr]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ur(0.5, 2.0);
  int compared = 0;
  for (int i = 0; i < 500; ++i) {
    WeightExpr tree = random_tree(rng, 4);
    const double r = ur(rng);
    double v;
    try {
      v = tree.eval(r);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(v) || v == 0.0 || std::fabs(v) < 1e-100 || std::fabs(v) > 1e100) continue;
    SignedLog s = tree.eval_signed_log(r);
    CHECK(s.sign == (v > 0 ? 1 : -1));
    // Cancellation in sums limits agreement to a relative tolerance.
    CHECK(s.linear() == Approx(v).epsilon(1e-9).margin(1e-12));
    ++compared;
  }
  CHECK(compared > 200);
}

TEST_CASE("power-law extraction", "[wexpr]") {
  CHECK(power_of_r(parse("r^-2.5")).value() == -2.5);
  CHECK(power_of_r(parse("r")).value() == 1.0);
  CHECK(power_of_r(parse("1")).value() == 0.0);
  CHECK_FALSE(power_of_r(parse("2*r^3")).has_value());
  CHECK(power_of_sinh_r(parse("sinh(r)^(1-3)")).value() == -2.0);
  CHECK_FALSE(power_of_sinh_r(parse("sinh(2*r)^3")).has_value());
}
