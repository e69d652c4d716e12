#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hardykit/functionals.hpp"

using namespace hardykit;
using Catch::Approx;
using wexpr::parse;

namespace {

WeightPair weights(const char* u, const char* v) { return {parse(u), parse(v)}; }

std::string power(double a) {
  std::ostringstream os;
  os.precision(17);
  os << "r^(" << a << ")";
  return os.str();
}

// Closed-form D1 for power weights on a homogeneous group at the balance point.
double homogeneous_d1(double Q, double sigma, double alpha, double beta, double p, double q) {
  const double pc = p / (p - 1);
  const double g = beta * (1 - pc) + Q;
  return std::pow(sigma, 1 / q + 1 / pc) / (std::pow(std::fabs(alpha + Q), 1 / q) * std::pow(g, 1 / pc));
}

}  // namespace

TEST_CASE("U and V examples", "[functionals]") {
  const auto e = Exponents::make(2, 2);
  auto u = big_U(Space::half_line(), weights("r^-2", "1"), 1.0);
  CHECK(u.value == Approx(1.0).epsilon(1e-10));
  auto u2 = big_U(Space::homogeneous_group(3, 1), weights("r^-4", "1"), 2.0);
  CHECK(u2.value == Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(big_U(Space::half_line(), weights("r^-1", "1"), 1.0), DivergenceError);

  auto v = big_V(Space::half_line(), weights("1", "1"), e, 3.0);
  CHECK(v.value == Approx(3.0).epsilon(1e-10));
  auto v2 = big_V(Space::homogeneous_group(2, 1), weights("1", "r"), e, 1.0);
  CHECK(v2.value == Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(big_V(Space::homogeneous_group(2, 1), weights("1", "r^4"), e, 1.0), DivergenceError);
}

TEST_CASE("classical Hardy inequality", "[functionals]") {
  const auto e = Exponents::make(2, 2);
  const auto w = weights("r^-2", "1");
  HardyFunctionals hf(Space::half_line(), w, e);
  auto d1 = hf.d(1);
  REQUIRE(d1.finite());
  CHECK(std::fabs(d1.value - 1.0) <= 1e-6);
  auto br = constant_bracket(d1, e);
  REQUIRE(br);
  CHECK(br->lo == Approx(1.0).epsilon(1e-9));
  CHECK(br->hi == Approx(2.0).epsilon(1e-9));

  // D2..D5 all equal (2s)^{-1/2} here (closed form, checked with mpmath).
  CHECK_THROWS_AS(hf.d(3), ProvisoError);
  FunctionalOptions lax;
  lax.enforce_proviso = false;
  HardyFunctionals all(Space::half_line(), w, e, lax);
  for (double s : {0.3, 1.0, 2.0}) {
    for (int k = 2; k <= 5; ++k) {
      auto d = all.d(k, s);
      INFO("k=" << k << " s=" << s);
      REQUIRE(d.finite());
      CHECK(d.value == Approx(1 / std::sqrt(2 * s)).epsilon(1e-8));
      CHECK(d.proviso_violated == (k == 3 || k == 5));
    }
  }
}

TEST_CASE("exponential weights against quadrature oracles", "[functionals]") {
  // u = e^{-r}, v = e^{r} on the half-line: U = e^{-r}, V = 1 - e^{-r}; both
  // weights are integrable so every condition is available. Suprema of
  // D3/D5 are limits at r -> inf / r -> 0 (1/2 and 1/sqrt(2 + 2s)).
  HardyFunctionals hf(Space::half_line(), weights("exp(-r)", "exp(r)"), Exponents::make(2, 2));
  CHECK(hf.d(1).value == Approx(0.5).epsilon(1e-9));
  CHECK(hf.d(1).argmax_r == Approx(std::log(2.0)).epsilon(1e-4));
  CHECK(hf.d(2, 1.0).value == Approx(0.42888194248035339824).epsilon(1e-8));
  CHECK(hf.d(3, 1.0).value == Approx(0.5).epsilon(1e-8));
  CHECK(hf.d(4, 1.0).value == Approx(0.42888194248035339824).epsilon(1e-8));
  CHECK(hf.d(5, 1.0).value == Approx(0.5).epsilon(2e-6));
  CHECK(hf.d(2, 0.3).value == Approx(0.54631051142934243186).epsilon(1e-8));
  CHECK(hf.d(3, 0.3).value == Approx(1 / std::sqrt(2.6)).epsilon(1e-8));
  CHECK(hf.d(4, 0.3).value == Approx(0.54631051142934243186).epsilon(1e-8));
  CHECK(hf.d(5, 0.3).value == Approx(1 / std::sqrt(2.6)).epsilon(2e-6));
}

TEST_CASE("hyperbolic plane against a quadrature oracle", "[functionals]") {
  // U = 2 pi (coth r - 1), V = 2 pi (cosh r - 1); sup from mpmath.
  auto d1 = d_condition(1, Space::hyperbolic(2), weights("sinh(r)^-3", "1"), Exponents::make(2, 2));
  REQUIRE(d1.finite());
  CHECK(d1.value == Approx(2.6025805691371460171).epsilon(1e-9));
  CHECK(d1.argmax_r == Approx(0.88137359).epsilon(1e-4));
}

TEST_CASE("homogeneous power weights match the closed form", "[functionals]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uQ(1, 5), up(1.2, 4), ug(0.2, 3), us(0.5, 3);
  for (int t = 0; t < 6; ++t) {
    const double Q = uQ(rng), sigma = us(rng), p = up(rng), q = p + 0.5 * up(rng);
    const double pc = p / (p - 1);
    const double g = ug(rng);                 // beta (1 - p') + Q
    const double beta = (g - Q) / (1 - pc);
    const double alpha = -q * g / pc - Q;      // balance: (alpha + Q)/q + g/p' = 0
    auto d1 = d_condition(1, Space::homogeneous_group(Q, sigma), weights(power(alpha).c_str(), power(beta).c_str()),
                          Exponents::make(p, q));
    INFO("Q=" << Q << " p=" << p << " q=" << q << " alpha=" << alpha << " beta=" << beta);
    REQUIRE(d1.finite());
    CHECK(d1.value == Approx(homogeneous_d1(Q, sigma, alpha, beta, p, q)).epsilon(1e-5));

    // Off the balance in either direction the supremum is infinite.
    for (double shift : {0.1, -0.1}) {
      const double a2 = alpha + q * shift;
      auto off = d_condition(1, Space::homogeneous_group(Q, sigma), weights(power(a2).c_str(), power(beta).c_str()),
                             Exponents::make(p, q));
      CHECK_FALSE(off.finite());
    }
  }
}

TEST_CASE("conjugate functionals", "[functionals]") {
  const auto e = Exponents::make(2, 2);
  auto d1 = d_star_condition(1, Space::half_line(), weights("1", "r^2"), e);
  REQUIRE(d1.finite());
  CHECK(std::fabs(d1.value - 1.0) <= 1e-6);

  auto bad = d_star_condition(1, Space::half_line(), weights("r^-2", "1"), e);
  CHECK_FALSE(bad.finite());

  Exponents half = e;
  half.s = 0.5;
  auto d2 = d_star_condition(2, Space::half_line(), weights("1", "r^2"), half);
  REQUIRE(d2.finite());
  // The A-relations at alpha = beta = 1/2, s = 1/2 bracket D2* by D1*.
  auto rel = general_factors(0.5, 0.5, 0.5)[0];
  CHECK(d2.value >= rel.lower * d1.value * (1 - 1e-6));
  CHECK(d2.value <= rel.upper * d1.value * (1 + 1e-6));
}

TEST_CASE("general family", "[functionals]") {
  GeneralPair gp{parse("r^-2"), parse("1"), 1.0, 1.0, 1.0};
  auto a1 = a_quantity(1, Space::half_line(), gp);
  CHECK(a1.value == Approx(1.0).epsilon(1e-9));

  // s = beta makes the inner power vanish, so A2 = A1.
  GeneralPair sb{parse("exp(-r) * (1 + r)"), parse("1 / (1 + r^2)"), 0.7, 0.4, 0.4};
  GeneralFunctionals gf(Space::euclidean(3), sb);
  CHECK(gf.a(2).value == Approx(gf.a(1).value).epsilon(1e-9));

  // A1 under the substitution f = u, g = v^{1-p'} is D1.
  const auto w = weights("exp(-r) * r^-1", "1 + r^2");
  const auto e = Exponents::make(1.7, 3.1);
  auto d1 = d_condition(1, Space::euclidean(2), w, e);
  auto sub = a_quantity(1, Space::euclidean(2), general_pair_of(w, e));
  REQUIRE(d1.finite());
  CHECK(std::fabs(d1.value - sub.value) <= d1.error_estimate + sub.error_estimate + 1e-15);
}

TEST_CASE("makes-sense violation", "[functionals]") {
  // G vanishes on (0, 1), where k = 2 takes G to a negative power.
  GeneralPair gp{parse("exp(-r)"), parse("max(r - 1, 0)"), 1.0, 0.5, 1.0};
  CHECK_THROWS_AS(a_quantity(2, Space::half_line(), gp), MakesSenseError);
  CHECK(a_quantity(1, Space::half_line(), gp).finite());
}

TEST_CASE("constant bracket and factor tables", "[functionals]") {
  FunctionalValue one;
  one.value = 1.0;
  auto b = constant_bracket(one, Exponents::make(2, 2));
  CHECK(b->lo == 1.0);
  CHECK(b->hi == Approx(2.0).epsilon(1e-15));
  b = constant_bracket(one, Exponents::make(2, 4));
  CHECK(b->hi == Approx(std::pow(2.0, 0.75)).epsilon(1e-15));
  FunctionalValue zero;
  b = constant_bracket(zero, Exponents::make(2, 2));
  CHECK(b->lo == 0.0);
  CHECK(b->hi == 0.0);
  CHECK_FALSE(constant_bracket(FunctionalValue::divergent("x"), Exponents::make(2, 2)));

  auto rows = equivalence_factors(Exponents::make(2, 2, 1));
  REQUIRE(rows.size() == 8);
  CHECK(1 / rows[0].lower == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(rows[1].upper == Approx(std::sqrt(1.5)).epsilon(1e-15));
  auto eq = general_factors(0.8, 0.8, 0.8);
  CHECK(eq[0].lower == 1.0);
  CHECK(eq[0].upper == 1.0);
  CHECK_THROWS_AS(Exponents::make(2, 1.5), DomainError);
  CHECK_THROWS_AS(Exponents::make(1, 2), DomainError);
  CHECK_THROWS_AS(Exponents::make(2, 2, 0), DomainError);
}

TEST_CASE("scaling covariance", "[functionals]") {
  const auto e = Exponents::make(1.5, 2.5);
  const Space sp = Space::euclidean(3);
  auto base = d_condition(1, sp, weights("exp(-r) / r", "1 + r"), e);
  auto su = d_condition(1, sp, weights("7 * exp(-r) / r", "1 + r"), e);
  auto sv = d_condition(1, sp, weights("exp(-r) / r", "7 * (1 + r)"), e);
  REQUIRE(base.finite());
  CHECK(su.value == Approx(base.value * std::pow(7.0, 1 / e.q)).epsilon(1e-8));
  CHECK(sv.value == Approx(base.value * std::pow(7.0, -1 / e.p)).epsilon(1e-8));
}

TEST_CASE("factor relations hold on random admissible instances", "[functionals]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uQ(1, 5), up(1.2, 4), ug(0.2, 3);
  const double ss[] = {0.3, 1.0, 2.0};
  for (int t = 0; t < 4; ++t) {
    const double Q = uQ(rng), p = up(rng), q = p + up(rng) - 1;
    const double pc = p / (p - 1), g = ug(rng);
    const double beta = (g - Q) / (1 - pc), alpha = -q * g / pc - Q;
    auto e = Exponents::make(p, q, ss[t % 3]);
    auto rep = equivalence_audit(Space::homogeneous_group(Q, 1.0), weights(power(alpha).c_str(), power(beta).c_str()), e);
    for (const auto& row : rep.rows) {
      INFO(row.relation.x << " vs " << row.relation.y << " slack " << row.slack << " " << row.note);
      CHECK(row.status == "pass");
    }
  }
}
