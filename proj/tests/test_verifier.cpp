#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "hardykit/admissibility.hpp"
#include "hardykit/verifier.hpp"

using namespace hardykit;
using Catch::Approx;
using wexpr::WeightExpr;

namespace {

WeightPair pair(const char* u, const char* v) { return {WeightExpr::parse(u), WeightExpr::parse(v)}; }

const Exponents two = Exponents::make(2, 2);

}  // namespace

TEST_CASE("cutoff trial on the classical Hardy weights", "[verifier]") {
  const auto w = pair("r^-2", "1");
  auto rep = hardy_quotient(Space::half_line(), w, two, TrialFunction::proof_cutoff(1.0));
  CHECK_FALSE(rep.violated);
  CHECK(rep.lhs == Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(rep.rhs == Approx(1.0).epsilon(1e-9));
  CHECK(rep.quotient == Approx(std::sqrt(2.0)).epsilon(1e-9));

  auto power = hardy_quotient(Space::half_line(), w, two,
                              TrialFunction::expression(WeightExpr::parse("r^-0.4"), 0.0, 1.0));
  CHECK(power.quotient > 0.0);
  CHECK(power.quotient <= 2.0);

  CHECK_THROWS_AS(hardy_quotient(Space::half_line(), w, two, TrialFunction::expression(WeightExpr::parse("0"))),
                  DegenerateTrialError);
}

TEST_CASE("conjugate trial examples", "[verifier]") {
  const auto trial = TrialFunction::expression(WeightExpr::parse("r^-2"), 1.0);
  auto rep = conjugate_quotient(Space::half_line(), pair("1", "r^2"), two, trial);
  CHECK_FALSE(rep.violated);
  CHECK(rep.quotient == Approx(std::sqrt(2.0)).epsilon(1e-9));

  auto bad = conjugate_quotient(Space::half_line(), pair("r", "r^2"), two, trial);
  CHECK(bad.violated);
  CHECK(std::isinf(bad.quotient));

  CHECK_THROWS_AS(conjugate_quotient(Space::half_line(), pair("1", "r^2"), two,
                                     TrialFunction::expression(WeightExpr::parse("0"))),
                  DegenerateTrialError);
}

TEST_CASE("cutoff quotient dominates the D1 profile pointwise", "[verifier][property]") {
  const Space sp = Space::homogeneous_group(3.0, 2.0);
  const Exponents e = Exponents::make(2.0, 3.0);
  // alpha + Q = -1 and beta solves the balance equation
  const double Q = 3.0, alpha = -4.0, pc = e.p_conj();
  const double g = -(alpha + Q) * pc / e.q;
  const double beta = (g - Q) / (1.0 - pc);
  REQUIRE(check_homogeneous(Q, 2.0, e.p, e.q, alpha, beta).admissible);
  const WeightPair wb = power_weights(alpha, beta);
  HardyFunctionals hf(sp, wb, e);
  for (double t : {1e-3, 0.1, 1.0, 17.0, 1e4}) {
    const auto rep = hardy_quotient(sp, wb, e, TrialFunction::proof_cutoff(t));
    const double profile = std::pow(hf.U().value(t), 1.0 / e.q) * std::pow(hf.V().value(t), 1.0 / pc);
    CHECK(rep.quotient >= profile * (1 - 1e-8));
  }
}

TEST_CASE("lower bound for the classical constant", "[verifier]") {
  const auto w = pair("r^-2", "1");
  auto lb = lower_bound_C(Space::half_line(), w, two);
  REQUIRE(lb.finite());
  CHECK(lb.c_lower >= 1.0 - 1e-8);
  CHECK(lb.c_lower <= 2.0);
  // quotient(t) = sqrt(2) for every t: the sweep agrees with the direct trial
  CHECK(lb.c_lower == Approx(std::sqrt(2.0)).epsilon(1e-8));

  FunctionalOptions fine;
  fine.tol = fine.tol.tightened(10.0);
  auto lb2 = lower_bound_C(Space::half_line(), w, two, fine);
  CHECK(std::fabs(lb2.c_lower - lb.c_lower) <= 1e-6);

  auto rep = bracket_check(Space::half_line(), w, two);
  CHECK(rep.passed());
  REQUIRE(rep.bracket);
  CHECK(rep.bracket->lo == Approx(1.0).epsilon(1e-6));
  CHECK(rep.bracket->hi == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("lower bound on balanced homogeneous weights", "[verifier]") {
  for (double Q : {1.0, 2.5, 4.0}) {
    const Exponents e = Exponents::make(1.5, 2.5);
    const double alpha = -Q - 0.7, pc = e.p_conj();
    const double beta = (-(alpha + Q) * pc / e.q - Q) / (1.0 - pc);
    const Verdict v = check_homogeneous(Q, 1.3, e.p, e.q, alpha, beta);
    REQUIRE(v.admissible);
    auto lb = lower_bound_C(Space::homogeneous_group(Q, 1.3), power_weights(alpha, beta), e);
    REQUIRE(lb.finite());
    CHECK(lb.c_lower >= v.constant_interval->lo * (1 - 1e-6));
    CHECK(lb.c_lower <= v.constant_interval->hi * (1 + 1e-6));
  }
}

TEST_CASE("bracket check on hyperbolic and inadmissible instances", "[verifier]") {
  auto hyp = bracket_check(Space::hyperbolic(2), sinh_power_weights(-2.0, 0.0), two,
                           {}, {TrialFunction::proof_cutoff(0.5), TrialFunction::proof_cutoff(3.0)});
  CHECK(hyp.d1.finite());
  CHECK(hyp.passed());

  auto bad = bracket_check(Space::half_line(), pair("r^-1.5", "1"), two);
  CHECK_FALSE(bad.d1.finite());
  CHECK_FALSE(bad.lower.finite());
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.checks.size() == 2);
  CHECK(bad.checks[1].pass);  // growth of the cutoff quotients is observed
  CHECK_FALSE(bad.note.empty());

  auto conj = conjugate_bracket_check(Space::half_line(), pair("1", "r^2"), two,
                                      {}, {TrialFunction::expression(WeightExpr::parse("r^-2"), 1.0)});
  CHECK(conj.d1.finite());
  CHECK(conj.passed());
  auto clb = conjugate_lower_bound_C(Space::half_line(), pair("1", "r^2"), two);
  REQUIRE(clb.finite());
  CHECK(clb.c_lower >= conj.d1.value * (1 - 1e-8));
}

TEST_CASE("trial quotients stay below the upper bracket", "[verifier][property]") {
  const Exponents e = Exponents::make(2.0, 3.0);
  const WeightPair w = pair("exp(-r)", "exp(r)");
  HardyFunctionals hf(Space::euclidean(2), w, e);
  const auto d1 = hf.d(1);
  REQUIRE(d1.finite());
  const double upper = constant_bracket(d1, e)->hi;
  for (const char* f : {"1", "exp(-r)", "r*exp(-2*r)", "1/(1+r^3)", "exp(-r)*r^-0.5"}) {
    for (double hi : {1.0, 5.0, std::numeric_limits<double>::infinity()}) {
      const auto trial = TrialFunction::expression(WeightExpr::parse(f), 0.0, hi);
      INFO(f << " on (0," << hi << ")");
      if (std::isinf(hi) && (f[0] == '1')) {
        // |f|^2 e^r is not integrable: no admissible trial
        CHECK_THROWS_AS(hardy_quotient(Space::euclidean(2), w, e, trial), DomainError);
        continue;
      }
      const auto rep = hardy_quotient(Space::euclidean(2), w, e, trial);
      CHECK_FALSE(rep.violated);
      CHECK(rep.quotient <= upper * (1 + 1e-8));
    }
  }
}
