#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ascertain/errors.hpp"
#include "ascertain/heff_solver.hpp"

using namespace ascertain;

namespace {

StudyDesign make_design(double total = 40.0, double mu = 0.5) {
  StudyDesign design;
  design.total_duration_months = total;
  design.recruitment_fraction = mu;
  design.alpha = 0.05;
  design.hypothesized_hazard_ratio = 0.8;
  return design;
}

const HazardPair kReferenceHazards{0.0135417564671724, 0.0022874588626980};
constexpr double kReferenceK = 1.0610101748209165;

double fraction(double z, double gamma, const StudyDesign& design) {
  return z / (z + gamma) * q_factor(z, gamma, design);
}

}  // namespace

TEST_CASE("worked-example root and series approximations") {
  const StudyDesign design = make_design();
  const HeffResult result =
      solve_h_eff(kReferenceK, 0.8, kReferenceHazards, design);

  CHECK(result.h_eff == doctest::Approx(0.8585110843925867).epsilon(1e-12));
  CHECK(result.first_order == doctest::Approx(0.6974956461921300).epsilon(1e-12));
  REQUIRE(result.second_order.has_value());
  CHECK(*result.second_order ==
        doctest::Approx(0.9002498340413706).epsilon(1e-12));
  CHECK(result.seed_used == HeffSeed::second_order);
  CHECK_FALSE(result.used_bisection);
  CHECK(result.iterations < 20);

  // the quadratic series lands closer to the root than the linear one
  const double err1 = std::fabs(result.first_order - result.h_eff);
  const double err2 = std::fabs(*result.second_order - result.h_eff);
  CHECK(err2 < err1);

  const double target =
      kReferenceK * fraction(0.8 * kReferenceHazards.outcome,
                             kReferenceHazards.competing, design);
  CHECK(std::fabs(result.residual) <= 1e-12 * target);
}

TEST_CASE("returned root satisfies the count identity across a grid") {
  int solved = 0;
  for (double t : {24.0, 40.0, 72.0})
    for (double mu : {0.3, 0.5, 1.0})
      for (double gamma : {0.0, 0.0023, 0.01})
        for (double lambda : {0.004, 0.0135, 0.05})
          for (double k : {0.85, 1.0, 1.061, 1.3})
            for (double h : {0.7, 0.8, 1.0, 1.2}) {
              const StudyDesign design = make_design(t, mu);
              const HazardPair hazards{lambda, gamma};
              const double rhs = k * fraction(h * lambda, gamma, design);
              const double supremum =
                  fraction(1e6 * (lambda + gamma), gamma, design);
              CAPTURE(t); CAPTURE(mu); CAPTURE(gamma);
              CAPTURE(lambda); CAPTURE(k); CAPTURE(h);
              if (rhs >= supremum) {
                // inflation beyond the attainable event fraction
                CHECK_THROWS_AS(solve_h_eff(k, h, hazards, design),
                                solver_error);
                continue;
              }
              const HeffResult result = solve_h_eff(k, h, hazards, design);
              const double lhs =
                  fraction(result.h_eff * lambda, gamma, design);
              CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
              CHECK(result.h_eff > 0.0);
              ++solved;
            }
  CHECK(solved >= 800);
}

TEST_CASE("no inflation keeps the hypothesized ratio") {
  const StudyDesign design = make_design();
  for (double h : {0.5, 0.8, 1.0, 1.6}) {
    const HeffResult result = solve_h_eff(1.0, h, kReferenceHazards, design);
    CHECK(result.h_eff == doctest::Approx(h).epsilon(1e-10));
  }
}

TEST_CASE("effective ratio moves monotonically with inflation") {
  const StudyDesign design = make_design();
  double previous = 0.0;
  for (double k : {0.7, 0.9, 1.0, 1.05, 1.2, 1.5, 2.0}) {
    const double h_eff = solve_h_eff(k, 0.8, kReferenceHazards, design).h_eff;
    CHECK(h_eff > previous);
    previous = h_eff;
  }
  // deflation pulls below the hypothesis, inflation pushes above
  CHECK(solve_h_eff(0.9, 0.8, kReferenceHazards, design).h_eff < 0.8);
  CHECK(solve_h_eff(1.1, 0.8, kReferenceHazards, design).h_eff > 0.8);
}

TEST_CASE("quadratic series beats linear on short-horizon grids") {
  // accuracy ordering holds where the series variable T(lambda+gamma) <= 1
  int compared = 0;
  for (double lambda : {0.002, 0.008, 0.0135, 0.02})
    for (double gamma : {0.0, 0.0023})
      for (double k : {0.95, 1.061, 1.15})
        for (double mu : {0.5, 1.0}) {
          const StudyDesign design = make_design(40.0, mu);
          if (40.0 * (lambda + gamma) > 1.0) continue;
          const HazardPair hazards{lambda, gamma};
          const HeffResult result = solve_h_eff(k, 0.8, hazards, design);
          if (!result.second_order.has_value()) continue;
          ++compared;
          const double err1 = std::fabs(result.first_order - result.h_eff);
          const double err2 = std::fabs(*result.second_order - result.h_eff);
          CAPTURE(lambda); CAPTURE(gamma); CAPTURE(k); CAPTURE(mu);
          CHECK(err2 <= err1 + 1e-12);
        }
  CHECK(compared >= 10);
}

TEST_CASE("bisection fallback agrees with Newton") {
  const StudyDesign design = make_design();
  SolverSettings newton_only;
  const HeffResult via_newton =
      solve_h_eff(kReferenceK, 0.8, kReferenceHazards, design, newton_only);
  REQUIRE_FALSE(via_newton.used_bisection);

  SolverSettings starved;
  starved.max_iterations = 1;  // Newton cannot converge in one step
  const HeffResult via_bisection =
      solve_h_eff(kReferenceK, 0.8, kReferenceHazards, design, starved);
  CHECK(via_bisection.used_bisection);
  CHECK(via_bisection.h_eff ==
        doctest::Approx(via_newton.h_eff).epsilon(1e-9));
}

TEST_CASE("seed selection order") {
  const StudyDesign design = make_design();

  SUBCASE("quadratic root preferred when defined") {
    const HeffResult r = solve_h_eff(1.061, 0.8, kReferenceHazards, design);
    CHECK(r.seed_used == HeffSeed::second_order);
  }

  SUBCASE("series vertex when the quadratic root is undefined") {
    // large inflation pushes the target past the series discriminant
    const HeffResult r = solve_h_eff(3.3, 0.8, kReferenceHazards, design);
    CHECK_FALSE(r.second_order.has_value());
    CHECK(r.seed_used == HeffSeed::theta_bound);
    // root still satisfies the identity
    const double lhs = fraction(r.h_eff * kReferenceHazards.outcome,
                                kReferenceHazards.competing, design);
    const double rhs = 3.3 * fraction(0.8 * kReferenceHazards.outcome,
                                      kReferenceHazards.competing, design);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }

  SUBCASE("linear seed when the vertex is negative") {
    // competing hazard dominating the design scale turns the vertex negative
    const HazardPair heavy{0.01, 0.08};
    const HeffResult r = solve_h_eff(1.1, 0.8, heavy, design);
    CHECK(r.seed_used == HeffSeed::first_order);
    CHECK(r.h_eff > 0.0);
  }
}

TEST_CASE("unattainable inflation reports no solution with diagnostics") {
  const StudyDesign design = make_design();
  try {
    solve_h_eff(4.0, 0.8, kReferenceHazards, design);
    FAIL("expected solver_error");
  } catch (const solver_error& e) {
    CHECK(e.failure_kind() == solver_error::kind::no_solution);
    const std::string what = e.what();
    CHECK(what.find("no solution") != std::string::npos);
    CHECK(what.find("k = 4") != std::string::npos);
    CHECK(what.find("h_hyp = 0.8") != std::string::npos);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const StudyDesign design = make_design();
  CHECK_THROWS_AS(solve_h_eff(0.0, 0.8, kReferenceHazards, design),
                  std::domain_error);
  CHECK_THROWS_AS(solve_h_eff(-1.0, 0.8, kReferenceHazards, design),
                  std::domain_error);
  CHECK_THROWS_AS(solve_h_eff(1.1, 0.0, kReferenceHazards, design),
                  std::domain_error);
  CHECK_THROWS_AS(solve_h_eff(1.1, 0.8, HazardPair{0.0, 0.002}, design),
                  std::domain_error);

  SolverSettings bad;
  bad.rel_tolerance = 0.0;
  CHECK_THROWS_AS(solve_h_eff(1.1, 0.8, kReferenceHazards, design, bad),
                  std::domain_error);
  bad = {};
  bad.bracket_expansion = 1.0;
  CHECK_THROWS_AS(solve_h_eff(1.1, 0.8, kReferenceHazards, design, bad),
                  std::domain_error);
}

TEST_CASE("series expansion of the accrual factor") {
  SUBCASE("first order is the linear accrual term") {
    for (double mu : {0.3, 0.5, 1.0})
      for (double x : {0.05, 0.2, 0.5})
        CHECK(qbar_taylor(x, mu, 1) ==
              doctest::Approx((1.0 - 0.5 * mu) * x).epsilon(1e-14));
  }

  SUBCASE("order twelve reproduces the closed form on small arguments") {
    for (double mu : {0.3, 0.5, 1.0}) {
      const StudyDesign design = make_design(40.0, mu);
      for (double x : {0.01, 0.1, 0.3, 0.5}) {
        const double z = x / 40.0;
        const double exact = q_factor(z, 0.0, design);
        CHECK(qbar_taylor(x, mu, 12) ==
              doctest::Approx(exact).epsilon(1e-9));
      }
    }
  }

  SUBCASE("truncation error shrinks with order") {
    const StudyDesign design = make_design(40.0, 0.5);
    const double exact = q_factor(0.5 / 40.0, 0.0, design);
    const double err4 = std::fabs(qbar_taylor(0.5, 0.5, 4) - exact);
    const double err8 = std::fabs(qbar_taylor(0.5, 0.5, 8) - exact);
    CHECK(err8 < err4);
  }

  SUBCASE("domain limits") {
    CHECK_THROWS_AS(qbar_taylor(0.1, 0.0, 4), std::domain_error);
    CHECK_THROWS_AS(qbar_taylor(0.1, 1.2, 4), std::domain_error);
    CHECK_THROWS_AS(qbar_taylor(0.1, 0.5, 0), std::domain_error);
    CHECK_THROWS_AS(qbar_taylor(0.1, 0.5, 21), std::domain_error);
  }
}
