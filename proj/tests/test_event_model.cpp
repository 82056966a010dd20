#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ascertain/event_model.hpp"

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

// Independent path to the accrual factor: composite Simpson quadrature of the
// enrollment average (1/(mu T)) Int_0^{mu T} (1 - exp(-(z+g)(T-u))) du.
double q_factor_quadrature(double z, double gamma, const StudyDesign& design) {
  const double T = design.total_duration_months;
  const double window = design.recruitment_fraction * T;
  const auto integrand = [&](double u) {
    return 1.0 - std::exp(-(z + gamma) * (T - u));
  };
  const int panels = 4000;  // even
  const double h = window / panels;
  double sum = integrand(0.0) + integrand(window);
  for (int i = 1; i < panels; ++i)
    sum += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0 / window;
}

double events_quadrature(double n, double hazard_ratio, const HazardPair& hz,
                         const StudyDesign& design) {
  const double z = hazard_ratio * hz.outcome;
  return n * z / (z + hz.competing) * q_factor_quadrature(z, hz.competing, design);
}

}  // namespace

TEST_CASE("q_factor matches quadrature of the enrollment average") {
  const std::vector<double> hazards = {1e-5, 1e-4, 0.001, 0.00787, 0.01354,
                                       0.05, 0.2, 1.0};
  const std::vector<double> gammas = {0.0, 0.0022875, 0.01};
  const std::vector<double> mus = {0.25, 0.5, 0.75, 1.0};
  for (double mu : mus) {
    const StudyDesign design = make_design(40.0, mu);
    for (double z : hazards)
      for (double g : gammas) {
        const double direct = q_factor(z, g, design);
        const double integrated = q_factor_quadrature(z, g, design);
        CAPTURE(mu); CAPTURE(z); CAPTURE(g);
        CHECK(direct == doctest::Approx(integrated).epsilon(1e-10));
      }
  }
}

TEST_CASE("q_factor closed form at full-window enrollment") {
  // mu = 1: Q = 1 - (1 - exp(-x))/x with x = T(z+gamma).
  const StudyDesign design = make_design(40.0, 1.0);
  for (double z : {0.001, 0.0135, 0.08}) {
    const double x = design.total_duration_months * z;
    const double reference = 1.0 - (1.0 - std::exp(-x)) / x;
    CHECK(q_factor(z, 0.0, design) == doctest::Approx(reference).epsilon(1e-14));
  }
}

TEST_CASE("q_factor limiting behaviour") {
  const StudyDesign design = make_design();

  SUBCASE("tiny hazards use the linear limit") {
    const double z = 4e-13;
    const double g = 4e-13;
    const double expected = (1.0 - design.recruitment_fraction / 2.0) *
                            design.total_duration_months * (z + g);
    CHECK(q_factor(z, g, design) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("continuous across the small-hazard switch") {
    // near the switch the closed form loses ~1e-5 relative precision to
    // cancellation, which is the reason the series branch exists
    const double below = q_factor(0.99e-12, 0.0, design);
    const double above = q_factor(1.01e-12, 0.0, design);
    CHECK(std::abs(below / above - 0.99 / 1.01) < 1e-4);
  }

  SUBCASE("saturates at one for huge hazards without overflow") {
    const double q = q_factor(1e6, 0.0, design);
    CHECK(std::isfinite(q));
    CHECK(q == doctest::Approx(1.0).epsilon(1e-15));
    // the regime where exp(-x)*expm1(mu x) would be 0 * inf
    const double q2 = q_factor(200.0, 0.0, design);
    CHECK(std::isfinite(q2));
    CHECK(q2 == doctest::Approx(1.0).epsilon(1e-15));
    // large but not underflowing: strictly below one
    const double q3 = q_factor(0.5, 0.0, design);
    CHECK(q3 > 0.999);
    CHECK(q3 < 1.0);
  }

  SUBCASE("strictly increasing in the outcome hazard") {
    double previous = 0.0;
    for (double z = 1e-4; z < 1.0; z *= 1.7) {
      const double q = q_factor(z, 0.002, design);
      CHECK(q > previous);
      CHECK(q < 1.0);
      previous = q;
    }
  }

  SUBCASE("zero total hazard is rejected") {
    CHECK_THROWS_AS(q_factor(0.0, 0.0, design), std::domain_error);
    CHECK_THROWS_AS(q_factor(-0.1, 0.2, design), std::domain_error);
  }
}

TEST_CASE("expected_events matches quadrature across hazard ratios") {
  const StudyDesign design = make_design();
  const HazardPair hz{0.0135417564671724, 0.0022874588626980};
  for (double h : {0.5, 0.8, 1.0, 1.25}) {
    const double direct = expected_events(2500.0, h, hz, design);
    const double integrated = events_quadrature(2500.0, h, hz, design);
    CHECK(direct == doctest::Approx(integrated).epsilon(1e-10));
  }
}

TEST_CASE("expected_events splits linearly across event subtypes") {
  // When the outcome hazard is a sum of subtype hazards, each subtype's
  // expected count is its hazard share of the total, so subtype count ratios
  // equal hazard ratios at every horizon. This is what makes count-based
  // composition estimates horizon-free.
  const double l2 = 0.0058605080509192;
  const double l3 = 0.0141995708901717;
  const double gamma = 0.0022874588626980;
  for (double T : {12.0, 40.0, 90.0}) {
    const StudyDesign design = make_design(T, 0.5);
    const HazardPair total{l2 + l3, gamma};
    const double both = expected_events(1000.0, 1.0, total, design);
    const double share2 = l2 / (l2 + l3) * both;
    const double share3 = l3 / (l2 + l3) * both;
    CHECK(share2 / share3 == doctest::Approx(l2 / l3).epsilon(1e-13));
    CHECK(share2 + share3 == doctest::Approx(both).epsilon(1e-13));
  }
}

TEST_CASE("hazards_from_rates round-trips 12-month incidences") {
  // Forward map: r = lambda/(lambda+gamma) (1 - exp(-12(lambda+gamma))).
  const std::vector<HazardPair> cases = {
      {0.0135417564671724, 0.0022874588626980},
      {0.0078745696093260, 0.0022119577554287},
      {0.001, 0.0},
      {0.03, 0.03},
  };
  for (const HazardPair& hz : cases) {
    const double total = hz.outcome + hz.competing;
    const double cumulative = -std::expm1(-12.0 * total);
    CauseSpecificRates rates;
    rates.outcome_12mo = hz.outcome / total * cumulative;
    rates.death_12mo = hz.competing / total * cumulative;
    const HazardPair back = hazards_from_rates(rates);
    CHECK(back.outcome == doctest::Approx(hz.outcome).epsilon(1e-12));
    CHECK(back.competing == doctest::Approx(hz.competing).epsilon(1e-12));
  }
}

TEST_CASE("hazards_from_rates reference values") {
  CauseSpecificRates protocol{0.148, 0.025};
  const HazardPair hp = hazards_from_rates(protocol);
  CHECK(hp.outcome == doctest::Approx(0.0135417564671724).epsilon(1e-12));
  CHECK(hp.competing == doctest::Approx(0.0022874588626980).epsilon(1e-12));

  CauseSpecificRates revised{0.089, 0.025};
  const HazardPair hr = hazards_from_rates(revised);
  CHECK(hr.outcome == doctest::Approx(0.0078745696093260).epsilon(1e-12));
  CHECK(hr.competing == doctest::Approx(0.0022119577554287).epsilon(1e-12));

  CauseSpecificRates zero{0.0, 0.0};
  const HazardPair hz = hazards_from_rates(zero);
  CHECK(hz.outcome == 0.0);
  CHECK(hz.competing == 0.0);
}

TEST_CASE("hazards_from_rates rejects saturated incidence") {
  CauseSpecificRates bad{0.6, 0.4};
  CHECK_THROWS_AS(hazards_from_rates(bad), std::domain_error);
  CauseSpecificRates worse{0.9, 0.2};
  CHECK_THROWS_AS(hazards_from_rates(worse), std::domain_error);
}

TEST_CASE("reference accrual factor for the worked example") {
  const StudyDesign design = make_design();
  const double q = q_factor(0.0135417564671724, 0.0022874588626980, design);
  CHECK(q == doctest::Approx(0.3754375001705406).epsilon(1e-12));
}

TEST_CASE("design and input validation") {
  StudyDesign design = make_design();
  CHECK_NOTHROW(design.validate());

  SUBCASE("duration must be positive") {
    design.total_duration_months = 0.0;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
  }
  SUBCASE("recruitment fraction in (0,1]") {
    design.recruitment_fraction = 0.0;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
    design.recruitment_fraction = 1.0001;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
  }
  SUBCASE("alpha strictly inside (0,1)") {
    design.alpha = 0.0;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
    design.alpha = 1.0;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
  }
  SUBCASE("hypothesized ratio positive") {
    design.hypothesized_hazard_ratio = 0.0;
    CHECK_THROWS_AS(design.validate(), std::domain_error);
  }
  SUBCASE("negative hazards rejected") {
    HazardPair hz{-0.01, 0.002};
    CHECK_THROWS_AS(hz.validate(), std::domain_error);
  }
  SUBCASE("rates outside [0,1) rejected") {
    CauseSpecificRates rates{1.0, 0.0};
    CHECK_THROWS_AS(rates.validate(), std::domain_error);
    rates = {-0.1, 0.0};
    CHECK_THROWS_AS(rates.validate(), std::domain_error);
  }
}
