#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "ascertain/errors.hpp"
#include "ascertain/power.hpp"

using namespace ascertain;

namespace {

StudyDesign reference_design() {
  StudyDesign design;
  design.total_duration_months = 40.0;
  design.recruitment_fraction = 0.5;
  design.alpha = 0.05;
  design.hypothesized_hazard_ratio = 0.8;
  return design;
}

SampleSizeInputs reference_sample() {
  SampleSizeInputs sample;
  sample.n_control = 2649.0;
  sample.n_intervention = 2802.0;
  sample.withdrawal_rate_per_year = 0.022;
  sample.variance_inflation_protocol = 1.0;
  sample.variance_inflation_revised = 1.0475;
  sample.size_adjustment = 1.0;
  return sample;
}

AdjudicationProfile protocol_adjudication() {
  AdjudicationProfile profile;
  profile.type_proportions = {{"fracture", 0.4516806722689076},
                              {"hospital", 0.1155462184873949},
                              {"attention", 0.4327731092436975}};
  profile.confirm_fractions = {{"fracture", 0.966},
                               {"hospital", 0.667},
                               {"attention", 0.771}};
  return profile;
}

AdjudicationProfile revised_adjudication() {
  AdjudicationProfile profile;
  profile.type_proportions = {{"fracture", 0.7892976588628763},
                              {"hospital", 0.2107023411371237}};
  profile.confirm_fractions = {{"fracture", 0.966}, {"hospital", 0.667}};
  return profile;
}

BiasEstimate reference_bias() {
  CategoryCounts counts;
  counts.control_cat1_first = 270;
  counts.control_cat2_first = 206;
  counts.control_cat2_total = 253;
  counts.control_cat3_total = 613;
  counts.intervention_cat2_total = 263;
  counts.intervention_cat3_total = 526;
  return estimate_bias(counts, 0.95);
}

}  // namespace

TEST_CASE("log-rank power approximation") {
  SUBCASE("reference operating points") {
    CHECK(schoenfeld_power(1293.6621600342725, 0.8585110843925867, 0.05) ==
          doctest::Approx(0.7833509879888165).epsilon(1e-12));
    CHECK(schoenfeld_power(802.6768435538057, 0.8, 0.05) ==
          doctest::Approx(0.8851316896196048).epsilon(1e-12));
  }

  SUBCASE("exactly symmetric in h and 1/h") {
    for (double h : {0.5, 0.8, 0.93})
      for (double events : {100.0, 800.0}) {
        const double below = schoenfeld_power(events, h, 0.05);
        const double above = schoenfeld_power(events, 1.0 / h, 0.05);
        CHECK(below == above);  // bitwise, via folding
      }
  }

  SUBCASE("null effect or no events give the one-sided level") {
    CHECK(schoenfeld_power(500.0, 1.0, 0.05) ==
          doctest::Approx(0.025).epsilon(1e-12));
    CHECK(schoenfeld_power(0.0, 0.8, 0.05) ==
          doctest::Approx(0.025).epsilon(1e-12));
    CHECK(schoenfeld_power(500.0, 1.0, 0.10) ==
          doctest::Approx(0.05).epsilon(1e-12));
  }

  SUBCASE("half power when the effect sits at the critical value") {
    const double effect = -std::log(0.8);
    const double z = 1.9599639845400545;
    const double events = (2.0 * z / effect) * (2.0 * z / effect);
    CHECK(schoenfeld_power(events, 0.8, 0.05) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("monotone in events and effect size") {
    CHECK(schoenfeld_power(400.0, 0.8, 0.05) <
          schoenfeld_power(800.0, 0.8, 0.05));
    CHECK(schoenfeld_power(400.0, 0.85, 0.05) <
          schoenfeld_power(400.0, 0.8, 0.05));
  }

  SUBCASE("invalid input") {
    CHECK_THROWS_AS(schoenfeld_power(-1.0, 0.8, 0.05), std::domain_error);
    CHECK_THROWS_AS(schoenfeld_power(100.0, 0.0, 0.05), std::domain_error);
    CHECK_THROWS_AS(schoenfeld_power(100.0, 0.8, 0.0), std::domain_error);
  }
}

TEST_CASE("withdrawal-adjusted analysis sample sizes") {
  const EffectiveSampleSizes sizes =
      effective_sample_size(reference_sample(), reference_design());
  CHECK(sizes.loss_fraction == doctest::Approx(0.0714694812215700).epsilon(1e-12));
  CHECK(sizes.control_protocol ==
        doctest::Approx(2459.6773442440612).epsilon(1e-12));
  CHECK(sizes.intervention_protocol ==
        doctest::Approx(2601.7425136171610).epsilon(1e-12));
  CHECK(sizes.control_revised ==
        doctest::Approx(2348.1406627628269).epsilon(1e-12));
  CHECK(sizes.intervention_revised ==
        doctest::Approx(2483.7637361500344).epsilon(1e-12));

  SUBCASE("no withdrawal keeps enrollment, variance inflation deflates") {
    SampleSizeInputs sample = reference_sample();
    sample.withdrawal_rate_per_year = 0.0;
    const EffectiveSampleSizes plain =
        effective_sample_size(sample, reference_design());
    CHECK(plain.loss_fraction == 0.0);
    CHECK(plain.control_protocol == doctest::Approx(2649.0));
    CHECK(plain.control_revised ==
          doctest::Approx(2649.0 / 1.0475).epsilon(1e-14));
  }

  SUBCASE("size adjustment scales every arm linearly") {
    SampleSizeInputs sample = reference_sample();
    sample.size_adjustment = 1.0475;
    const EffectiveSampleSizes scaled =
        effective_sample_size(sample, reference_design());
    CHECK(scaled.control_protocol ==
          doctest::Approx(sizes.control_protocol * 1.0475).epsilon(1e-14));
    CHECK(scaled.intervention_revised ==
          doctest::Approx(sizes.intervention_revised * 1.0475).epsilon(1e-14));
  }

  SUBCASE("input validation") {
    SampleSizeInputs sample = reference_sample();
    sample.n_control = 0.0;
    CHECK_THROWS_AS(effective_sample_size(sample, reference_design()),
                    std::domain_error);
    sample = reference_sample();
    sample.withdrawal_rate_per_year = 1.0;
    CHECK_THROWS_AS(effective_sample_size(sample, reference_design()),
                    std::domain_error);
    sample = reference_sample();
    sample.variance_inflation_revised = 0.0;
    CHECK_THROWS_AS(effective_sample_size(sample, reference_design()),
                    std::domain_error);
  }
}

TEST_CASE("overall adjudication fraction") {
  CHECK(overall_confirmation(protocol_adjudication()) ==
        doctest::Approx(0.8470609243697479).epsilon(1e-12));
  CHECK(overall_confirmation(revised_adjudication()) ==
        doctest::Approx(0.9030000000000000).epsilon(1e-12));

  SUBCASE("rejects malformed profiles") {
    AdjudicationProfile profile;
    CHECK_THROWS_AS(overall_confirmation(profile), std::invalid_argument);

    profile = protocol_adjudication();
    profile.confirm_fractions.pop_back();
    CHECK_THROWS_AS(overall_confirmation(profile), std::invalid_argument);

    profile = protocol_adjudication();
    profile.confirm_fractions[1].first = "misnamed";
    CHECK_THROWS_AS(overall_confirmation(profile), std::invalid_argument);

    profile = protocol_adjudication();
    profile.type_proportions[0].second = 0.9;  // sum now exceeds 1
    CHECK_THROWS_AS(overall_confirmation(profile), std::invalid_argument);

    profile = protocol_adjudication();
    profile.confirm_fractions[0].second = 1.2;
    CHECK_THROWS_AS(overall_confirmation(profile), std::invalid_argument);
  }
}

TEST_CASE("full projection reproduces the worked example") {
  CauseSpecificRates protocol{0.148, 0.025};
  CauseSpecificRates revised{0.089, 0.025};
  const PowerProjection out =
      project(reference_sample(), protocol, revised, reference_bias(),
              protocol_adjudication(), revised_adjudication(),
              reference_design());

  CHECK(out.sizes.control_protocol ==
        doctest::Approx(2459.6773442440612).epsilon(1e-12));
  CHECK(out.hazards_protocol.outcome ==
        doctest::Approx(0.0135417564671724).epsilon(1e-12));
  CHECK(out.hazards_protocol.competing ==
        doctest::Approx(0.0022874588626980).epsilon(1e-12));
  CHECK(out.hazards_revised.outcome ==
        doctest::Approx(0.0078745696093260).epsilon(1e-12));
  CHECK(out.hazards_revised.competing ==
        doctest::Approx(0.0022119577554287).epsilon(1e-12));

  CHECK(out.confirmation_protocol ==
        doctest::Approx(0.8470609243697479).epsilon(1e-12));
  CHECK(out.confirmation_revised == doctest::Approx(0.903).epsilon(1e-12));

  CHECK(out.control_events_self_reported ==
        doctest::Approx(790.0078426339161).epsilon(1e-12));
  CHECK(out.intervention_true_events_self_reported ==
        doctest::Approx(694.8363334429186).epsilon(1e-12));
  CHECK(out.intervention_observed_events_self_reported ==
        doctest::Approx(737.2284196181957).epsilon(1e-12));
  CHECK(out.control_events_revised_self_reported ==
        doctest::Approx(476.3541421347233).epsilon(1e-12));
  CHECK(out.intervention_events_revised_self_reported ==
        doctest::Approx(412.5460168395908).epsilon(1e-12));

  CHECK(out.control_events == doctest::Approx(669.1847734408353).epsilon(1e-12));
  CHECK(out.intervention_true_events ==
        doctest::Approx(588.5687068918450).epsilon(1e-12));
  CHECK(out.intervention_observed_events ==
        doctest::Approx(624.4773865934372).epsilon(1e-12));
  CHECK(out.excess_events ==
        doctest::Approx(35.908679701592231).epsilon(1e-12));
  CHECK(out.control_events_revised ==
        doctest::Approx(430.1477903476552).epsilon(1e-12));
  CHECK(out.intervention_events_revised ==
        doctest::Approx(372.5290532061505).epsilon(1e-12));

  // observed = k * true holds as an exact floating-point relation
  const double k = reference_bias().inflation.estimate;
  CHECK(out.intervention_observed_events == k * out.intervention_true_events);

  CHECK(out.h_eff == doctest::Approx(0.8585110843925867).epsilon(1e-12));
  CHECK_FALSE(out.direction_reversed);
  CHECK_FALSE(out.solver.used_bisection);

  CHECK(out.power_protocol ==
        doctest::Approx(0.7833509879888165).epsilon(1e-12));
  CHECK(out.power_revised ==
        doctest::Approx(0.8851316896196048).epsilon(1e-12));
}

TEST_CASE("projection is deterministic") {
  CauseSpecificRates protocol{0.148, 0.025};
  CauseSpecificRates revised{0.089, 0.025};
  const PowerProjection a =
      project(reference_sample(), protocol, revised, reference_bias(),
              protocol_adjudication(), revised_adjudication(),
              reference_design());
  const PowerProjection b =
      project(reference_sample(), protocol, revised, reference_bias(),
              protocol_adjudication(), revised_adjudication(),
              reference_design());
  CHECK(a.h_eff == b.h_eff);
  CHECK(a.power_protocol == b.power_protocol);
  CHECK(a.power_revised == b.power_revised);
  CHECK(a.excess_events == b.excess_events);
}

TEST_CASE("revised definition as the confirmation-independent subset") {
  // without separate revised rates, the revised counts are (1-P) times the
  // protocol counts computed at the same sizes and hazards
  SampleSizeInputs sample = reference_sample();
  sample.variance_inflation_revised = 1.0;  // align the arm sizes
  CauseSpecificRates protocol{0.148, 0.025};
  const BiasEstimate bias = reference_bias();
  const PowerProjection out =
      project(sample, protocol, std::nullopt, bias, std::nullopt, std::nullopt,
              reference_design());

  const double p = bias.category2_fraction.estimate;
  CHECK(out.hazards_revised.outcome == out.hazards_protocol.outcome);
  CHECK(out.control_events_revised == (1.0 - p) * out.control_events);
  CHECK(out.intervention_events_revised ==
        (1.0 - p) * out.intervention_true_events);
}

TEST_CASE("strong inflation of a near-null effect flips its direction") {
  SampleSizeInputs sample = reference_sample();
  CauseSpecificRates protocol{0.148, 0.025};
  StudyDesign design = reference_design();
  design.hypothesized_hazard_ratio = 0.98;
  const BiasEstimate bias = bias_from_parameters(1.30, 0.432);
  const PowerProjection out =
      project(sample, protocol, std::nullopt, bias, std::nullopt, std::nullopt,
              design);
  CHECK(out.h_eff > 1.0);
  CHECK(out.direction_reversed);
  // power is computed against the folded effect and stays a probability
  CHECK(out.power_protocol > 0.0);
  CHECK(out.power_protocol < 1.0);
}

TEST_CASE("pipeline failures carry the stage and keep their type") {
  SampleSizeInputs sample = reference_sample();
  CauseSpecificRates protocol{0.148, 0.025};
  const StudyDesign design = reference_design();

  SUBCASE("impossible inflation surfaces as a solver failure") {
    const BiasEstimate bias = bias_from_parameters(10.0, 1.0);
    try {
      project(sample, protocol, std::nullopt, bias, std::nullopt, std::nullopt,
              design);
      FAIL("expected solver_error");
    } catch (const solver_error& e) {
      CHECK(e.failure_kind() == solver_error::kind::no_solution);
      CHECK(std::string(e.what()).find("project[effective hazard ratio]") == 0);
    }
  }

  SUBCASE("saturated incidence surfaces as a domain error") {
    CauseSpecificRates bad{0.9, 0.2};
    try {
      project(sample, bad, std::nullopt, bias_from_parameters(1.0, 0.4),
              std::nullopt, std::nullopt, design);
      FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("project[protocol hazards]") == 0);
    }
  }

  SUBCASE("malformed adjudication surfaces as invalid_argument") {
    AdjudicationProfile profile = protocol_adjudication();
    profile.type_proportions[0].second = 0.9;
    try {
      project(sample, protocol, std::nullopt, bias_from_parameters(1.0, 0.4),
              profile, std::nullopt, design);
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("project[protocol adjudication]") == 0);
    }
  }
}
