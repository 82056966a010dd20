#include "ascertain/event_model.hpp"

#include <cmath>
#include <stdexcept>

namespace ascertain {

namespace {

// Below this combined hazard (per month) the accrual factor switches to its
// limiting linear form to avoid 0/0 cancellation.
constexpr double kHazardFloor = 1e-12;

[[noreturn]] void fail(const char* message) { throw std::domain_error(message); }

}  // namespace

void StudyDesign::validate() const {
  if (!(total_duration_months > 0.0) || !std::isfinite(total_duration_months))
    fail("StudyDesign: total_duration_months must be positive");
  if (!(recruitment_fraction > 0.0 && recruitment_fraction <= 1.0))
    fail("StudyDesign: recruitment_fraction must lie in (0,1]");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail("StudyDesign: alpha must lie in (0,1)");
  if (!(hypothesized_hazard_ratio > 0.0) || !std::isfinite(hypothesized_hazard_ratio))
    fail("StudyDesign: hypothesized_hazard_ratio must be positive");
}

void HazardPair::validate() const {
  if (!(outcome >= 0.0) || !std::isfinite(outcome))
    fail("HazardPair: outcome hazard must be nonnegative");
  if (!(competing >= 0.0) || !std::isfinite(competing))
    fail("HazardPair: competing hazard must be nonnegative");
}

void CauseSpecificRates::validate() const {
  if (!(outcome_12mo >= 0.0) || !std::isfinite(outcome_12mo))
    fail("CauseSpecificRates: outcome_12mo must be nonnegative");
  if (!(death_12mo >= 0.0) || !std::isfinite(death_12mo))
    fail("CauseSpecificRates: death_12mo must be nonnegative");
  if (!(outcome_12mo + death_12mo < 1.0))
    fail("CauseSpecificRates: outcome_12mo + death_12mo must be below 1");
}

double q_factor(double z, double gamma, const StudyDesign& design) {
  design.validate();
  if (!(z >= 0.0) || !std::isfinite(z))
    fail("q_factor: outcome hazard must be nonnegative");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    fail("q_factor: competing hazard must be nonnegative");
  const double total = z + gamma;
  if (total == 0.0)
    fail("q_factor: combined hazard must be positive");

  const double t = design.total_duration_months;
  const double mu = design.recruitment_fraction;
  if (total < kHazardFloor) return (1.0 - 0.5 * mu) * t * total;

  // exp(-(1-mu)x) - exp(-x) == exp(-x) expm1(mu x); the right side is stable
  // where the left cancels (small mu x), the left where expm1 would overflow
  const double x = t * total;
  const double spread = (mu * x <= 1.0)
                            ? std::exp(-x) * std::expm1(mu * x)
                            : std::exp(-(1.0 - mu) * x) - std::exp(-x);
  return 1.0 - spread / (mu * x);
}

double expected_events(double n_star, double hazard_ratio,
                       const HazardPair& hazards, const StudyDesign& design) {
  hazards.validate();
  if (!(n_star >= 0.0) || !std::isfinite(n_star))
    fail("expected_events: n_star must be nonnegative");
  if (!(hazard_ratio > 0.0) || !std::isfinite(hazard_ratio))
    fail("expected_events: hazard_ratio must be positive");

  const double z = hazard_ratio * hazards.outcome;
  const double q = q_factor(z, hazards.competing, design);
  return n_star * (z / (z + hazards.competing)) * q;
}

HazardPair hazards_from_rates(const CauseSpecificRates& rates) {
  rates.validate();
  const double total = rates.outcome_12mo + rates.death_12mo;
  if (total == 0.0) return {0.0, 0.0};
  // combined monthly hazard from 12-month all-cause incidence; the
  // cause-specific split preserves gamma/lambda == d/r
  const double scale = -std::log1p(-total) / (12.0 * total);
  return {rates.outcome_12mo * scale, rates.death_12mo * scale};
}

}  // namespace ascertain
