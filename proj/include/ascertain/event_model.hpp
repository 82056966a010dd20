#pragma once

namespace ascertain {

// Fixed design of a two-arm time-to-first-event study with uniform staggered
// enrollment over the first recruitment_fraction of total duration.
struct StudyDesign {
  double total_duration_months = 0.0;   // T > 0, months from first enrollment
  double recruitment_fraction = 0.0;    // mu in (0,1]; enrollment uniform on [0, mu*T]
  double alpha = 0.05;                  // two-sided test level, in (0,1)
  double hypothesized_hazard_ratio = 1.0;  // design effect size, > 0

  void validate() const;  // throws std::domain_error naming the bad field
};

// Constant cause-specific hazards, per month.
struct HazardPair {
  double outcome = 0.0;    // event-of-interest hazard (lambda), >= 0
  double competing = 0.0;  // competing-risk hazard (gamma), >= 0

  void validate() const;
};

// Cumulative 12-month cause-specific incidence under competing risks.
struct CauseSpecificRates {
  double outcome_12mo = 0.0;  // r in [0,1)
  double death_12mo = 0.0;    // d in [0,1), with r + d < 1

  void validate() const;
};

// Fraction of the eventual event yield already accrued by study end, given
// outcome hazard z and competing hazard gamma:
//   Q = 1 - [exp(-(1-mu)T(z+gamma)) - exp(-T(z+gamma))] / (mu T (z+gamma)).
// Strictly in (0,1); below z+gamma = 1e-12/month the limiting form
// (1 - mu/2) T (z+gamma) is returned. Throws std::domain_error when
// z + gamma == 0 or either hazard is negative.
double q_factor(double z, double gamma, const StudyDesign& design);

// Expected first outcome events among n_star participants whose outcome
// hazard is hazard_ratio * hazards.outcome:
//   E = n_star * h*lambda / (h*lambda + gamma) * Q(h*lambda).
// Control arm uses hazard_ratio = 1. Real-valued, not rounded.
double expected_events(double n_star, double hazard_ratio,
                       const HazardPair& hazards, const StudyDesign& design);

// Constant monthly hazards reproducing the given 12-month cumulative
// incidences under competing risks:
//   lambda = -(r/(r+d)) ln(1-r-d)/12,  gamma = -(d/(r+d)) ln(1-r-d)/12.
// Both zero when r = d = 0.
HazardPair hazards_from_rates(const CauseSpecificRates& rates);

}  // namespace ascertain
