#pragma once

#include <cstdint>

#include "ascertain/event_model.hpp"

namespace ascertain {

// Interim event tallies by ascertainment category. Category 1 events are
// verifiable from records alone, category 2 need participant confirmation and
// received it, category 3 were ruled out on confirmation. "_first" counts are
// first events per participant; "_total" counts include recurrences.
struct CategoryCounts {
  std::int64_t control_cat1_first = 0;
  std::int64_t control_cat2_first = 0;
  std::int64_t control_cat2_total = 0;
  std::int64_t control_cat3_total = 0;
  std::int64_t intervention_cat2_total = 0;
  std::int64_t intervention_cat3_total = 0;

  void validate() const;  // throws std::domain_error on negative counts
};

// Point estimate with delta-method variance and Wald interval.
struct IntervalEstimate {
  double estimate = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BiasEstimate {
  double rho_intervention = 0.0;  // cat2 share of cat2+3, intervention arm
  double rho_control = 0.0;       // cat2 share of cat2+3, control arm
  IntervalEstimate bias_ratio;          // B = rho_I / rho_C
  IntervalEstimate category2_fraction;  // P = control cat2 first / (cat1+cat2 first)
  IntervalEstimate inflation;           // k = 1 + P (B - 1)
  double ci_level = 0.95;
};

// Estimates the ascertainment-bias ratio B, the confirmation-dependent
// outcome fraction P, and the event-count inflation factor k from interim
// category counts, with delta-method variances and Wald intervals at
// ci_level. B compares category composition between arms and carries no
// information about the treatment effect itself. Throws
// degenerate_counts_error when a required denominator is zero and
// std::domain_error when rho_control = 0 (B undefined).
BiasEstimate estimate_bias(const CategoryCounts& counts, double ci_level = 0.95);

// BiasEstimate with implied point values and degenerate intervals; for
// scenario analysis where B and P are assumed rather than estimated.
BiasEstimate bias_from_parameters(double bias_ratio, double category2_fraction,
                                  double ci_level = 0.95);

// Expected spurious events among observed_events when counts are inflated by
// k: (1 - 1/k) * observed_events. Requires k > 0.
double excess_intervention_events(double observed_events, double inflation_k);

// Expected observed (bias-inflated) intervention first events:
// k times the true expected count at hazard ratio h_hyp.
double observed_intervention_events(double n_star, double h_hyp,
                                    const HazardPair& hazards,
                                    const StudyDesign& design,
                                    double inflation_k);

}  // namespace ascertain
