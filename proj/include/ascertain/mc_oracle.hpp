#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "ascertain/event_model.hpp"

namespace ascertain {

// Generating process for one synthetic trial: per participant, uniform
// enrollment on [0, mu*T], competing death and withdrawal clocks, and a
// Poisson stream of recurrent outcome events split across three
// ascertainment categories in proportion to their hazards. In the
// intervention arm every category hazard is scaled by true_hazard_ratio, and
// each category-3 event is independently relabeled category 2 with
// probability relabel_cat3_to_cat2 at observation time (event times are
// never moved); the reverse relabeling is also available. Control-arm labels
// are never touched.
struct SimulationConfig {
  int n_per_arm = 0;
  std::array<double, 3> category_hazards{};  // per month, control arm
  double death_hazard = 0.0;                 // per month
  double true_hazard_ratio = 1.0;
  double relabel_cat3_to_cat2 = 0.0;  // per-event probability, intervention arm
  double relabel_cat2_to_cat3 = 0.0;
  StudyDesign design;
  double withdrawal_rate_per_year = 0.0;  // annual dropout, converted to a hazard
  bool recurrent_events = true;  // false: category tallies use first events only
  int replications = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // across replications; NaN when replications == 1
};

// Per-category and per-definition tallies averaged over replications, the
// count-based estimators, log-rank rejection rates at design.alpha, and
// relabeling invariant counters.
struct SimulationSummary {
  int replications = 0;

  std::array<MeanSe, 3> control_first_by_category;  // first event of any category
  MeanSe control_outcome_first;  // first category-1/2 event per participant
  MeanSe control_revised_first;  // first category-1 event
  std::array<MeanSe, 3> control_total_by_category;

  std::array<MeanSe, 3> intervention_first_true;
  std::array<MeanSe, 3> intervention_first_observed;
  MeanSe intervention_outcome_first_true;
  MeanSe intervention_outcome_first_observed;
  MeanSe intervention_revised_first;
  std::array<MeanSe, 3> intervention_total_true;
  std::array<MeanSe, 3> intervention_total_observed;

  MeanSe bias_ratio_hat;          // category-composition ratio between arms
  MeanSe category2_fraction_hat;  // control first-outcome category-2 share
  MeanSe inflation_hat;           // 1 + P_hat (B_hat - 1)
  long estimable_replications = 0;  // reps where all estimator denominators > 0

  MeanSe reject_protocol;  // log-rank on first observed category-1/2 events
  MeanSe reject_revised;   // log-rank on first category-1 events

  long conservation_violations = 0;  // relabeling changed a cat-2+3 total
  long category1_violations = 0;     // relabeling touched a category-1 count
};

enum class OutcomeDefinition { protocol, revised };

// Runs the full simulation. threads is a concurrency hint (0 = hardware);
// summaries are bit-identical for a given seed regardless of thread count.
// When replication_dump is non-null, writes one CSV row of raw tallies per
// replication for audit.
SimulationSummary simulate(const SimulationConfig& config, int threads = 0,
                           std::ostream* replication_dump = nullptr);

// Rejection fraction of the log-rank test under the chosen outcome
// definition, with binomial standard error.
MeanSe empirical_power(const SimulationConfig& config, OutcomeDefinition definition,
                       int threads = 0);

// Relabeling probability that makes the category-composition bias ratio
// equal target_b: s = (target_b - 1) * lambda2 / lambda3.
double relabel_for_bias_ratio(double target_b,
                              const std::array<double, 3>& category_hazards);

// Hazard of the observed intervention first-outcome process,
// H * (lambda1 + (1-m) lambda2 + s lambda3); exact because per-event
// relabeling thins/augments the category Poisson streams independently.
double observed_outcome_hazard(const SimulationConfig& config);

}  // namespace ascertain
