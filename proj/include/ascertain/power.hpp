#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ascertain/bias.hpp"
#include "ascertain/event_model.hpp"
#include "ascertain/heff_solver.hpp"

namespace ascertain {

// Enrollment targets and attrition/variance adjustments shared by both
// outcome definitions.
struct SampleSizeInputs {
  double n_control = 0.0;       // enrolled, > 0
  double n_intervention = 0.0;  // enrolled, > 0
  double withdrawal_rate_per_year = 0.0;      // w in [0,1)
  double variance_inflation_protocol = 1.0;   // V >= 1, protocol definition
  double variance_inflation_revised = 1.0;    // V >= 1, revised definition
  double size_adjustment = 1.0;  // extra multiplicative factor on retained N, > 0

  void validate() const;
};

struct EffectiveSampleSizes {
  double loss_fraction = 0.0;  // W = 1 - (1-w)^(T/12)
  double control_protocol = 0.0;
  double intervention_protocol = 0.0;
  double control_revised = 0.0;
  double intervention_revised = 0.0;
};

// Event-type mix and per-type confirmation fractions for an adjudication
// stage. The two lists must carry identical labels in the same order;
// proportions must sum to 1 within 1e-9.
struct AdjudicationProfile {
  std::vector<std::pair<std::string, double>> type_proportions;
  std::vector<std::pair<std::string, double>> confirm_fractions;
};

// Projected trial outcome under both definitions. All event counts are
// expectations (real-valued). Fields ending in _self_reported are the counts
// before adjudication scaling.
struct PowerProjection {
  EffectiveSampleSizes sizes;
  HazardPair hazards_protocol;
  HazardPair hazards_revised;

  double confirmation_protocol = 1.0;  // overall adjudication fraction A
  double confirmation_revised = 1.0;

  double control_events_self_reported = 0.0;
  double intervention_true_events_self_reported = 0.0;
  double intervention_observed_events_self_reported = 0.0;
  double control_events_revised_self_reported = 0.0;
  double intervention_events_revised_self_reported = 0.0;

  double control_events = 0.0;
  double intervention_true_events = 0.0;
  double intervention_observed_events = 0.0;  // = inflation_k * true events
  double excess_events = 0.0;                 // spurious share of observed
  double control_events_revised = 0.0;
  double intervention_events_revised = 0.0;

  HeffResult solver;
  double h_eff = 0.0;
  bool direction_reversed = false;  // h_eff on the other side of 1 from h_hyp

  double power_protocol = 0.0;
  double power_revised = 0.0;
};

// Two-sided log-rank power approximation with total_events expected events
// and true hazard ratio h:  Phi( sqrt(total_events)/2 * |ln h| - z_{1-alpha/2} ).
// Symmetric under h <-> 1/h.
double schoenfeld_power(double total_events, double hazard_ratio, double alpha);

// Withdrawal-adjusted, variance-deflated analysis sample sizes per arm and
// definition: N* = N (1-W) * size_adjustment / V.
EffectiveSampleSizes effective_sample_size(const SampleSizeInputs& inputs,
                                           const StudyDesign& design);

// Overall confirmed fraction A = sum_t P_t A_t. Throws std::invalid_argument
// on label mismatch, proportions not summing to 1 (1e-9), or values outside
// [0,1].
double overall_confirmation(const AdjudicationProfile& profile);

// Full projection pipeline: hazards from rates, effective sample sizes,
// expected events per arm and definition, bias inflation of the intervention
// count, optional adjudication scaling (applied after inflation), effective
// hazard ratio, and projected power under both definitions. The revised
// definition either has its own rates or, when rates_revised is absent, is
// the confirmation-dependent-free subset: expected counts scaled by (1 - P)
// with the protocol hazards. Component errors propagate with the pipeline
// stage prepended to the message.
PowerProjection project(const SampleSizeInputs& sample,
                        const CauseSpecificRates& rates_protocol,
                        const std::optional<CauseSpecificRates>& rates_revised,
                        const BiasEstimate& bias,
                        const std::optional<AdjudicationProfile>& adjudication_protocol,
                        const std::optional<AdjudicationProfile>& adjudication_revised,
                        const StudyDesign& design,
                        const SolverSettings& solver = {});

}  // namespace ascertain
