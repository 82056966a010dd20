#include "ascertain/power.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ascertain/errors.hpp"
#include "ascertain/normal.hpp"

namespace ascertain {

namespace {

// Re-throws component failures with the pipeline stage prepended, preserving
// the exception type the CLI exit codes depend on.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const solver_error& e) {
    throw solver_error(e.failure_kind(), std::string(name) + ": " + e.what());
  } catch (const degenerate_counts_error& e) {
    throw degenerate_counts_error(std::string(name) + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string(name) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(name) + ": " + e.what());
  }
}

}  // namespace

void SampleSizeInputs::validate() const {
  if (!(n_control > 0.0) || !std::isfinite(n_control))
    throw std::domain_error("SampleSizeInputs: n_control must be positive");
  if (!(n_intervention > 0.0) || !std::isfinite(n_intervention))
    throw std::domain_error("SampleSizeInputs: n_intervention must be positive");
  if (!(withdrawal_rate_per_year >= 0.0 && withdrawal_rate_per_year < 1.0))
    throw std::domain_error(
        "SampleSizeInputs: withdrawal_rate_per_year must lie in [0,1)");
  if (!(variance_inflation_protocol > 0.0))
    throw std::domain_error(
        "SampleSizeInputs: variance_inflation_protocol must be positive");
  if (!(variance_inflation_revised > 0.0))
    throw std::domain_error(
        "SampleSizeInputs: variance_inflation_revised must be positive");
  if (!(size_adjustment > 0.0) || !std::isfinite(size_adjustment))
    throw std::domain_error("SampleSizeInputs: size_adjustment must be positive");
}

double schoenfeld_power(double total_events, double hazard_ratio, double alpha) {
  if (!(total_events >= 0.0) || !std::isfinite(total_events))
    throw std::domain_error("schoenfeld_power: total_events must be nonnegative");
  if (!(hazard_ratio > 0.0) || !std::isfinite(hazard_ratio))
    throw std::domain_error("schoenfeld_power: hazard_ratio must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("schoenfeld_power: alpha must lie in (0,1)");

  // folding h above 1 onto 1/h keeps the h <-> 1/h symmetry exact
  const double h = hazard_ratio > 1.0 ? 1.0 / hazard_ratio : hazard_ratio;
  const double effect = -std::log(h);
  return normal_cdf(0.5 * std::sqrt(total_events) * effect -
                    normal_quantile(1.0 - 0.5 * alpha));
}

EffectiveSampleSizes effective_sample_size(const SampleSizeInputs& inputs,
                                           const StudyDesign& design) {
  inputs.validate();
  design.validate();

  const double loss =
      1.0 - std::pow(1.0 - inputs.withdrawal_rate_per_year,
                     design.total_duration_months / 12.0);
  const double retained = (1.0 - loss) * inputs.size_adjustment;

  EffectiveSampleSizes sizes;
  sizes.loss_fraction = loss;
  sizes.control_protocol =
      inputs.n_control * retained / inputs.variance_inflation_protocol;
  sizes.intervention_protocol =
      inputs.n_intervention * retained / inputs.variance_inflation_protocol;
  sizes.control_revised =
      inputs.n_control * retained / inputs.variance_inflation_revised;
  sizes.intervention_revised =
      inputs.n_intervention * retained / inputs.variance_inflation_revised;
  return sizes;
}

double overall_confirmation(const AdjudicationProfile& profile) {
  const auto& props = profile.type_proportions;
  const auto& fracs = profile.confirm_fractions;
  if (props.empty())
    throw std::invalid_argument("overall_confirmation: profile is empty");
  if (props.size() != fracs.size())
    throw std::invalid_argument(
        "overall_confirmation: proportion and confirmation lists differ in length");

  double proportion_sum = 0.0;
  double confirmed = 0.0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].first != fracs[i].first)
      throw std::invalid_argument(
          "overall_confirmation: event-type labels mismatch at '" +
          props[i].first + "' vs '" + fracs[i].first + "'");
    const double p = props[i].second;
    const double a = fracs[i].second;
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("overall_confirmation: proportion for '" +
                                  props[i].first + "' must lie in [0,1]");
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("overall_confirmation: confirmation for '" +
                                  fracs[i].first + "' must lie in [0,1]");
    proportion_sum += p;
    confirmed += p * a;
  }
  if (std::fabs(proportion_sum - 1.0) > 1e-9)
    throw std::invalid_argument(
        "overall_confirmation: type proportions must sum to 1");
  return confirmed;
}

PowerProjection project(const SampleSizeInputs& sample,
                        const CauseSpecificRates& rates_protocol,
                        const std::optional<CauseSpecificRates>& rates_revised,
                        const BiasEstimate& bias,
                        const std::optional<AdjudicationProfile>& adjudication_protocol,
                        const std::optional<AdjudicationProfile>& adjudication_revised,
                        const StudyDesign& design,
                        const SolverSettings& solver) {
  design.validate();
  const double p = bias.category2_fraction.estimate;
  const double k = bias.inflation.estimate;
  if (!(k > 0.0))
    throw std::domain_error("project: inflation factor k must be positive");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("project: category-2 fraction must lie in [0,1]");

  PowerProjection out;
  out.hazards_protocol = stage("project[protocol hazards]",
                               [&] { return hazards_from_rates(rates_protocol); });
  out.hazards_revised =
      rates_revised ? stage("project[revised hazards]",
                            [&] { return hazards_from_rates(*rates_revised); })
                    : out.hazards_protocol;

  out.sizes = stage("project[sample sizes]",
                    [&] { return effective_sample_size(sample, design); });

  out.confirmation_protocol =
      adjudication_protocol
          ? stage("project[protocol adjudication]",
                  [&] { return overall_confirmation(*adjudication_protocol); })
          : 1.0;
  out.confirmation_revised =
      adjudication_revised
          ? stage("project[revised adjudication]",
                  [&] { return overall_confirmation(*adjudication_revised); })
          : 1.0;

  const double h_hyp = design.hypothesized_hazard_ratio;
  out.control_events_self_reported =
      stage("project[control events]", [&] {
        return expected_events(out.sizes.control_protocol, 1.0,
                               out.hazards_protocol, design);
      });
  out.intervention_true_events_self_reported =
      stage("project[intervention events]", [&] {
        return expected_events(out.sizes.intervention_protocol, h_hyp,
                               out.hazards_protocol, design);
      });
  out.intervention_observed_events_self_reported =
      k * out.intervention_true_events_self_reported;

  // revised definition: own rates, or the confirmation-independent (1-P)
  // share of the protocol outcome
  const double revised_scale = rates_revised ? 1.0 : 1.0 - p;
  out.control_events_revised_self_reported =
      revised_scale * stage("project[revised control events]", [&] {
        return expected_events(out.sizes.control_revised, 1.0,
                               out.hazards_revised, design);
      });
  out.intervention_events_revised_self_reported =
      revised_scale * stage("project[revised intervention events]", [&] {
        return expected_events(out.sizes.intervention_revised, h_hyp,
                               out.hazards_revised, design);
      });

  // adjudication scales counts after bias inflation
  out.control_events =
      out.confirmation_protocol * out.control_events_self_reported;
  out.intervention_true_events =
      out.confirmation_protocol * out.intervention_true_events_self_reported;
  out.intervention_observed_events = k * out.intervention_true_events;
  out.excess_events = stage("project[excess events]", [&] {
    return excess_intervention_events(out.intervention_observed_events, k);
  });
  out.control_events_revised =
      out.confirmation_revised * out.control_events_revised_self_reported;
  out.intervention_events_revised =
      out.confirmation_revised * out.intervention_events_revised_self_reported;

  out.solver = stage("project[effective hazard ratio]", [&] {
    return solve_h_eff(k, h_hyp, out.hazards_protocol, design, solver);
  });
  out.h_eff = out.solver.h_eff;
  out.direction_reversed = (h_hyp < 1.0 && out.h_eff > 1.0) ||
                           (h_hyp > 1.0 && out.h_eff < 1.0);

  out.power_protocol = stage("project[protocol power]", [&] {
    return schoenfeld_power(
        out.control_events + out.intervention_observed_events, out.h_eff,
        design.alpha);
  });
  out.power_revised = stage("project[revised power]", [&] {
    return schoenfeld_power(
        out.control_events_revised + out.intervention_events_revised, h_hyp,
        design.alpha);
  });
  return out;
}

}  // namespace ascertain
