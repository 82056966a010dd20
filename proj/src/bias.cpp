#include "ascertain/bias.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "ascertain/errors.hpp"
#include "ascertain/normal.hpp"

namespace ascertain {

namespace {

IntervalEstimate wald_interval(double estimate, double variance, double z) {
  const double half_width = z * std::sqrt(variance);
  return {estimate, variance, estimate - half_width, estimate + half_width};
}

void check_ci_level(double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw std::domain_error("ci_level must lie strictly in (0,1)");
}

}  // namespace

void CategoryCounts::validate() const {
  const std::int64_t all[] = {control_cat1_first,       control_cat2_first,
                              control_cat2_total,       control_cat3_total,
                              intervention_cat2_total,  intervention_cat3_total};
  for (std::int64_t c : all)
    if (c < 0) throw std::domain_error("CategoryCounts: counts must be nonnegative");
}

BiasEstimate estimate_bias(const CategoryCounts& counts, double ci_level) {
  counts.validate();
  check_ci_level(ci_level);

  const double control_pool =
      static_cast<double>(counts.control_cat2_total + counts.control_cat3_total);
  const double intervention_pool = static_cast<double>(
      counts.intervention_cat2_total + counts.intervention_cat3_total);
  const double first_pool =
      static_cast<double>(counts.control_cat1_first + counts.control_cat2_first);

  if (control_pool == 0.0)
    throw degenerate_counts_error(
        "estimate_bias: control category-2+3 event total is zero");
  if (intervention_pool == 0.0)
    throw degenerate_counts_error(
        "estimate_bias: intervention category-2+3 event total is zero");
  if (first_pool == 0.0)
    throw degenerate_counts_error(
        "estimate_bias: control category-1+2 first-event total is zero");

  const double rho_c = counts.control_cat2_total / control_pool;
  const double rho_i = counts.intervention_cat2_total / intervention_pool;
  if (rho_c == 0.0)
    throw std::domain_error(
        "estimate_bias: no control category-2 events, bias ratio undefined");

  // binomial-proportion variances of the category compositions
  const double var_rho_c = rho_c * (1.0 - rho_c) / control_pool;
  const double var_rho_i = rho_i * (1.0 - rho_i) / intervention_pool;

  const double b = rho_i / rho_c;
  // delta-method B^2 (var_i/rho_i^2 + var_c/rho_c^2), written to stay finite
  // at rho_i == 0
  const double rho_c2 = rho_c * rho_c;
  const double var_b = var_rho_i / rho_c2 + rho_i * rho_i * var_rho_c / (rho_c2 * rho_c2);

  const double p = counts.control_cat2_first / first_pool;
  const double var_p = p * (1.0 - p) / first_pool;

  const double k = 1.0 + p * (b - 1.0);
  // independent-snapshot delta method; no covariance term
  const double var_k = (b - 1.0) * (b - 1.0) * var_p + p * p * var_b;
  assert(k >= 0.0);

  const double z = normal_quantile(1.0 - 0.5 * (1.0 - ci_level));

  BiasEstimate estimate;
  estimate.rho_intervention = rho_i;
  estimate.rho_control = rho_c;
  estimate.bias_ratio = wald_interval(b, var_b, z);
  estimate.category2_fraction = wald_interval(p, var_p, z);
  estimate.inflation = wald_interval(k, var_k, z);
  estimate.ci_level = ci_level;
  return estimate;
}

BiasEstimate bias_from_parameters(double bias_ratio, double category2_fraction,
                                  double ci_level) {
  if (!(bias_ratio > 0.0))
    throw std::domain_error("bias_from_parameters: bias_ratio must be positive");
  if (!(category2_fraction >= 0.0 && category2_fraction <= 1.0))
    throw std::domain_error(
        "bias_from_parameters: category2_fraction must lie in [0,1]");
  check_ci_level(ci_level);

  const double k = 1.0 + category2_fraction * (bias_ratio - 1.0);
  BiasEstimate estimate;
  estimate.rho_intervention = 0.0;
  estimate.rho_control = 0.0;
  estimate.bias_ratio = {bias_ratio, 0.0, bias_ratio, bias_ratio};
  estimate.category2_fraction = {category2_fraction, 0.0, category2_fraction,
                                 category2_fraction};
  estimate.inflation = {k, 0.0, k, k};
  estimate.ci_level = ci_level;
  return estimate;
}

double excess_intervention_events(double observed_events, double inflation_k) {
  if (!(inflation_k > 0.0))
    throw std::domain_error("excess_intervention_events: k must be positive");
  if (!(observed_events >= 0.0))
    throw std::domain_error(
        "excess_intervention_events: observed_events must be nonnegative");
  return (1.0 - 1.0 / inflation_k) * observed_events;
}

double observed_intervention_events(double n_star, double h_hyp,
                                    const HazardPair& hazards,
                                    const StudyDesign& design,
                                    double inflation_k) {
  if (!(inflation_k > 0.0))
    throw std::domain_error("observed_intervention_events: k must be positive");
  return inflation_k * expected_events(n_star, h_hyp, hazards, design);
}

}  // namespace ascertain
