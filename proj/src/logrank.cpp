#include "ascertain/logrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ascertain {

LogRankResult logrank_two_sample(std::span<const double> times,
                                 std::span<const unsigned char> events,
                                 std::span<const unsigned char> in_intervention) {
  const std::size_t n = times.size();
  if (events.size() != n || in_intervention.size() != n)
    throw std::invalid_argument("logrank_two_sample: input spans differ in length");
  if (n == 0) return {};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  double at_risk = static_cast<double>(n);
  double at_risk_intervention = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (in_intervention[i]) at_risk_intervention += 1.0;

  double score = 0.0;     // observed minus expected, intervention arm
  double variance = 0.0;  // hypergeometric
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    std::size_t block_end = i;
    double deaths = 0.0;
    double deaths_intervention = 0.0;
    double leaving = 0.0;
    double leaving_intervention = 0.0;
    while (block_end < n && times[order[block_end]] == t) {
      const std::size_t subject = order[block_end];
      if (events[subject]) {
        deaths += 1.0;
        if (in_intervention[subject]) deaths_intervention += 1.0;
      }
      leaving += 1.0;
      if (in_intervention[subject]) leaving_intervention += 1.0;
      ++block_end;
    }

    if (deaths > 0.0 && at_risk > 1.0) {
      const double share = at_risk_intervention / at_risk;
      score += deaths_intervention - deaths * share;
      variance += deaths * share * (1.0 - share) * (at_risk - deaths) /
                  (at_risk - 1.0);
    } else if (deaths > 0.0) {
      score += deaths_intervention - deaths * (at_risk_intervention / at_risk);
    }

    at_risk -= leaving;
    at_risk_intervention -= leaving_intervention;
    i = block_end;
  }

  LogRankResult result;
  result.observed_minus_expected = score;
  result.variance = variance;
  result.statistic_z = variance > 0.0 ? score / std::sqrt(variance) : 0.0;
  return result;
}

}  // namespace ascertain
