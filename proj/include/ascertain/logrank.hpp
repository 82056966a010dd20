#pragma once

#include <span>

namespace ascertain {

struct LogRankResult {
  double statistic_z = 0.0;           // U / sqrt(V); 0 when V == 0
  double observed_minus_expected = 0.0;  // U, intervention arm
  double variance = 0.0;              // V, hypergeometric
};

// Two-sample unstratified log-rank test. events[i] nonzero means subject i
// had the event at times[i]; zero means censored at times[i] (competing
// events enter as censorings). in_intervention[i] nonzero assigns arm.
// Ties are handled with the hypergeometric variance; censorings at t remain
// at risk for events at t.
LogRankResult logrank_two_sample(std::span<const double> times,
                                 std::span<const unsigned char> events,
                                 std::span<const unsigned char> in_intervention);

}  // namespace ascertain
