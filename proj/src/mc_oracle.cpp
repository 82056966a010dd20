#include "ascertain/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ascertain/logrank.hpp"
#include "ascertain/normal.hpp"
#include "ascertain/rng.hpp"

namespace ascertain {

namespace {

struct RepTally {
  double control_first[3]{};
  double control_outcome_first = 0.0;
  double control_outcome_first_cat1 = 0.0;
  double control_outcome_first_cat2 = 0.0;
  double control_revised_first = 0.0;
  double control_total[3]{};

  double intervention_first_true[3]{};
  double intervention_first_observed[3]{};
  double intervention_outcome_first_true = 0.0;
  double intervention_outcome_first_observed = 0.0;
  double intervention_revised_first = 0.0;
  double intervention_total_true[3]{};
  double intervention_total_observed[3]{};

  bool estimable = false;
  double b_hat = 0.0;
  double p_hat = 0.0;
  double k_hat = 0.0;

  double z_protocol = 0.0;
  double z_revised = 0.0;
  bool reject_protocol = false;
  bool reject_revised = false;

  bool conservation_ok = true;
  bool category1_ok = true;
};

// Analysis row per participant for the log-rank tests.
struct AnalysisTimes {
  double protocol_time;
  double revised_time;
  unsigned char protocol_event;
  unsigned char revised_event;
  unsigned char arm;
};

void simulate_replication(const SimulationConfig& config, std::uint64_t rep,
                          RepTally& tally,
                          std::vector<AnalysisTimes>& analysis) {
  const double lambda1 = config.category_hazards[0];
  const double lambda2 = config.category_hazards[1];
  const double lambda3 = config.category_hazards[2];
  const double xi = lambda1 + lambda2 + lambda3;
  const double cut1 = xi > 0.0 ? lambda1 / xi : 0.0;
  const double cut2 = xi > 0.0 ? (lambda1 + lambda2) / xi : 0.0;
  const double withdrawal_hazard =
      config.withdrawal_rate_per_year > 0.0
          ? -std::log1p(-config.withdrawal_rate_per_year) / 12.0
          : 0.0;
  const double t_total = config.design.total_duration_months;
  const double enroll_window = config.design.recruitment_fraction * t_total;
  const double shuffle = config.relabel_cat3_to_cat2;
  const double mask = config.relabel_cat2_to_cat3;
  const int n = config.n_per_arm;

  analysis.clear();
  analysis.reserve(static_cast<std::size_t>(2) * n);
  tally = RepTally{};

  for (int arm = 0; arm < 2; ++arm) {
    const double arm_rate = (arm == 1) ? config.true_hazard_ratio * xi : xi;
    for (int i = 0; i < n; ++i) {
      SplitMix64 rng = participant_stream(
          config.seed, rep, static_cast<std::uint64_t>(arm) * n + i);

      const double enrolled_at = rng.next_double() * enroll_window;
      const double follow_up = t_total - enrolled_at;
      const double death_at = rng.next_exponential(config.death_hazard);
      const double withdraw_at = rng.next_exponential(withdrawal_hazard);
      const double censored_at =
          std::min(follow_up, std::min(death_at, withdraw_at));

      bool any_event_seen = false;
      bool outcome_true_seen = false;
      bool outcome_observed_seen = false;
      bool revised_seen = false;
      double outcome_true_time = 0.0;
      double outcome_observed_time = 0.0;
      double revised_time = 0.0;

      double t = 0.0;
      for (;;) {
        t += rng.next_exponential(arm_rate);
        if (!(t < censored_at)) break;

        const double u = rng.next_double();
        const int true_cat = u < cut1 ? 1 : (u < cut2 ? 2 : 3);
        int observed_cat = true_cat;
        if (arm == 1) {
          if (true_cat == 3 && shuffle > 0.0 && rng.next_bernoulli(shuffle))
            observed_cat = 2;
          else if (true_cat == 2 && mask > 0.0 && rng.next_bernoulli(mask))
            observed_cat = 3;
        }

        if (arm == 0) {
          tally.control_total[true_cat - 1] += 1.0;
          if (!any_event_seen) {
            any_event_seen = true;
            tally.control_first[true_cat - 1] += 1.0;
          }
          if (true_cat <= 2 && !outcome_true_seen) {
            outcome_true_seen = true;
            outcome_true_time = t;
            tally.control_outcome_first += 1.0;
            if (true_cat == 1)
              tally.control_outcome_first_cat1 += 1.0;
            else
              tally.control_outcome_first_cat2 += 1.0;
          }
          if (true_cat == 1 && !revised_seen) {
            revised_seen = true;
            revised_time = t;
            tally.control_revised_first += 1.0;
          }
        } else {
          tally.intervention_total_true[true_cat - 1] += 1.0;
          tally.intervention_total_observed[observed_cat - 1] += 1.0;
          if (!any_event_seen) {
            any_event_seen = true;
            tally.intervention_first_true[true_cat - 1] += 1.0;
            tally.intervention_first_observed[observed_cat - 1] += 1.0;
          }
          if (true_cat <= 2 && !outcome_true_seen) {
            outcome_true_seen = true;
            outcome_true_time = t;
            tally.intervention_outcome_first_true += 1.0;
          }
          if (observed_cat <= 2 && !outcome_observed_seen) {
            outcome_observed_seen = true;
            outcome_observed_time = t;
            tally.intervention_outcome_first_observed += 1.0;
          }
          if (observed_cat == 1 && !revised_seen) {
            revised_seen = true;
            revised_time = t;
            tally.intervention_revised_first += 1.0;
          }
        }
      }

      AnalysisTimes row;
      row.arm = static_cast<unsigned char>(arm);
      if (arm == 0) {
        row.protocol_event = outcome_true_seen ? 1 : 0;
        row.protocol_time = outcome_true_seen ? outcome_true_time : censored_at;
      } else {
        row.protocol_event = outcome_observed_seen ? 1 : 0;
        row.protocol_time =
            outcome_observed_seen ? outcome_observed_time : censored_at;
      }
      row.revised_event = revised_seen ? 1 : 0;
      row.revised_time = revised_seen ? revised_time : censored_at;
      analysis.push_back(row);
    }
  }

  // relabeling must preserve the cat-2+3 pool and never touch category 1
  tally.conservation_ok =
      tally.intervention_total_observed[1] + tally.intervention_total_observed[2] ==
      tally.intervention_total_true[1] + tally.intervention_total_true[2];
  tally.category1_ok =
      tally.intervention_total_observed[0] == tally.intervention_total_true[0] &&
      tally.intervention_first_observed[0] == tally.intervention_first_true[0];

  const double control_pool = config.recurrent_events
                                  ? tally.control_total[1] + tally.control_total[2]
                                  : tally.control_first[1] + tally.control_first[2];
  const double control_cat2 =
      config.recurrent_events ? tally.control_total[1] : tally.control_first[1];
  const double intervention_pool =
      config.recurrent_events ? tally.intervention_total_observed[1] +
                                    tally.intervention_total_observed[2]
                              : tally.intervention_first_observed[1] +
                                    tally.intervention_first_observed[2];
  const double intervention_cat2 = config.recurrent_events
                                       ? tally.intervention_total_observed[1]
                                       : tally.intervention_first_observed[1];
  const double first_outcome_pool =
      tally.control_outcome_first_cat1 + tally.control_outcome_first_cat2;

  if (control_pool > 0.0 && control_cat2 > 0.0 && intervention_pool > 0.0 &&
      first_outcome_pool > 0.0) {
    const double rho_c = control_cat2 / control_pool;
    const double rho_i = intervention_cat2 / intervention_pool;
    tally.b_hat = rho_i / rho_c;
    tally.p_hat = tally.control_outcome_first_cat2 / first_outcome_pool;
    tally.k_hat = 1.0 + tally.p_hat * (tally.b_hat - 1.0);
    tally.estimable = true;
  }

  const std::size_t count = analysis.size();
  std::vector<double> times(count);
  std::vector<unsigned char> events(count);
  std::vector<unsigned char> arms(count);
  for (std::size_t j = 0; j < count; ++j) {
    times[j] = analysis[j].protocol_time;
    events[j] = analysis[j].protocol_event;
    arms[j] = analysis[j].arm;
  }
  const double critical =
      normal_quantile(1.0 - 0.5 * config.design.alpha);
  tally.z_protocol = logrank_two_sample(times, events, arms).statistic_z;
  tally.reject_protocol = std::fabs(tally.z_protocol) >= critical;

  for (std::size_t j = 0; j < count; ++j) {
    times[j] = analysis[j].revised_time;
    events[j] = analysis[j].revised_event;
  }
  tally.z_revised = logrank_two_sample(times, events, arms).statistic_z;
  tally.reject_revised = std::fabs(tally.z_revised) >= critical;
}

// Deterministic two-pass mean and standard error with compensated sums; the
// reduction order never depends on thread count.
template <typename Extract>
MeanSe reduce(const std::vector<RepTally>& tallies, Extract extract,
              bool estimable_only = false) {
  double sum = 0.0, carry = 0.0;
  long used = 0;
  for (const RepTally& tally : tallies) {
    if (estimable_only && !tally.estimable) continue;
    ++used;
    const double y = extract(tally) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  MeanSe out;
  if (used == 0) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum / used;
  if (used == 1) {
    out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  carry = 0.0;
  for (const RepTally& tally : tallies) {
    if (estimable_only && !tally.estimable) continue;
    const double d = extract(tally) - out.mean;
    const double y = d * d - carry;
    const double t = ss + y;
    carry = (t - ss) - y;
    ss = t;
  }
  out.se = std::sqrt(ss / (used - 1)) / std::sqrt(static_cast<double>(used));
  return out;
}

MeanSe binomial_rate(const std::vector<RepTally>& tallies,
                     bool (RepTally::*flag)) {
  long hits = 0;
  for (const RepTally& tally : tallies)
    if (tally.*flag) ++hits;
  const double r = static_cast<double>(tallies.size());
  const double p = hits / r;
  return {p, std::sqrt(p * (1.0 - p) / r)};
}

void write_dump(std::ostream& os, const std::vector<RepTally>& tallies) {
  os << "replication,control_first_cat1,control_first_cat2,control_first_cat3,"
        "control_outcome_first,control_revised_first,control_total_cat1,"
        "control_total_cat2,control_total_cat3,intervention_first_true_cat1,"
        "intervention_first_true_cat2,intervention_first_true_cat3,"
        "intervention_first_obs_cat1,intervention_first_obs_cat2,"
        "intervention_first_obs_cat3,intervention_outcome_first_true,"
        "intervention_outcome_first_obs,intervention_revised_first,"
        "intervention_total_true_cat1,intervention_total_true_cat2,"
        "intervention_total_true_cat3,intervention_total_obs_cat1,"
        "intervention_total_obs_cat2,intervention_total_obs_cat3,"
        "b_hat,p_hat,k_hat,z_protocol,z_revised,reject_protocol,"
        "reject_revised,conservation_ok,category1_ok\n";
  os.precision(17);
  for (std::size_t r = 0; r < tallies.size(); ++r) {
    const RepTally& t = tallies[r];
    os << r;
    for (double v : t.control_first) os << ',' << v;
    os << ',' << t.control_outcome_first << ',' << t.control_revised_first;
    for (double v : t.control_total) os << ',' << v;
    for (double v : t.intervention_first_true) os << ',' << v;
    for (double v : t.intervention_first_observed) os << ',' << v;
    os << ',' << t.intervention_outcome_first_true << ','
       << t.intervention_outcome_first_observed << ','
       << t.intervention_revised_first;
    for (double v : t.intervention_total_true) os << ',' << v;
    for (double v : t.intervention_total_observed) os << ',' << v;
    if (t.estimable)
      os << ',' << t.b_hat << ',' << t.p_hat << ',' << t.k_hat;
    else
      os << ",nan,nan,nan";
    os << ',' << t.z_protocol << ',' << t.z_revised << ','
       << (t.reject_protocol ? 1 : 0) << ',' << (t.reject_revised ? 1 : 0)
       << ',' << (t.conservation_ok ? 1 : 0) << ','
       << (t.category1_ok ? 1 : 0) << '\n';
  }
}

}  // namespace

void SimulationConfig::validate() const {
  design.validate();
  if (n_per_arm < 1)
    throw std::domain_error("SimulationConfig: n_per_arm must be at least 1");
  for (double h : category_hazards)
    if (!(h >= 0.0) || !std::isfinite(h))
      throw std::domain_error(
          "SimulationConfig: category hazards must be nonnegative");
  if (!(death_hazard >= 0.0) || !std::isfinite(death_hazard))
    throw std::domain_error("SimulationConfig: death_hazard must be nonnegative");
  if (!(true_hazard_ratio > 0.0) || !std::isfinite(true_hazard_ratio))
    throw std::domain_error(
        "SimulationConfig: true_hazard_ratio must be positive");
  if (!(relabel_cat3_to_cat2 >= 0.0 && relabel_cat3_to_cat2 <= 1.0))
    throw std::domain_error(
        "SimulationConfig: relabel_cat3_to_cat2 must lie in [0,1]");
  if (!(relabel_cat2_to_cat3 >= 0.0 && relabel_cat2_to_cat3 <= 1.0))
    throw std::domain_error(
        "SimulationConfig: relabel_cat2_to_cat3 must lie in [0,1]");
  if (!(withdrawal_rate_per_year >= 0.0 && withdrawal_rate_per_year < 1.0))
    throw std::domain_error(
        "SimulationConfig: withdrawal_rate_per_year must lie in [0,1)");
  if (replications < 1)
    throw std::domain_error("SimulationConfig: replications must be at least 1");
}

SimulationSummary simulate(const SimulationConfig& config, int threads,
                           std::ostream* replication_dump) {
  config.validate();
  const int reps = config.replications;
  std::vector<RepTally> tallies(reps);

  int worker_count = threads > 0
                         ? threads
                         : static_cast<int>(std::thread::hardware_concurrency());
  if (worker_count < 1) worker_count = 1;
  if (worker_count > reps) worker_count = reps;

  auto run_range = [&](int begin, int end) {
    std::vector<AnalysisTimes> scratch;
    for (int r = begin; r < end; ++r)
      simulate_replication(config, static_cast<std::uint64_t>(r), tallies[r],
                           scratch);
  };

  if (worker_count <= 1) {
    run_range(0, reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    const int chunk = (reps + worker_count - 1) / worker_count;
    for (int w = 0; w < worker_count; ++w) {
      const int begin = w * chunk;
      const int end = std::min(reps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  SimulationSummary summary;
  summary.replications = reps;
  for (int c = 0; c < 3; ++c) {
    summary.control_first_by_category[c] =
        reduce(tallies, [c](const RepTally& t) { return t.control_first[c]; });
    summary.control_total_by_category[c] =
        reduce(tallies, [c](const RepTally& t) { return t.control_total[c]; });
    summary.intervention_first_true[c] = reduce(
        tallies, [c](const RepTally& t) { return t.intervention_first_true[c]; });
    summary.intervention_first_observed[c] =
        reduce(tallies, [c](const RepTally& t) {
          return t.intervention_first_observed[c];
        });
    summary.intervention_total_true[c] = reduce(
        tallies, [c](const RepTally& t) { return t.intervention_total_true[c]; });
    summary.intervention_total_observed[c] =
        reduce(tallies, [c](const RepTally& t) {
          return t.intervention_total_observed[c];
        });
  }
  summary.control_outcome_first =
      reduce(tallies, [](const RepTally& t) { return t.control_outcome_first; });
  summary.control_revised_first =
      reduce(tallies, [](const RepTally& t) { return t.control_revised_first; });
  summary.intervention_outcome_first_true = reduce(
      tallies, [](const RepTally& t) { return t.intervention_outcome_first_true; });
  summary.intervention_outcome_first_observed =
      reduce(tallies, [](const RepTally& t) {
        return t.intervention_outcome_first_observed;
      });
  summary.intervention_revised_first = reduce(
      tallies, [](const RepTally& t) { return t.intervention_revised_first; });

  summary.bias_ratio_hat =
      reduce(tallies, [](const RepTally& t) { return t.b_hat; }, true);
  summary.category2_fraction_hat =
      reduce(tallies, [](const RepTally& t) { return t.p_hat; }, true);
  summary.inflation_hat =
      reduce(tallies, [](const RepTally& t) { return t.k_hat; }, true);
  for (const RepTally& t : tallies)
    if (t.estimable) ++summary.estimable_replications;

  summary.reject_protocol = binomial_rate(tallies, &RepTally::reject_protocol);
  summary.reject_revised = binomial_rate(tallies, &RepTally::reject_revised);

  for (const RepTally& t : tallies) {
    if (!t.conservation_ok) ++summary.conservation_violations;
    if (!t.category1_ok) ++summary.category1_violations;
  }

  if (replication_dump) write_dump(*replication_dump, tallies);
  return summary;
}

MeanSe empirical_power(const SimulationConfig& config,
                       OutcomeDefinition definition, int threads) {
  const SimulationSummary summary = simulate(config, threads);
  return definition == OutcomeDefinition::protocol ? summary.reject_protocol
                                                   : summary.reject_revised;
}

double relabel_for_bias_ratio(double target_b,
                              const std::array<double, 3>& category_hazards) {
  if (!(category_hazards[2] > 0.0))
    throw std::domain_error(
        "relabel_for_bias_ratio: category-3 hazard must be positive");
  if (!(category_hazards[1] > 0.0))
    throw std::domain_error(
        "relabel_for_bias_ratio: category-2 hazard must be positive");
  const double s =
      (target_b - 1.0) * category_hazards[1] / category_hazards[2];
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error(
        "relabel_for_bias_ratio: target bias ratio is not reachable by "
        "category-3 relabeling alone");
  return s;
}

double observed_outcome_hazard(const SimulationConfig& config) {
  return config.true_hazard_ratio *
         (config.category_hazards[0] +
          (1.0 - config.relabel_cat2_to_cat3) * config.category_hazards[1] +
          config.relabel_cat3_to_cat2 * config.category_hazards[2]);
}

}  // namespace ascertain
