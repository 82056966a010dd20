#include "ascertain/heff_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ascertain/errors.hpp"

namespace ascertain {

namespace {

// Per-participant expected first-event fraction at outcome hazard z:
// z/(z+gamma) Q(z). The root equation is lhs(Lambda) = k * lhs(h_hyp*lambda).
double event_fraction(double z, double gamma, const StudyDesign& design) {
  return z / (z + gamma) * q_factor(z, gamma, design);
}

// d lhs / d Lambda. Positive for all Lambda > 0; evaluated directly from the
// closed form.
double event_fraction_slope(double lambda, double gamma,
                            const StudyDesign& design) {
  const double t = design.total_duration_months;
  const double mu = design.recruitment_fraction;
  const double total = lambda + gamma;
  const double x = t * total;
  const double ea = std::exp(-(1.0 - mu) * x);
  const double eb = std::exp(-x);
  const double spread = (mu * x <= 1.0) ? eb * std::expm1(mu * x) : ea - eb;
  const double numerator = gamma * (mu * x - spread) +
                           lambda * (x * ((1.0 - mu) * ea - eb) + spread);
  return numerator / (mu * x * total * total);
}

struct SeedChoice {
  double lambda0 = 0.0;
  HeffSeed kind = HeffSeed::scaled_hypothesis;
};

void validate_inputs(double k, double h_hyp, const HazardPair& hazards,
                     const StudyDesign& design) {
  design.validate();
  hazards.validate();
  if (!(hazards.outcome > 0.0))
    throw std::domain_error("solve_h_eff: outcome hazard must be positive");
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::domain_error("solve_h_eff: inflation factor k must be positive");
  if (!(h_hyp > 0.0) || !std::isfinite(h_hyp))
    throw std::domain_error("solve_h_eff: h_hyp must be positive");
}

}  // namespace

void SolverSettings::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0))
    throw std::domain_error("SolverSettings: rel_tolerance must lie in (0,1)");
  if (max_iterations < 1)
    throw std::domain_error("SolverSettings: max_iterations must be at least 1");
  if (!(bracket_expansion > 1.0))
    throw std::domain_error("SolverSettings: bracket_expansion must exceed 1");
}

double h_eff_first_order(double k, double h_hyp, const HazardPair& hazards,
                         const StudyDesign& design) {
  validate_inputs(k, h_hyp, hazards, design);
  const double target =
      k * event_fraction(h_hyp * hazards.outcome, hazards.competing, design);
  const double t = design.total_duration_months;
  const double mu = design.recruitment_fraction;
  return target / (hazards.outcome * t * (1.0 - 0.5 * mu));
}

std::optional<double> h_eff_second_order(double k, double h_hyp,
                                         const HazardPair& hazards,
                                         const StudyDesign& design) {
  validate_inputs(k, h_hyp, hazards, design);
  const double t = design.total_duration_months;
  const double mu = design.recruitment_fraction;
  const double poly = mu * mu - 3.0 * mu + 3.0;
  const double theta =
      0.5 * ((3.0 / t) * (2.0 - mu) / poly - hazards.competing);
  const double target =
      k * event_fraction(h_hyp * hazards.outcome, hazards.competing, design);
  const double phi = std::sqrt(6.0 * target / poly) / t;
  if (theta < 0.0 || theta < phi) return std::nullopt;

  const double ratio = phi / theta;
  const double discriminant = std::max(0.0, 1.0 - ratio * ratio);
  // smaller quadratic root: the branch continuous with the linear solution
  const double lambda_eff = theta * (1.0 - std::sqrt(discriminant));
  return lambda_eff / hazards.outcome;
}

double qbar_taylor(double x, double mu, int order) {
  if (!(mu > 0.0 && mu <= 1.0))
    throw std::domain_error("qbar_taylor: mu must lie in (0,1]");
  if (order < 1 || order > 20)
    throw std::domain_error("qbar_taylor: order must lie in [1,20]");

  double factorial[22];
  factorial[0] = 1.0;
  for (int i = 1; i <= 21; ++i) factorial[i] = factorial[i - 1] * i;

  double sum = 0.0;
  double x_power = 1.0;
  for (int n = 1; n <= order; ++n) {
    x_power *= x;
    double coefficient = 0.0;
    double mu_power = 1.0;
    for (int j = 0; j <= n; ++j) {
      const double term = mu_power / (factorial[j + 1] * factorial[n - j]);
      coefficient += ((n + j + 1) % 2 == 0) ? term : -term;
      mu_power *= mu;
    }
    sum += coefficient * x_power;
  }
  return sum;
}

HeffResult solve_h_eff(double k, double h_hyp, const HazardPair& hazards,
                       const StudyDesign& design,
                       const SolverSettings& settings) {
  validate_inputs(k, h_hyp, hazards, design);
  settings.validate();

  const double lambda = hazards.outcome;
  const double gamma = hazards.competing;
  const double target = k * event_fraction(h_hyp * lambda, gamma, design);
  const double tol = settings.rel_tolerance;

  // The left side increases toward its supremum as Lambda grows; if the
  // target is still unreachable far beyond the natural hazard scale, no
  // hazard ratio can produce the requested inflation.
  const double lambda_cap = 1e6 * (lambda + gamma);
  if (event_fraction(lambda_cap, gamma, design) <= target) {
    std::ostringstream what;
    what << "solve_h_eff: no solution; inflated target fraction " << target
         << " (k = " << k << ", h_hyp = " << h_hyp
         << ") is not attainable by any hazard ratio up to "
         << lambda_cap / lambda;
    throw solver_error(solver_error::kind::no_solution, what.str());
  }

  HeffResult result;
  result.first_order = h_eff_first_order(k, h_hyp, hazards, design);
  result.second_order = h_eff_second_order(k, h_hyp, hazards, design);

  SeedChoice seed;
  const double t = design.total_duration_months;
  const double mu = design.recruitment_fraction;
  const double poly = mu * mu - 3.0 * mu + 3.0;
  const double theta = 0.5 * ((3.0 / t) * (2.0 - mu) / poly - gamma);
  if (result.second_order.has_value()) {
    seed = {*result.second_order * lambda, HeffSeed::second_order};
  } else if (theta > 0.0) {
    seed = {theta, HeffSeed::theta_bound};
  } else if (result.first_order > 0.0 && std::isfinite(result.first_order)) {
    seed = {result.first_order * lambda, HeffSeed::first_order};
  } else {
    seed = {k * h_hyp * lambda, HeffSeed::scaled_hypothesis};
  }
  result.seed_used = seed.kind;

  auto residual_at = [&](double lam) {
    return event_fraction(lam, gamma, design) - target;
  };

  int iterations = 0;
  bool newton_ok = false;
  double current = seed.lambda0;
  double f_current = residual_at(current);

  while (iterations < settings.max_iterations) {
    ++iterations;
    const double slope = event_fraction_slope(current, gamma, design);
    if (!std::isfinite(slope) || slope <= 0.0) break;
    const double next = current - f_current / slope;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    const double f_next = residual_at(next);
    const double step = std::fabs(next - current);
    current = next;
    f_current = f_next;
    if (std::fabs(f_next) <= tol * target && step <= tol * next) {
      newton_ok = true;
      break;
    }
  }

  if (!newton_ok) {
    // Bracketed bisection: the residual is -target at 0 and positive at the
    // feasibility cap, so expansion always finds an upper end.
    result.used_bisection = true;
    double lo = 0.0;
    double hi = std::max(seed.lambda0, k * h_hyp * lambda);
    if (!(hi > 0.0) || !std::isfinite(hi)) hi = lambda;
    while (residual_at(hi) <= 0.0) {
      hi = std::min(hi * settings.bracket_expansion, lambda_cap);
      ++iterations;
      if (hi >= lambda_cap) break;
    }

    const int bisect_limit = 500;
    bool bisect_ok = false;
    for (int i = 0; i < bisect_limit; ++i) {
      ++iterations;
      const double mid = 0.5 * (lo + hi);
      const double f_mid = residual_at(mid);
      if (f_mid < 0.0)
        lo = mid;
      else
        hi = mid;
      if (std::fabs(f_mid) <= tol * target && (hi - lo) <= tol * mid) {
        current = mid;
        f_current = f_mid;
        bisect_ok = true;
        break;
      }
    }
    if (!bisect_ok) {
      std::ostringstream what;
      what << "solve_h_eff: no convergence after " << iterations
           << " iterations (k = " << k << ", h_hyp = " << h_hyp
           << ", rel_tolerance = " << tol << ")";
      throw solver_error(solver_error::kind::no_convergence, what.str());
    }
  }

  result.h_eff = current / lambda;
  result.residual = f_current;
  result.iterations = iterations;
  return result;
}

}  // namespace ascertain
