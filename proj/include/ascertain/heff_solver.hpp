#pragma once

#include <optional>

#include "ascertain/event_model.hpp"

namespace ascertain {

struct SolverSettings {
  double rel_tolerance = 1e-12;    // in (0,1); applies to residual and step
  int max_iterations = 100;        // >= 1, Newton iterations before fallback
  double bracket_expansion = 2.0;  // > 1, growth factor for the bisection bracket

  void validate() const;
};

// Which starting point the solver used, in preference order.
enum class HeffSeed {
  second_order,       // quadratic-series root, when valid
  theta_bound,        // series vertex theta, when positive
  first_order,        // linear-series root
  scaled_hypothesis,  // k * h_hyp * lambda
};

struct HeffResult {
  double h_eff = 0.0;      // root of the observed-event-count identity
  double residual = 0.0;   // f(lambda_eff) at the returned root
  int iterations = 0;      // Newton plus bisection steps taken
  HeffSeed seed_used = HeffSeed::first_order;
  bool used_bisection = false;
  double first_order = 0.0;            // linear-series approximation
  std::optional<double> second_order;  // quadratic-series approximation, when valid
};

// Effective hazard ratio h_eff = Lambda/lambda, where Lambda solves
//   Lambda/(Lambda+gamma) * Q(Lambda) = k * h*lambda/(h*lambda+gamma) * Q(h*lambda)
// for h = h_hyp: the hazard ratio a standard analysis would estimate when
// intervention-arm first events are inflated by factor k. Newton iteration on
// Lambda seeded from the series approximations, with a guaranteed bracketing
// bisection fallback. Converged when |f| <= tol * target and the relative
// step is <= tol. Throws solver_error (no_solution) when k is too large for
// any hazard ratio to reproduce the target, solver_error (no_convergence) if
// iteration stalls, and std::domain_error on invalid inputs (k <= 0,
// h_hyp <= 0, lambda <= 0).
HeffResult solve_h_eff(double k, double h_hyp, const HazardPair& hazards,
                       const StudyDesign& design,
                       const SolverSettings& settings = {});

// Linear-in-Lambda series solution:
//   h1 = k h_hyp Q(h_hyp lambda) / [(1 - mu/2) T (h_hyp lambda + gamma)].
double h_eff_first_order(double k, double h_hyp, const HazardPair& hazards,
                         const StudyDesign& design);

// Quadratic-in-Lambda series solution
//   h2 = (theta/lambda) (1 - sqrt(1 - phi^2/theta^2)),
//   theta = [(3/T)(2-mu)/(mu^2-3mu+3) - gamma]/2,
//   phi   = sqrt(6 k Z / (mu^2-3mu+3)) / T,
// where Z is the per-participant target event fraction. Returns nullopt when
// theta < 0 or theta < phi (series root undefined).
std::optional<double> h_eff_second_order(double k, double h_hyp,
                                         const HazardPair& hazards,
                                         const StudyDesign& design);

// Truncated Taylor expansion of the accrual factor,
//   Qbar(x) = sum_{n=1..order} c_n x^n,
//   c_n = sum_{k=0..n} (-1)^(n+k+1) mu^k / ((k+1)! (n-k)!),
// with x = T(z+gamma). Requires mu in (0,1] and 1 <= order <= 20 (factorial
// growth makes higher orders meaningless in double precision).
double qbar_taylor(double x, double mu, int order);

}  // namespace ascertain
