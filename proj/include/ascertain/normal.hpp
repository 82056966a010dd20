#pragma once

namespace ascertain {

// Standard normal CDF, accurate to machine precision via erfc.
double normal_cdf(double x);

// Standard normal quantile (inverse CDF) for p in (0,1), accurate to
// ~1e-15 relative. Throws std::domain_error outside (0,1).
double normal_quantile(double p);

}  // namespace ascertain
