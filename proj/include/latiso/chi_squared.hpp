#pragma once

namespace latiso {

/// Chi-squared distribution function with d degrees of freedom, evaluated
/// through the regularized lower incomplete gamma function (series for
/// small arguments, Lentz continued fraction otherwise). Absolute error
/// below 1e-10 for d <= 50, x <= 200.
double chi_sq_cdf(double x, int d);

/// Inverse of chi_sq_cdf in x, to 1e-8, via bracketing plus bisection.
/// Requires p in (0, 1).
double chi_sq_quantile(double p, int d);

}  // namespace latiso
