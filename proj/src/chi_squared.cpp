#include "latiso/chi_squared.hpp"

#include <cmath>
#include <limits>

#include "latiso/errors.hpp"

namespace latiso {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 500;

// Regularized lower incomplete gamma P(a, x) by its power series,
// convergent and preferred for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction, preferred for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

}  // namespace

double chi_sq_cdf(double x, int d) {
  if (d < 1) fail(errc::invalid_argument, "degrees of freedom must be positive");
  if (std::isnan(x)) fail(errc::invalid_argument, "chi_sq_cdf argument is NaN");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * d, 0.5 * x);
}

double chi_sq_quantile(double p, int d) {
  if (d < 1) fail(errc::invalid_argument, "degrees of freedom must be positive");
  if (!(p > 0.0 && p < 1.0)) fail(errc::invalid_argument, "quantile probability must lie in (0, 1)");

  // Bracket the root, then bisect; the CDF is strictly increasing.
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(d));
  while (chi_sq_cdf(hi, d) < p && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_sq_cdf(mid, d) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace latiso
