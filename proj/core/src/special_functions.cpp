#include "lcmix/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lcmix {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double mx = values[0];
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;  // all -inf, or a +inf/nan dominates
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

namespace {

// Lower incomplete gamma P(a,x) by series, for x < a + 1.
double gamma_p_series(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * eps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("incomplete gamma series failed to converge");
}

// Upper incomplete gamma Q(a,x) by Lentz continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || std::isnan(x))
    throw std::domain_error("regularized_gamma_q requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_upper_tail(double x, int df) {
  if (df < 1) throw std::domain_error("chi_square_upper_tail requires df >= 1");
  if (x < 0.0) throw std::domain_error("chi_square_upper_tail requires x >= 0");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace lcmix
