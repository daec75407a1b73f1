#pragma once

#include <span>

namespace lcmix {

/// log(sum_i exp(v_i)) with the usual max shift. Empty input -> -inf.
double log_sum_exp(std::span<const double> values);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
/// a > 0, x >= 0. Series expansion for x < a + 1, continued fraction
/// otherwise.
double regularized_gamma_q(double a, double x);

/// Upper-tail probability P(chi2_df > x) = Q(df/2, x/2).
double chi_square_upper_tail(double x, int df);

}  // namespace lcmix
