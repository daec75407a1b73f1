#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcmix/inference.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

/// "***" p < 0.01, "**" p < 0.05, "*" p < 0.1, "" otherwise.
std::string significance_stars(double p);

/// Aligned text table; row 0 is the header. Columns after the first are
/// right-aligned.
std::string format_table(const std::vector<std::vector<std::string>>& rows);

/// Class proportions, log-likelihood, BIC, entropy R^2, classification error.
std::string format_fit_summary(const FitResult& fit);

/// Per-class mean/variance of the external variable with standard errors and
/// per-mean z-test stars, plus the equality Wald tests (either may be null
/// when unavailable, e.g. S = 1 or no covariance).
std::string format_gaussian_table(const FitResult& fit, const WaldResult* equal_means,
                                  const WaldResult* equal_variances);

/// Direct-effect coefficients per class with SEs for every item with slopes,
/// one row per item (and category for nominal items); zero/equality Wald
/// columns are filled from `tests` where present.
std::string format_direct_effects(const FitResult& fit,
                                  const std::vector<std::string>& item_names,
                                  const std::vector<std::pair<int, DirectEffectTests>>& tests);

/// Class-conditional response probabilities per item category, evaluated at
/// the reference external value supplied per class (profile-plot data).
std::string format_profile_table(const FitResult& fit, const std::vector<std::string>& item_names,
                                 const std::vector<double>& z_ref);

struct SelectRow {
  int s = 0;
  double bic_value = 0.0;
  int n_params = 0;
  double class_err = 0.0;
  double entropy = 0.0;
  bool converged = true;
};

/// One row per class count; the minimum-BIC row is marked with '*'.
std::string format_select_table(const std::string& label, const std::vector<SelectRow>& rows);

}  // namespace lcmix
