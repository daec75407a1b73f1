#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "lcmix/param_layout.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::string constraint_description;
};

/// Central-difference gradient with steps 1e-5 * (1 + |x_i|).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x);

/// Central-difference Hessian with steps 1e-5 * (1 + |x_i|); entries computed
/// in parallel, assembled in fixed order, symmetrized.
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x);

/// Observed information at params: the negative numerical Hessian of the
/// log-likelihood over the free-parameter vector, with variances
/// differentiated on the log scale and transformed back (delta method).
Eigen::MatrixXd observed_information(const Parameters& params, const ModelSpec& spec,
                                     const Dataset& data);

struct CovarianceResult {
  Eigen::MatrixXd covariance;
  bool pseudo_inverse = false;  // information was not positive definite
};

/// Inverts the information matrix; falls back to a Moore-Penrose
/// pseudo-inverse (flagged) when it is not positive definite.
CovarianceResult covariance_from_information(const Eigen::MatrixXd& information);

/// Computes observed information and covariance for a converged fit, filling
/// fit.se and fit.covariance. Appends a flag on pseudo-inverse fallback.
void add_standard_errors(FitResult& fit, const Dataset& data);

/// W = (R e - r)' [R Cov R']^{-1} (R e - r), df = rows(R), p from chi^2_df.
/// Throws NumericalError naming the offending row when R Cov R' is singular.
WaldResult wald_test(const Eigen::VectorXd& estimate, const Eigen::MatrixXd& covariance,
                     const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                     const std::string& description = "");

/// Tests mu_1 = ... = mu_S (df = S-1). Requires a variant that models z,
/// S >= 2, and a fit with covariance.
WaldResult wald_equal_means(const FitResult& fit);

/// Tests sigma2_1 = ... = sigma2_S (df = S-1). Requires heteroscedastic
/// variances.
WaldResult wald_equal_variances(const FitResult& fit);

struct DirectEffectTests {
  WaldResult zero_test;      // all slopes of the item are 0; df = S*(K-1)
  WaldResult equality_test;  // slopes equal across classes; df = (S-1)*(K-1)
};

/// Both Wald tests for one item's direct effects. The item's slopes must be
/// free.
DirectEffectTests wald_direct_effects(const FitResult& fit, int item);

}  // namespace lcmix
