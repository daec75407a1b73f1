#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lcmix/rng.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

/// BIC = -2 loglik + n_params * ln(n). Lower is better.
double bic(double loglik, int n_params, int n);

/// Entropy-based R^2: 1 - (posterior entropy) / (baseline entropy of the
/// class proportions). 1 for fully separated posteriors, 0 when posteriors
/// equal the proportions everywhere; defined as 1 for S = 1.
double entropy_r2(const Eigen::MatrixXd& posteriors, std::span<const double> class_proportions);

/// Expected misclassification under modal assignment:
/// mean over rows of (1 - max_s p_is).
double classification_error(const Eigen::MatrixXd& posteriors);

/// Argmax per row; ties go to the lowest class index.
Partition modal_assignment(const Eigen::MatrixXd& posteriors);

/// One categorical draw per row from its posterior.
Partition proportional_assignment(const Eigen::MatrixXd& posteriors, Rng& rng);

/// Hubert-Arabie adjusted Rand index; 1 for identical partitions, 0 expected
/// under independent random labelings. Throws InputError on length mismatch
/// or n < 2.
double adjusted_rand_index(const Partition& a, const Partition& b);

}  // namespace lcmix
