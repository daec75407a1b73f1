#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lcmix/types.hpp"

namespace lcmix {

/// Conditional response probabilities of one item in one class at external
/// value z: softmax over category scores beta0_jks + z * beta_jks, baseline
/// category score 0. For a dichotomous item this is the Bernoulli logit.
std::vector<double> item_response_prob(const Parameters& params, const ModelSpec& spec,
                                       int item, int cls, double z);

/// log N(z | mu, sigma2). Throws std::domain_error for sigma2 <= 0.
double gaussian_logpdf(double z, double mu, double sigma2);

/// Log density of one observation within one class:
///   LCcw:   log p(z|s) + sum_j log p(y_j | z, s)
///   LCdist: log p(z|s) + sum_j log p(y_j | s)
///   LCreg:  sum_j log p(y_j | z, s)          (z is conditioned on, not modeled)
double log_component_density(const Parameters& params, const ModelSpec& spec,
                             const Dataset& data, int row, int cls);

/// Mixture log-likelihood, accumulated in fixed row order with per-row
/// log-sum-exp. Throws NumericalError (naming the row) on a non-finite term.
double log_likelihood(const Parameters& params, const ModelSpec& spec, const Dataset& data);

/// Posterior class-membership probabilities, one row per observation.
Eigen::MatrixXd posteriors(const Parameters& params, const ModelSpec& spec, const Dataset& data);

/// Free-parameter count implied by the spec: (S-1) mixing logits, S means and
/// S (or 1 pooled) variances when z is modeled, (K_j - 1) intercepts per item
/// and class, plus slopes as constrained.
int n_free_params(const ModelSpec& spec);

namespace detail {

/// Column-major copies of the dataset feeding the vectorized kernels.
/// item_codes are the 0-based category codes as doubles.
struct PackedData {
  Eigen::ArrayXd z;
  std::vector<Eigen::ArrayXd> item_codes;
  bool all_dichotomous = false;

  static PackedData build(const Dataset& data);
};

/// One pass computing both the posterior matrix and the log-likelihood.
/// Skips Parameters validation; callers own that.
struct PosteriorPass {
  Eigen::MatrixXd posteriors;
  double loglik = 0.0;
};
PosteriorPass posterior_pass(const Parameters& params, const ModelSpec& spec, const Dataset& data);

/// Log-likelihood only (no posterior storage); the hot path for numerical
/// derivatives. The packed overload reuses a prebuilt cache across many
/// evaluations.
double log_likelihood_unchecked(const Parameters& params, const ModelSpec& spec,
                                const Dataset& data);
double log_likelihood_packed(const Parameters& params, const ModelSpec& spec,
                             const Dataset& data, const PackedData& packed);

}  // namespace detail

}  // namespace lcmix
