#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lcmix/rng.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

struct FitConfig {
  int n_starts = 50;
  int max_em_iterations = 500;
  double em_tolerance = 1e-8;  // relative log-likelihood change, |dll| / (1 + |ll|)
  int max_newton_iterations = 25;
  double newton_tolerance = 1e-8;  // max absolute score in the measurement M-step
  std::uint64_t rng_seed = 0;
  bool parallel_starts = true;

  void validate() const;
};

/// Random starting point: a Dirichlet(1,...,1) responsibility row per
/// observation, followed by one M-step with slopes held at zero.
/// Deterministic for S = 1.
Parameters initialize(const ModelSpec& spec, const Dataset& data, Rng& rng);

struct EStepResult {
  Eigen::MatrixXd posteriors;
  double loglik = 0.0;
};
EStepResult e_step(const Parameters& params, const ModelSpec& spec, const Dataset& data);

/// Mixing logits from responsibility column means, first class as reference.
/// Throws NumericalError when a class has zero responsibility mass.
std::vector<double> m_step_mixing(const Eigen::MatrixXd& posteriors);

/// Responsibility-weighted Gaussian MLE. Variances are clamped at
/// variance_floor(z). Returns (mu, sigma2); sigma2 has one entry under
/// VarianceMode::Common.
std::pair<std::vector<double>, std::vector<double>> m_step_gaussian(
    const Eigen::MatrixXd& posteriors, const std::vector<double>& z, VarianceMode mode);

/// Lower clamp for class variances: 1e-6 times the sample variance of z
/// (absolute fallback 1e-12 when z is constant).
double variance_floor(std::span<const double> z);

struct MeasurementStep {
  std::vector<std::vector<double>> beta0;
  std::vector<std::vector<double>> beta;
  std::vector<std::string> flags;
};

/// Measurement-model M-step. Items with zero slopes get the closed-form
/// weighted-frequency logits; items with free or class-equal slopes are fit
/// by Newton-Raphson with step halving on the responsibility-weighted
/// multinomial-logit objective, warm-started from `warm_start` when given.
/// Coefficients are kept inside [-30, 30]; hitting that box is flagged as
/// quasi-separation.
MeasurementStep m_step_measurement(const Eigen::MatrixXd& posteriors, const ModelSpec& spec,
                                   const Dataset& data, const FitConfig& config,
                                   const Parameters* warm_start = nullptr);

/// Multi-start EM. Per-start RNG streams are derived from (rng_seed, start
/// index), so results are identical whether starts run serially or in
/// parallel. Classes of the winning chain are reordered by descending
/// proportion. Throws EstimationError when every start degenerates.
FitResult fit(const ModelSpec& spec, const Dataset& data, const FitConfig& config = {});

/// Reorders classes by descending mixing proportion (stable), rebuilding
/// theta against the new reference class and permuting posterior columns.
void canonicalize_class_order(Parameters& params, Eigen::MatrixXd& posteriors,
                              const ModelSpec& spec);

}  // namespace lcmix
