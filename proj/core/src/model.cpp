#include "lcmix/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lcmix/special_functions.hpp"

namespace lcmix {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

// log p(Y_j = y | class, z) for one item; scores s_0 = 0, s_k = b0[k] + z*b[k].
inline double log_item_prob(const double* b0, const double* b, int K, double z, int y) {
  double mx = 0.0;
  for (int k = 1; k < K; ++k) mx = std::max(mx, b0[k] + z * b[k]);
  double sum = std::exp(-mx);
  for (int k = 1; k < K; ++k) sum += std::exp(b0[k] + z * b[k] - mx);
  const double score_y = (y == 0) ? 0.0 : b0[y] + z * b[y];
  return score_y - mx - std::log(sum);
}

inline double log_component_density_raw(const Parameters& params, const ModelSpec& spec,
                                        const Dataset& data, int row, int cls) {
  double acc = 0.0;
  const double z = data.z[row];
  if (spec.models_z()) acc = gaussian_logpdf(z, params.mu[cls], params.sigma2_of(cls));
  for (int item = 0; item < data.j; ++item) {
    const int K = data.cardinalities[item];
    const double* b0 = params.beta0[item].data() + static_cast<std::size_t>(cls) * K;
    const double* b = params.beta[item].data() + static_cast<std::size_t>(cls) * K;
    acc += log_item_prob(b0, b, K, z, data.code(row, item));
  }
  return acc;
}

std::vector<double> log_class_prior(const Parameters& params) {
  std::vector<double> lp(params.theta);
  const double lse = log_sum_exp(lp);
  for (double& v : lp) v -= lse;
  return lp;
}

}  // namespace

std::vector<double> item_response_prob(const Parameters& params, const ModelSpec& spec,
                                       int item, int cls, double z) {
  if (item < 0 || item >= spec.n_items()) throw std::out_of_range("item index out of range");
  if (cls < 0 || cls >= spec.n_classes) throw std::out_of_range("class index out of range");
  const int K = spec.cardinalities[item];
  const double* b0 = params.beta0[item].data() + static_cast<std::size_t>(cls) * K;
  const double* b = params.beta[item].data() + static_cast<std::size_t>(cls) * K;
  std::vector<double> scores(K);
  for (int k = 0; k < K; ++k) scores[k] = b0[k] + z * b[k];
  const double lse = log_sum_exp(scores);
  std::vector<double> probs(K);
  for (int k = 0; k < K; ++k) probs[k] = std::exp(scores[k] - lse);
  return probs;
}

double gaussian_logpdf(double z, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("gaussian_logpdf requires sigma2 > 0");
  const double d = z - mu;
  return -0.5 * (kLogTwoPi + std::log(sigma2)) - d * d / (2.0 * sigma2);
}

double log_component_density(const Parameters& params, const ModelSpec& spec,
                             const Dataset& data, int row, int cls) {
  if (row < 0 || row >= data.n) throw std::out_of_range("row index out of range");
  if (cls < 0 || cls >= spec.n_classes) throw std::out_of_range("class index out of range");
  return log_component_density_raw(params, spec, data, row, cls);
}

namespace detail {

PackedData PackedData::build(const Dataset& data) {
  PackedData out;
  out.z = Eigen::Map<const Eigen::ArrayXd>(data.z.data(), data.n);
  out.item_codes.resize(data.j);
  out.all_dichotomous = true;
  for (int item = 0; item < data.j; ++item) {
    out.all_dichotomous = out.all_dichotomous && data.cardinalities[item] == 2;
    out.item_codes[item].resize(data.n);
    for (int row = 0; row < data.n; ++row)
      out.item_codes[item][row] = static_cast<double>(data.code(row, item));
  }
  return out;
}

namespace {

// Per-class log numerators (log prior + log component density), one column
// per class. Dichotomous data takes the vectorized path.
Eigen::MatrixXd log_numerators(const Parameters& params, const ModelSpec& spec,
                               const Dataset& data, const PackedData& packed) {
  const int S = spec.n_classes;
  const std::vector<double> lp = log_class_prior(params);
  Eigen::MatrixXd num(data.n, S);
  if (packed.all_dichotomous) {
    Eigen::ArrayXd score(data.n);
    for (int s = 0; s < S; ++s) {
      auto col = num.col(s).array();
      if (spec.models_z()) {
        const double s2 = params.sigma2_of(s);
        col = lp[s] - 0.5 * (kLogTwoPi + std::log(s2)) -
              (packed.z - params.mu[s]).square() / (2.0 * s2);
      } else {
        col = lp[s];
      }
      for (int item = 0; item < data.j; ++item) {
        const double b0 = params.beta0[item][static_cast<std::size_t>(s) * 2 + 1];
        const double b = params.beta[item][static_cast<std::size_t>(s) * 2 + 1];
        score = b0 + b * packed.z;
        // log P(y | z, s) = y * score - softplus(score)
        col += packed.item_codes[item] * score -
               (score.max(0.0) + (1.0 + (-score.abs()).exp()).log());
      }
    }
  } else {
    for (int row = 0; row < data.n; ++row)
      for (int s = 0; s < S; ++s)
        num(row, s) = lp[s] + log_component_density_raw(params, spec, data, row, s);
  }
  return num;
}

[[noreturn]] void throw_nonfinite_row(const Eigen::ArrayXd& row_loglik) {
  for (Eigen::Index row = 0; row < row_loglik.size(); ++row)
    if (!std::isfinite(row_loglik[row]))
      throw NumericalError("non-finite likelihood term at row " + std::to_string(row));
  throw NumericalError("non-finite log-likelihood");
}

// Row-wise log-sum-exp of the numerator matrix.
Eigen::ArrayXd row_log_mixture(const Eigen::MatrixXd& num) {
  const Eigen::ArrayXd mx = num.rowwise().maxCoeff().array();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(num.rows());
  for (Eigen::Index s = 0; s < num.cols(); ++s) acc += (num.col(s).array() - mx).exp();
  return mx + acc.log();
}

}  // namespace

PosteriorPass posterior_pass(const Parameters& params, const ModelSpec& spec,
                             const Dataset& data) {
  const PackedData packed = PackedData::build(data);
  Eigen::MatrixXd num = log_numerators(params, spec, data, packed);
  const Eigen::ArrayXd row_ll = row_log_mixture(num);
  PosteriorPass out;
  out.loglik = row_ll.sum();
  if (!std::isfinite(out.loglik)) throw_nonfinite_row(row_ll);
  for (Eigen::Index s = 0; s < num.cols(); ++s)
    num.col(s).array() = (num.col(s).array() - row_ll).exp();
  out.posteriors = std::move(num);
  return out;
}

double log_likelihood_packed(const Parameters& params, const ModelSpec& spec,
                             const Dataset& data, const PackedData& packed) {
  const Eigen::MatrixXd num = log_numerators(params, spec, data, packed);
  const Eigen::ArrayXd row_ll = row_log_mixture(num);
  const double ll = row_ll.sum();
  if (!std::isfinite(ll)) throw_nonfinite_row(row_ll);
  return ll;
}

double log_likelihood_unchecked(const Parameters& params, const ModelSpec& spec,
                                const Dataset& data) {
  return log_likelihood_packed(params, spec, data, PackedData::build(data));
}

}  // namespace detail

double log_likelihood(const Parameters& params, const ModelSpec& spec, const Dataset& data) {
  spec.validate_against(data);
  params.validate(spec);
  return detail::log_likelihood_unchecked(params, spec, data);
}

Eigen::MatrixXd posteriors(const Parameters& params, const ModelSpec& spec, const Dataset& data) {
  spec.validate_against(data);
  params.validate(spec);
  return detail::posterior_pass(params, spec, data).posteriors;
}

int n_free_params(const ModelSpec& spec) {
  const int S = spec.n_classes;
  int count = S - 1;
  if (spec.models_z()) count += S + spec.n_sigma2();
  for (int item = 0; item < spec.n_items(); ++item) {
    const int Km1 = spec.cardinalities[item] - 1;
    count += S * Km1;  // intercepts
    if (spec.has_slopes()) {
      switch (spec.slope_constraints[item]) {
        case SlopeConstraint::Free: count += S * Km1; break;
        case SlopeConstraint::EqualAcrossClasses: count += Km1; break;
        case SlopeConstraint::Zero: break;
      }
    }
  }
  return count;
}

}  // namespace lcmix
