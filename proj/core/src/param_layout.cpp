#include "lcmix/param_layout.hpp"

#include <stdexcept>

#include "lcmix/model.hpp"

namespace lcmix {

ParameterLayout::ParameterLayout(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  const int S = spec_.n_classes;
  int off = S - 1;  // theta_1..theta_{S-1}
  if (spec_.models_z()) {
    mu_off_ = off;
    off += S;
    sigma2_off_ = off;
    off += spec_.n_sigma2();
  }
  beta0_off_.resize(spec_.n_items());
  beta_off_.assign(spec_.n_items(), -1);
  for (int item = 0; item < spec_.n_items(); ++item) {
    const int Km1 = spec_.cardinalities[item] - 1;
    beta0_off_[item] = off;
    off += S * Km1;
  }
  for (int item = 0; item < spec_.n_items(); ++item) {
    const int Km1 = spec_.cardinalities[item] - 1;
    if (!spec_.has_slopes()) continue;
    switch (spec_.slope_constraints[item]) {
      case SlopeConstraint::Free:
        beta_off_[item] = off;
        off += S * Km1;
        break;
      case SlopeConstraint::EqualAcrossClasses:
        beta_off_[item] = off;
        off += Km1;
        break;
      case SlopeConstraint::Zero:
        break;
    }
  }
  size_ = off;
  if (size_ != n_free_params(spec_))
    throw std::logic_error("parameter layout size disagrees with n_free_params");
  is_variance_.assign(size_, false);
  if (sigma2_off_ >= 0)
    for (int i = 0; i < spec_.n_sigma2(); ++i) is_variance_[sigma2_off_ + i] = true;
}

int ParameterLayout::theta_index(int s) const {
  if (s < 1 || s >= spec_.n_classes) throw std::out_of_range("theta index requires 1 <= s < S");
  return s - 1;
}

int ParameterLayout::mu_index(int s) const {
  if (mu_off_ < 0) return -1;
  if (s < 0 || s >= spec_.n_classes) throw std::out_of_range("class index out of range");
  return mu_off_ + s;
}

int ParameterLayout::sigma2_index(int s) const {
  if (sigma2_off_ < 0) return -1;
  if (s < 0 || s >= spec_.n_classes) throw std::out_of_range("class index out of range");
  return spec_.variance_mode == VarianceMode::Common ? sigma2_off_ : sigma2_off_ + s;
}

int ParameterLayout::beta0_index(int item, int cls, int cat) const {
  const int K = spec_.cardinalities.at(item);
  if (cls < 0 || cls >= spec_.n_classes || cat < 1 || cat >= K)
    throw std::out_of_range("beta0 index out of range");
  return beta0_off_[item] + cls * (K - 1) + (cat - 1);
}

int ParameterLayout::beta_index(int item, int cls, int cat) const {
  const int K = spec_.cardinalities.at(item);
  if (cls < 0 || cls >= spec_.n_classes || cat < 1 || cat >= K)
    throw std::out_of_range("beta index out of range");
  if (beta_off_[item] < 0) return -1;
  if (spec_.slope_constraints[item] == SlopeConstraint::EqualAcrossClasses)
    return beta_off_[item] + (cat - 1);
  return beta_off_[item] + cls * (K - 1) + (cat - 1);
}

Eigen::VectorXd ParameterLayout::pack(const Parameters& params) const {
  Eigen::VectorXd x(size_);
  const int S = spec_.n_classes;
  for (int s = 1; s < S; ++s) x[theta_index(s)] = params.theta[s];
  if (spec_.models_z()) {
    for (int s = 0; s < S; ++s) x[mu_index(s)] = params.mu[s];
    for (int i = 0; i < spec_.n_sigma2(); ++i) x[sigma2_off_ + i] = params.sigma2[i];
  }
  for (int item = 0; item < spec_.n_items(); ++item) {
    const int K = spec_.cardinalities[item];
    for (int s = 0; s < S; ++s)
      for (int k = 1; k < K; ++k) x[beta0_index(item, s, k)] = params.beta0_at(item, s, k, spec_);
    if (beta_off_[item] < 0) continue;
    if (spec_.slope_constraints[item] == SlopeConstraint::EqualAcrossClasses) {
      for (int k = 1; k < K; ++k) x[beta_index(item, 0, k)] = params.beta_at(item, 0, k, spec_);
    } else {
      for (int s = 0; s < S; ++s)
        for (int k = 1; k < K; ++k) x[beta_index(item, s, k)] = params.beta_at(item, s, k, spec_);
    }
  }
  return x;
}

Parameters ParameterLayout::unpack(const Eigen::VectorXd& x) const {
  if (x.size() != size_) throw std::invalid_argument("free-parameter vector has wrong length");
  Parameters params = Parameters::zeros(spec_);
  const int S = spec_.n_classes;
  for (int s = 1; s < S; ++s) params.theta[s] = x[theta_index(s)];
  if (spec_.models_z()) {
    for (int s = 0; s < S; ++s) params.mu[s] = x[mu_index(s)];
    for (int i = 0; i < spec_.n_sigma2(); ++i) params.sigma2[i] = x[sigma2_off_ + i];
  }
  for (int item = 0; item < spec_.n_items(); ++item) {
    const int K = spec_.cardinalities[item];
    for (int s = 0; s < S; ++s)
      for (int k = 1; k < K; ++k)
        params.beta0[item][static_cast<std::size_t>(s) * K + k] = x[beta0_index(item, s, k)];
    if (beta_off_[item] < 0) continue;
    for (int s = 0; s < S; ++s)
      for (int k = 1; k < K; ++k)
        params.beta[item][static_cast<std::size_t>(s) * K + k] = x[beta_index(item, s, k)];
  }
  return params;
}

std::vector<std::string> ParameterLayout::names(const std::vector<std::string>& item_names) const {
  auto item_label = [&](int item) {
    return item < static_cast<int>(item_names.size()) ? item_names[item]
                                                      : "item" + std::to_string(item + 1);
  };
  std::vector<std::string> out(size_);
  const int S = spec_.n_classes;
  for (int s = 1; s < S; ++s) out[theta_index(s)] = "theta[" + std::to_string(s + 1) + "]";
  if (spec_.models_z()) {
    for (int s = 0; s < S; ++s) out[mu_index(s)] = "mu[" + std::to_string(s + 1) + "]";
    if (spec_.variance_mode == VarianceMode::Common) {
      out[sigma2_off_] = "sigma2";
    } else {
      for (int s = 0; s < S; ++s) out[sigma2_index(s)] = "sigma2[" + std::to_string(s + 1) + "]";
    }
  }
  for (int item = 0; item < spec_.n_items(); ++item) {
    const int K = spec_.cardinalities[item];
    for (int s = 0; s < S; ++s) {
      for (int k = 1; k < K; ++k) {
        std::string suffix = K > 2 ? ".k" + std::to_string(k) : "";
        out[beta0_index(item, s, k)] =
            item_label(item) + ".b0" + suffix + ".c" + std::to_string(s + 1);
      }
    }
    if (beta_off_[item] < 0) continue;
    const bool shared = spec_.slope_constraints[item] == SlopeConstraint::EqualAcrossClasses;
    for (int k = 1; k < K; ++k) {
      std::string suffix = K > 2 ? ".k" + std::to_string(k) : "";
      if (shared) {
        out[beta_index(item, 0, k)] = item_label(item) + ".b" + suffix;
      } else {
        for (int s = 0; s < S; ++s)
          out[beta_index(item, s, k)] =
              item_label(item) + ".b" + suffix + ".c" + std::to_string(s + 1);
      }
    }
  }
  return out;
}

}  // namespace lcmix
