#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcmix/types.hpp"

namespace lcmix {

/// Flat view of a model's free parameters:
///   [ theta_1..theta_{S-1} | mu_0..mu_{S-1} | sigma2 | beta0 blocks | beta blocks ]
/// mu/sigma2 are present only when z is modeled; sigma2 is a single entry in
/// common-variance mode. beta0 runs item-major, then class, then category
/// (k >= 1); beta follows the item's slope constraint (free: per class,
/// equal: one shared block, zero: absent). size() == n_free_params(spec).
class ParameterLayout {
public:
  explicit ParameterLayout(const ModelSpec& spec);

  int size() const { return size_; }
  const ModelSpec& spec() const { return spec_; }

  int theta_index(int s) const;                       // s in [1, S)
  int mu_index(int s) const;                          // -1 when z not modeled
  int sigma2_index(int s) const;                      // common mode: same index for every s
  int beta0_index(int item, int cls, int cat) const;  // cat >= 1
  int beta_index(int item, int cls, int cat) const;   // -1 when constrained to zero

  Eigen::VectorXd pack(const Parameters& params) const;
  Parameters unpack(const Eigen::VectorXd& x) const;

  /// Marks entries that are variances (differentiated on the log scale).
  const std::vector<bool>& is_variance() const { return is_variance_; }

  /// Human-readable entry names; item_names (optional) label the indicators.
  std::vector<std::string> names(const std::vector<std::string>& item_names = {}) const;

private:
  ModelSpec spec_;
  int size_ = 0;
  int mu_off_ = -1;
  int sigma2_off_ = -1;
  std::vector<int> beta0_off_;
  std::vector<int> beta_off_;  // -1 for zero-constrained items
  std::vector<bool> is_variance_;
};

}  // namespace lcmix
