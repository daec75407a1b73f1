#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcmix {

/// Thrown on malformed user input (data, column specs, option combinations).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when maximum-likelihood estimation cannot produce a usable result.
class EstimationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a numerical computation leaves its valid domain (non-finite
/// likelihood, degenerate responsibility column, singular constraint system).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ModelVariant {
  LCreg,   // conditional model: indicators given external variable, z not modeled
  LCdist,  // distal outcome: class-conditional Gaussian z, no direct effects
  LCcw     // cluster-weighted: Gaussian z and direct effects on indicators
};

enum class VarianceMode {
  Heteroscedastic,  // class-specific sigma^2
  Common            // one sigma^2 pooled across classes
};

enum class SlopeConstraint {
  Free,               // per-class direct-effect slopes
  EqualAcrossClasses, // one slope vector shared by all classes
  Zero                // no direct effect for this item
};

std::string to_string(ModelVariant v);
std::string to_string(VarianceMode m);
std::string to_string(SlopeConstraint c);
ModelVariant model_variant_from_string(const std::string& s);
VarianceMode variance_mode_from_string(const std::string& s);
SlopeConstraint slope_constraint_from_string(const std::string& s);

/// Categorical indicators plus one continuous external variable.
/// Indicator codes are 0-based; code k of item j must satisfy k < cardinalities[j].
struct Dataset {
  int n = 0;  // observations
  int j = 0;  // indicator items
  std::vector<std::uint8_t> codes;       // row-major n x j
  std::vector<int> cardinalities;        // per item, >= 2
  std::vector<double> z;                 // length n
  std::vector<std::string> column_names; // j indicator names then the z name

  std::uint8_t code(int row, int item) const { return codes[static_cast<std::size_t>(row) * j + item]; }
  void set_code(int row, int item, std::uint8_t value) { codes[static_cast<std::size_t>(row) * j + item] = value; }

  /// Throws InputError on shape mismatch, out-of-range codes, or non-finite z.
  void validate() const;
};

struct ModelSpec {
  ModelVariant variant = ModelVariant::LCdist;
  int n_classes = 1;  // S
  std::vector<int> cardinalities;
  VarianceMode variance_mode = VarianceMode::Heteroscedastic;
  std::vector<SlopeConstraint> slope_constraints;  // per item

  /// Builds a spec with consistent slope constraints: LCdist forces Zero
  /// everywhere; LCreg/LCcw default to Free unless `slopes` is given.
  static ModelSpec make(ModelVariant variant, int n_classes, std::vector<int> cardinalities,
                        VarianceMode variance_mode = VarianceMode::Heteroscedastic,
                        std::vector<SlopeConstraint> slopes = {});

  int n_items() const { return static_cast<int>(cardinalities.size()); }
  bool models_z() const { return variant != ModelVariant::LCreg; }
  bool has_slopes() const { return variant != ModelVariant::LCdist; }
  int n_sigma2() const { return variance_mode == VarianceMode::Common ? 1 : n_classes; }

  void validate() const;
  /// Shape compatibility with a dataset (item count and cardinalities).
  void validate_against(const Dataset& data) const;
};

/// Model parameters. Mixing logits use the first class as reference
/// (theta[0] == 0); measurement logits use the first category as baseline
/// (beta0/beta entries for category 0 are exactly 0).
///
/// beta0[j] and beta[j] are flat S x K_j blocks indexed as [s * K_j + k].
struct Parameters {
  std::vector<double> theta;   // length S, theta[0] == 0
  std::vector<double> mu;      // length S; empty for LCreg
  std::vector<double> sigma2;  // length S (heteroscedastic) or 1 (common); empty for LCreg
  std::vector<std::vector<double>> beta0;  // intercept logits per item
  std::vector<std::vector<double>> beta;   // direct-effect slopes per item

  static Parameters zeros(const ModelSpec& spec);

  double beta0_at(int item, int cls, int cat, const ModelSpec& spec) const {
    return beta0[item][static_cast<std::size_t>(cls) * spec.cardinalities[item] + cat];
  }
  double beta_at(int item, int cls, int cat, const ModelSpec& spec) const {
    return beta[item][static_cast<std::size_t>(cls) * spec.cardinalities[item] + cat];
  }
  double sigma2_of(int cls) const { return sigma2.size() == 1 ? sigma2[0] : sigma2[cls]; }

  /// Mixing proportions softmax(theta).
  std::vector<double> class_proportions() const;

  void validate(const ModelSpec& spec) const;
};

/// Hard class assignment per observation.
struct Partition {
  std::vector<int> labels;

  int n() const { return static_cast<int>(labels.size()); }
};

struct FitResult {
  Parameters params;
  ModelSpec spec;
  double loglik = 0.0;
  Eigen::MatrixXd posteriors;  // n x S, rows sum to 1
  int n_params = 0;
  bool converged = false;
  int n_iterations = 0;
  int start_index = 0;
  std::vector<std::string> flags;  // numerical warnings (clamped logits, pseudo-inverse, ...)

  // Filled by add_standard_errors(); aligned to the free-parameter vector.
  std::optional<Eigen::VectorXd> se;
  std::optional<Eigen::MatrixXd> covariance;
};

}  // namespace lcmix
