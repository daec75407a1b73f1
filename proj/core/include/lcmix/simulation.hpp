#pragma once

#include <cstdint>

#include "lcmix/estimation.hpp"
#include "lcmix/types.hpp"

namespace lcmix {

/// Two-class population design: dichotomous indicators with class-signed
/// intercepts +-b, an external variable drawn standard normal (LCreg
/// generator) or from a class mixture of normals (LCdist/LCcw), and per-class
/// direct-effect slopes shared by all items (LCreg/LCcw generators).
struct StudyDesign {
  ModelVariant generator = ModelVariant::LCdist;
  int n = 30000;
  int n_classes = 2;
  int n_items = 6;
  std::vector<double> mix = {0.7, 0.3};
  std::vector<double> z_means = {-1.0, 1.0};  // ignored by the LCreg generator
  double z_variance = 1.0;
  std::vector<double> slopes = {-0.5, 1.0};  // per class; ignored by the LCdist generator
  double intercept_magnitude = 1.0;          // b: beta0 = +b (even classes), -b (odd classes)

  static StudyDesign preset(ModelVariant generator, int n = 30000);

  /// The correctly specified model for data from this generator.
  ModelSpec model_spec() const;
  Parameters true_parameters() const;
  void validate() const;
};

struct GeneratedStudy {
  Dataset data;
  Partition truth;
  Parameters true_params;
};

/// Deterministic draw: per row, class then z then the indicators.
GeneratedStudy generate(const StudyDesign& design, std::uint64_t seed);

struct CalibrationResult {
  double intercept_magnitude = 0.0;
  double achieved_r2 = 0.0;
};

/// Bisection over the intercept magnitude b in [0.1, 5] until the entropy
/// R^2 of the correctly specified fit on a calibration draw (n = 20000,
/// common random numbers across candidates) is within 0.02 of target_r2.
/// Throws NumericalError when the target lies outside the achievable range.
CalibrationResult calibrate_separation(const StudyDesign& design, double target_r2,
                                       std::uint64_t seed, const FitConfig& fit_config = {
                                           .n_starts = 10,
                                       });

}  // namespace lcmix
