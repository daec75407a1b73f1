#include "lcmix/simulation.hpp"

#include <cmath>
#include <sstream>

#include "lcmix/diagnostics.hpp"
#include "lcmix/rng.hpp"

namespace lcmix {

StudyDesign StudyDesign::preset(ModelVariant generator, int n) {
  StudyDesign d;
  d.generator = generator;
  d.n = n;
  return d;
}

ModelSpec StudyDesign::model_spec() const {
  return ModelSpec::make(generator, n_classes, std::vector<int>(n_items, 2));
}

void StudyDesign::validate() const {
  if (n < 1) throw InputError("design needs n >= 1");
  if (n_classes < 1) throw InputError("design needs at least one class");
  if (n_items < 1) throw InputError("design needs at least one item");
  if (static_cast<int>(mix.size()) != n_classes)
    throw InputError("mix length does not match the class count");
  double sum = 0.0;
  for (double p : mix) {
    if (!(p > 0.0)) throw InputError("mix proportions must be positive");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw InputError("mix proportions must sum to 1");
  if (generator != ModelVariant::LCreg) {
    if (static_cast<int>(z_means.size()) != n_classes)
      throw InputError("z_means length does not match the class count");
    if (!(z_variance > 0.0)) throw InputError("z_variance must be positive");
  }
  if (generator != ModelVariant::LCdist && static_cast<int>(slopes.size()) != n_classes)
    throw InputError("slopes length does not match the class count");
  if (!(intercept_magnitude >= 0.0)) throw InputError("intercept magnitude must be >= 0");
}

Parameters StudyDesign::true_parameters() const {
  const ModelSpec spec = model_spec();
  Parameters p = Parameters::zeros(spec);
  for (int s = 1; s < n_classes; ++s) p.theta[s] = std::log(mix[s] / mix[0]);
  if (spec.models_z()) {
    p.mu = z_means;
    p.sigma2.assign(spec.n_sigma2(), z_variance);
  }
  for (int item = 0; item < n_items; ++item) {
    for (int s = 0; s < n_classes; ++s) {
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      p.beta0[item][static_cast<std::size_t>(s) * 2 + 1] = sign * intercept_magnitude;
      if (spec.has_slopes()) p.beta[item][static_cast<std::size_t>(s) * 2 + 1] = slopes[s];
    }
  }
  return p;
}

GeneratedStudy generate(const StudyDesign& design, std::uint64_t seed) {
  design.validate();
  Rng rng(seed);
  GeneratedStudy out;
  out.data.n = design.n;
  out.data.j = design.n_items;
  out.data.cardinalities.assign(design.n_items, 2);
  out.data.codes.resize(static_cast<std::size_t>(design.n) * design.n_items);
  out.data.z.resize(design.n);
  for (int item = 0; item < design.n_items; ++item)
    out.data.column_names.push_back("item" + std::to_string(item + 1));
  out.data.column_names.push_back("z");
  out.truth.labels.resize(design.n);

  const bool class_conditional_z = design.generator != ModelVariant::LCreg;
  const bool has_slopes = design.generator != ModelVariant::LCdist;
  const double z_sd = class_conditional_z ? std::sqrt(design.z_variance) : 1.0;

  for (int row = 0; row < design.n; ++row) {
    const int cls = rng.categorical(design.mix);
    out.truth.labels[row] = cls;
    const double z =
        class_conditional_z ? rng.normal(design.z_means[cls], z_sd) : rng.normal();
    out.data.z[row] = z;
    const double sign = (cls % 2 == 0) ? 1.0 : -1.0;
    const double logit =
        sign * design.intercept_magnitude + (has_slopes ? design.slopes[cls] * z : 0.0);
    const double p1 = 1.0 / (1.0 + std::exp(-logit));
    for (int item = 0; item < design.n_items; ++item)
      out.data.set_code(row, item, static_cast<std::uint8_t>(rng.bernoulli(p1)));
  }
  out.true_params = design.true_parameters();
  return out;
}

CalibrationResult calibrate_separation(const StudyDesign& design, double target_r2,
                                       std::uint64_t seed, const FitConfig& fit_config) {
  if (!(target_r2 > 0.0 && target_r2 < 1.0))
    throw InputError("target R^2 must lie in (0, 1)");
  constexpr double kTol = 0.02;
  constexpr double kLo = 0.1, kHi = 5.0;
  constexpr int kCalibrationN = 20000;

  StudyDesign cal = design;
  cal.n = std::min(design.n, kCalibrationN);
  FitConfig config = fit_config;
  config.rng_seed = split_mix64(seed ^ 0x5eedULL);

  const auto achieved = [&](double b) {
    StudyDesign d = cal;
    d.intercept_magnitude = b;
    // Same seed for every candidate: common random numbers keep R^2(b) monotone.
    const GeneratedStudy gen = generate(d, seed);
    const FitResult fit = lcmix::fit(d.model_spec(), gen.data, config);
    return entropy_r2(fit.posteriors, fit.params.class_proportions());
  };

  double lo = kLo, hi = kHi;
  double r_lo = achieved(lo);
  if (std::fabs(r_lo - target_r2) < kTol) return {lo, r_lo};
  double r_hi = achieved(hi);
  if (std::fabs(r_hi - target_r2) < kTol) return {hi, r_hi};
  if (!(r_lo < target_r2 && target_r2 < r_hi)) {
    std::ostringstream msg;
    msg << "target R^2 " << target_r2 << " unreachable: achieved range [" << r_lo << ", " << r_hi
        << "] for b in [" << kLo << ", " << kHi << "]";
    throw NumericalError(msg.str());
  }
  for (int iter = 0; iter < 40 && hi - lo > 1e-4; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r_mid = achieved(mid);
    if (std::fabs(r_mid - target_r2) < kTol) return {mid, r_mid};
    if (r_mid < target_r2) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::ostringstream msg;
  msg << "calibration bracket collapsed near b = " << 0.5 * (lo + hi)
      << " without reaching R^2 " << target_r2 << " +- " << kTol;
  throw NumericalError(msg.str());
}

}  // namespace lcmix
