#include "lcmix/types.hpp"

#include <cmath>

namespace lcmix {

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::LCreg: return "lcreg";
    case ModelVariant::LCdist: return "lcdist";
    case ModelVariant::LCcw: return "lccw";
  }
  return "?";
}

std::string to_string(VarianceMode m) {
  return m == VarianceMode::Common ? "common" : "heteroscedastic";
}

std::string to_string(SlopeConstraint c) {
  switch (c) {
    case SlopeConstraint::Free: return "free";
    case SlopeConstraint::EqualAcrossClasses: return "equal";
    case SlopeConstraint::Zero: return "zero";
  }
  return "?";
}

ModelVariant model_variant_from_string(const std::string& s) {
  if (s == "lcreg") return ModelVariant::LCreg;
  if (s == "lcdist") return ModelVariant::LCdist;
  if (s == "lccw") return ModelVariant::LCcw;
  throw InputError("unknown model variant '" + s + "' (expected lcreg|lcdist|lccw)");
}

VarianceMode variance_mode_from_string(const std::string& s) {
  if (s == "hetero" || s == "heteroscedastic") return VarianceMode::Heteroscedastic;
  if (s == "common") return VarianceMode::Common;
  throw InputError("unknown variance mode '" + s + "' (expected hetero|common)");
}

SlopeConstraint slope_constraint_from_string(const std::string& s) {
  if (s == "free") return SlopeConstraint::Free;
  if (s == "equal") return SlopeConstraint::EqualAcrossClasses;
  if (s == "zero") return SlopeConstraint::Zero;
  throw InputError("unknown slope constraint '" + s + "' (expected free|equal|zero)");
}

void Dataset::validate() const {
  if (n < 1) throw InputError("dataset has no observations");
  if (j < 1) throw InputError("dataset has no indicator items");
  if (static_cast<int>(cardinalities.size()) != j)
    throw InputError("cardinalities length does not match item count");
  if (codes.size() != static_cast<std::size_t>(n) * j)
    throw InputError("indicator matrix has wrong size");
  if (static_cast<int>(z.size()) != n)
    throw InputError("external variable length does not match n");
  for (int item = 0; item < j; ++item) {
    if (cardinalities[item] < 2)
      throw InputError("item " + std::to_string(item) + " has cardinality < 2");
  }
  for (int row = 0; row < n; ++row) {
    for (int item = 0; item < j; ++item) {
      if (code(row, item) >= cardinalities[item])
        throw InputError("indicator code out of range at row " + std::to_string(row) +
                         ", item " + std::to_string(item));
    }
    if (!std::isfinite(z[row]))
      throw InputError("non-finite external value at row " + std::to_string(row));
  }
}

ModelSpec ModelSpec::make(ModelVariant variant, int n_classes, std::vector<int> cardinalities,
                          VarianceMode variance_mode, std::vector<SlopeConstraint> slopes) {
  ModelSpec spec;
  spec.variant = variant;
  spec.n_classes = n_classes;
  spec.cardinalities = std::move(cardinalities);
  spec.variance_mode = variance_mode;
  const std::size_t n_items = spec.cardinalities.size();
  if (variant == ModelVariant::LCdist) {
    spec.slope_constraints.assign(n_items, SlopeConstraint::Zero);
  } else if (slopes.empty()) {
    spec.slope_constraints.assign(n_items, SlopeConstraint::Free);
  } else {
    spec.slope_constraints = std::move(slopes);
  }
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (n_classes < 1) throw InputError("number of classes must be >= 1");
  if (cardinalities.empty()) throw InputError("model needs at least one indicator item");
  for (int k : cardinalities)
    if (k < 2) throw InputError("indicator cardinality must be >= 2");
  if (slope_constraints.size() != cardinalities.size())
    throw InputError("slope constraint list length does not match item count");
  if (variant == ModelVariant::LCdist) {
    for (SlopeConstraint c : slope_constraints)
      if (c != SlopeConstraint::Zero)
        throw InputError("LCdist requires all slope constraints to be zero");
  }
}

void ModelSpec::validate_against(const Dataset& data) const {
  if (data.j != n_items())
    throw InputError("dataset has " + std::to_string(data.j) + " items, model expects " +
                     std::to_string(n_items()));
  for (int item = 0; item < n_items(); ++item) {
    if (data.cardinalities[item] != cardinalities[item])
      throw InputError("cardinality mismatch at item " + std::to_string(item));
  }
}

Parameters Parameters::zeros(const ModelSpec& spec) {
  Parameters p;
  p.theta.assign(spec.n_classes, 0.0);
  if (spec.models_z()) {
    p.mu.assign(spec.n_classes, 0.0);
    p.sigma2.assign(spec.n_sigma2(), 1.0);
  }
  p.beta0.resize(spec.n_items());
  p.beta.resize(spec.n_items());
  for (int item = 0; item < spec.n_items(); ++item) {
    const std::size_t len = static_cast<std::size_t>(spec.n_classes) * spec.cardinalities[item];
    p.beta0[item].assign(len, 0.0);
    p.beta[item].assign(len, 0.0);
  }
  return p;
}

std::vector<double> Parameters::class_proportions() const {
  double mx = 0.0;
  for (double t : theta) mx = std::max(mx, t);
  double sum = 0.0;
  std::vector<double> p(theta.size());
  for (std::size_t s = 0; s < theta.size(); ++s) {
    p[s] = std::exp(theta[s] - mx);
    sum += p[s];
  }
  for (double& v : p) v /= sum;
  return p;
}

void Parameters::validate(const ModelSpec& spec) const {
  const int S = spec.n_classes;
  if (static_cast<int>(theta.size()) != S) throw InputError("theta has wrong length");
  if (theta[0] != 0.0) throw InputError("theta[0] must be exactly 0 (reference class)");
  for (double t : theta)
    if (!std::isfinite(t)) throw InputError("non-finite mixing logit");
  if (spec.models_z()) {
    if (static_cast<int>(mu.size()) != S) throw InputError("mu has wrong length");
    if (static_cast<int>(sigma2.size()) != spec.n_sigma2())
      throw InputError("sigma2 has wrong length");
    for (double v : sigma2)
      if (!(v > 0.0)) throw InputError("sigma2 entries must be strictly positive");
  } else {
    if (!mu.empty() || !sigma2.empty())
      throw InputError("LCreg parameters must not carry mu/sigma2");
  }
  if (static_cast<int>(beta0.size()) != spec.n_items() ||
      static_cast<int>(beta.size()) != spec.n_items())
    throw InputError("measurement parameter blocks have wrong item count");
  for (int item = 0; item < spec.n_items(); ++item) {
    const int K = spec.cardinalities[item];
    if (static_cast<int>(beta0[item].size()) != S * K ||
        static_cast<int>(beta[item].size()) != S * K)
      throw InputError("measurement block has wrong size at item " + std::to_string(item));
    for (int s = 0; s < S; ++s) {
      if (beta0[item][static_cast<std::size_t>(s) * K] != 0.0 ||
          beta[item][static_cast<std::size_t>(s) * K] != 0.0)
        throw InputError("baseline-category logits must be exactly 0");
    }
    if (!spec.has_slopes() || spec.slope_constraints[item] == SlopeConstraint::Zero) {
      for (double b : beta[item])
        if (b != 0.0) throw InputError("slopes must be 0 under a zero constraint");
    }
  }
}

}  // namespace lcmix
