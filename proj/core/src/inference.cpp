#include "lcmix/inference.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lcmix/model.hpp"
#include "lcmix/special_functions.hpp"
#include "parallel_util.hpp"

namespace lcmix {

namespace {

constexpr double kFdStepScale = 1e-5;

std::vector<double> fd_steps(const Eigen::VectorXd& x) {
  std::vector<double> h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) h[i] = kFdStepScale * (1.0 + std::fabs(x[i]));
  return h;
}

}  // namespace

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x) {
  const auto h = fd_steps(x);
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h[i];
    xm[i] -= h[i];
    g[i] = (f(xp) - f(xm)) / (2.0 * h[i]);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x) {
  const int p = static_cast<int>(x.size());
  const auto h = fd_steps(x);
  const double f0 = f(x);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) pairs.emplace_back(i, j);

  Eigen::MatrixXd hess(p, p);
  detail::parallel_for(
      p + static_cast<int>(pairs.size()),
      [&](int t) {
        if (t < p) {
          Eigen::VectorXd xp = x, xm = x;
          xp[t] += h[t];
          xm[t] -= h[t];
          hess(t, t) = (f(xp) - 2.0 * f0 + f(xm)) / (h[t] * h[t]);
        } else {
          const auto [i, j] = pairs[t - p];
          Eigen::VectorXd v = x;
          v[i] += h[i];
          v[j] += h[j];
          const double fpp = f(v);
          v[j] -= 2.0 * h[j];
          const double fpm = f(v);
          v[i] -= 2.0 * h[i];
          const double fmm = f(v);
          v[j] += 2.0 * h[j];
          const double fmp = f(v);
          hess(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        }
      },
      detail::default_thread_count());
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) hess(j, i) = hess(i, j);
  return hess;
}

Eigen::MatrixXd observed_information(const Parameters& params, const ModelSpec& spec,
                                     const Dataset& data) {
  spec.validate_against(data);
  params.validate(spec);
  const ParameterLayout layout(spec);
  const Eigen::VectorXd natural = layout.pack(params);
  const std::vector<bool>& isvar = layout.is_variance();

  Eigen::VectorXd t = natural;
  for (int i = 0; i < layout.size(); ++i)
    if (isvar[i]) t[i] = std::log(natural[i]);

  const detail::PackedData packed = detail::PackedData::build(data);
  const auto f = [&](const Eigen::VectorXd& tv) {
    Eigen::VectorXd nat = tv;
    for (int i = 0; i < layout.size(); ++i)
      if (isvar[i]) nat[i] = std::exp(tv[i]);
    return detail::log_likelihood_packed(layout.unpack(nat), spec, data, packed);
  };

  const Eigen::MatrixXd ht = fd_hessian(f, t);
  const Eigen::MatrixXd info_t = -0.5 * (ht + ht.transpose());

  // Back to the natural scale: I = D^{-1} I_t D^{-1}, D = d(natural)/d(transformed).
  Eigen::VectorXd dinv = Eigen::VectorXd::Ones(layout.size());
  for (int i = 0; i < layout.size(); ++i)
    if (isvar[i]) dinv[i] = 1.0 / natural[i];
  return dinv.asDiagonal() * info_t * dinv.asDiagonal();
}

CovarianceResult covariance_from_information(const Eigen::MatrixXd& information) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(information);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv(ev.size());
  bool pd = true;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) {
      inv[i] = 1.0 / ev[i];
    } else {
      inv[i] = 0.0;
      pd = false;
    }
  }
  CovarianceResult out;
  out.covariance = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  out.pseudo_inverse = !pd;
  return out;
}

void add_standard_errors(FitResult& fit, const Dataset& data) {
  const Eigen::MatrixXd info = observed_information(fit.params, fit.spec, data);
  CovarianceResult cov = covariance_from_information(info);
  if (cov.pseudo_inverse)
    fit.flags.push_back("information matrix not positive definite; covariance from pseudo-inverse");
  fit.se = cov.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.covariance = std::move(cov.covariance);
}

WaldResult wald_test(const Eigen::VectorXd& estimate, const Eigen::MatrixXd& covariance,
                     const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                     const std::string& description) {
  const int q = static_cast<int>(R.rows());
  if (q < 1) throw InputError("Wald test needs at least one constraint row");
  if (R.cols() != estimate.size() || r.size() != q || covariance.rows() != estimate.size() ||
      covariance.cols() != estimate.size())
    throw InputError("dimension mismatch in Wald test");

  const Eigen::VectorXd d = R * estimate - r;
  Eigen::MatrixXd m = R * covariance * R.transpose();
  m = 0.5 * (m + m.transpose());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (lu.rank() < q) {
    // Identify the first row that adds no new direction.
    int prev_rank = 0;
    for (int i = 0; i < q; ++i) {
      Eigen::FullPivLU<Eigen::MatrixXd> lr(R.topRows(i + 1));
      const int rank = static_cast<int>(lr.rank());
      if (rank == prev_rank)
        throw NumericalError("singular Wald constraint system: row " + std::to_string(i) +
                             " is redundant");
      prev_rank = rank;
    }
    throw NumericalError(
        "singular Wald constraint system: covariance is rank-deficient along the constraints");
  }
  const double w = std::max(0.0, d.dot(lu.solve(d)));

  WaldResult out;
  out.statistic = w;
  out.df = q;
  out.p_value = chi_square_upper_tail(w, q);
  out.constraint_description = description;
  return out;
}

namespace {

const Eigen::MatrixXd& require_covariance(const FitResult& fit) {
  if (!fit.covariance.has_value())
    throw InputError("fit carries no covariance; compute standard errors first");
  return *fit.covariance;
}

}  // namespace

WaldResult wald_equal_means(const FitResult& fit) {
  if (!fit.spec.models_z())
    throw InputError("equal-means test needs a variant that models the external variable");
  const int S = fit.spec.n_classes;
  if (S < 2) throw InputError("equal-means test needs at least two classes");
  const ParameterLayout layout(fit.spec);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(S - 1, layout.size());
  for (int s = 0; s + 1 < S; ++s) {
    R(s, layout.mu_index(s)) = 1.0;
    R(s, layout.mu_index(s + 1)) = -1.0;
  }
  return wald_test(layout.pack(fit.params), require_covariance(fit), R,
                   Eigen::VectorXd::Zero(S - 1), "equal class means");
}

WaldResult wald_equal_variances(const FitResult& fit) {
  if (!fit.spec.models_z())
    throw InputError("equal-variances test needs a variant that models the external variable");
  if (fit.spec.variance_mode == VarianceMode::Common)
    throw InputError("variances are pooled by construction; nothing to test");
  const int S = fit.spec.n_classes;
  if (S < 2) throw InputError("equal-variances test needs at least two classes");
  const ParameterLayout layout(fit.spec);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(S - 1, layout.size());
  for (int s = 0; s + 1 < S; ++s) {
    R(s, layout.sigma2_index(s)) = 1.0;
    R(s, layout.sigma2_index(s + 1)) = -1.0;
  }
  return wald_test(layout.pack(fit.params), require_covariance(fit), R,
                   Eigen::VectorXd::Zero(S - 1), "equal class variances");
}

DirectEffectTests wald_direct_effects(const FitResult& fit, int item) {
  if (!fit.spec.has_slopes())
    throw InputError("direct-effect tests need a variant with direct effects");
  if (item < 0 || item >= fit.spec.n_items()) throw InputError("item index out of range");
  if (fit.spec.slope_constraints[item] != SlopeConstraint::Free)
    throw InputError("item " + std::to_string(item) +
                     " has constrained slopes; direct-effect tests need free slopes");
  const int S = fit.spec.n_classes;
  const int Km1 = fit.spec.cardinalities[item] - 1;
  const ParameterLayout layout(fit.spec);
  const Eigen::VectorXd estimate = layout.pack(fit.params);
  const Eigen::MatrixXd& cov = require_covariance(fit);
  const std::string label = "item " + std::to_string(item);

  DirectEffectTests out;
  {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(S * Km1, layout.size());
    int row = 0;
    for (int s = 0; s < S; ++s)
      for (int k = 1; k <= Km1; ++k) R(row++, layout.beta_index(item, s, k)) = 1.0;
    out.zero_test = wald_test(estimate, cov, R, Eigen::VectorXd::Zero(S * Km1),
                              label + " direct effects all zero");
  }
  if (S < 2)
    throw InputError("cross-class equality of direct effects is undefined for S = 1");
  {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero((S - 1) * Km1, layout.size());
    int row = 0;
    for (int s = 0; s + 1 < S; ++s) {
      for (int k = 1; k <= Km1; ++k) {
        R(row, layout.beta_index(item, s, k)) = 1.0;
        R(row, layout.beta_index(item, s + 1, k)) = -1.0;
        ++row;
      }
    }
    out.equality_test = wald_test(estimate, cov, R, Eigen::VectorXd::Zero((S - 1) * Km1),
                                  label + " direct effects equal across classes");
  }
  return out;
}

}  // namespace lcmix
