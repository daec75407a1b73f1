#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcmix/estimation.hpp"
#include "lcmix/inference.hpp"
#include "lcmix/model.hpp"
#include "lcmix/simulation.hpp"
#include "lcmix/special_functions.hpp"
#include "test_util.hpp"

using namespace lcmix;

namespace {

FitConfig quick_config(std::uint64_t seed, int starts = 4) {
  FitConfig c;
  c.n_starts = starts;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_CASE("fd_hessian recovers the matrix of a quadratic") {
  Eigen::MatrixXd a(4, 4);
  a << 4.0, 1.0, 0.5, 0.0,
       1.0, 3.0, 0.2, 0.1,
       0.5, 0.2, 2.0, 0.3,
       0.0, 0.1, 0.3, 1.5;
  const Eigen::VectorXd center = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  const auto f = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - center;
    return -0.5 * d.dot(a * d);
  };
  Eigen::VectorXd x0(4);
  x0 << 0.3, -0.7, 1.1, 0.0;
  const Eigen::MatrixXd h = fd_hessian(f, x0);
  const Eigen::MatrixXd info = -h;
  CHECK((info - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff() < 1e-5);

  const Eigen::VectorXd g = fd_gradient(f, x0);
  const Eigen::VectorXd expected = -a * (x0 - center);
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("covariance from a quadratic oracle matches the analytic inverse") {
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.3, 0.0,
       0.3, 1.0, 0.2,
       0.0, 0.2, 0.5;
  const CovarianceResult cov = covariance_from_information(a);
  CHECK(!cov.pseudo_inverse);
  const Eigen::MatrixXd identity = cov.covariance * a;
  CHECK((identity - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  // symmetric within 1e-10
  CHECK((cov.covariance - cov.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  // singular information falls back to a PSD pseudo-inverse
  Eigen::MatrixXd sing = Eigen::MatrixXd::Zero(2, 2);
  sing(0, 0) = 1.0;
  const CovarianceResult psd = covariance_from_information(sing);
  CHECK(psd.pseudo_inverse);
  CHECK(psd.covariance(0, 0) == doctest::Approx(1.0));
  CHECK(psd.covariance(1, 1) >= 0.0);
}

TEST_CASE("observed information for the S=1 Gaussian slice") {
  Rng gen(61);
  const Dataset data = test_util::random_dataset(gen, 400, {2});
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCdist, 1, {2});
  FitResult fit = lcmix::fit(spec, data, quick_config(1, 1));
  const Eigen::MatrixXd info = observed_information(fit.params, spec, data);
  const ParameterLayout layout(spec);
  const int mu_idx = layout.mu_index(0);
  const double expected = data.n / fit.params.sigma2[0];
  CHECK(info(mu_idx, mu_idx) == doctest::Approx(expected).epsilon(1e-3));

  add_standard_errors(fit, data);
  REQUIRE(fit.se.has_value());
  const double se_mu = (*fit.se)[mu_idx];
  CHECK(se_mu ==
        doctest::Approx(std::sqrt(fit.params.sigma2[0] / data.n)).epsilon(1e-3));
}

TEST_CASE("wald_test reference behavior") {
  // exactly satisfied constraint
  Eigen::VectorXd est(2);
  est << 1.0, 1.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd r1(1, 2);
  r1 << 1.0, -1.0;
  WaldResult w = wald_test(est, cov, r1, Eigen::VectorXd::Zero(1));
  CHECK(w.statistic == doctest::Approx(0.0));
  CHECK(w.p_value == doctest::Approx(1.0));

  // scalar case: estimate 2, variance 1, H0: theta = 0
  Eigen::VectorXd e1(1);
  e1 << 2.0;
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd rid = Eigen::MatrixXd::Identity(1, 1);
  w = wald_test(e1, c1, rid, Eigen::VectorXd::Zero(1));
  CHECK(w.statistic == doctest::Approx(4.0));
  CHECK(w.df == 1);
  CHECK(w.p_value == doctest::Approx(0.0455).epsilon(2e-3));
  CHECK(w.p_value == doctest::Approx(chi_square_upper_tail(4.0, 1)).epsilon(1e-14));

  // diagonal covariance: W is the sum of squared z-scores
  Eigen::VectorXd e2(2);
  e2 << 3.0, -2.0;
  Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(2, 2);
  c2(0, 0) = 4.0;
  c2(1, 1) = 0.25;
  w = wald_test(e2, c2, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  CHECK(w.statistic == doctest::Approx(9.0 / 4.0 + 4.0 / 0.25).epsilon(1e-12));
  CHECK(w.df == 2);
}

TEST_CASE("wald statistic is invariant under constraint reparameterization") {
  Rng rng(71);
  Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(4, 4, [&]() { return rng.uniform(); });
  Eigen::MatrixXd cov = b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd est(4);
  est << 0.4, -1.2, 2.0, 0.3;
  Eigen::MatrixXd r(2, 4);
  r << 1.0, -1.0, 0.0, 0.0,
       0.0, 1.0, -1.0, 0.0;
  Eigen::VectorXd rhs(2);
  rhs << 0.1, -0.2;
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0,
       -1.0, 3.0;  // invertible
  const WaldResult w1 = wald_test(est, cov, r, rhs);
  const WaldResult w2 = wald_test(est, cov, m * r, m * rhs);
  CHECK(w1.statistic == doctest::Approx(w2.statistic).epsilon(1e-8));
  CHECK(w1.df == w2.df);
}

TEST_CASE("wald_test names the redundant constraint row") {
  Eigen::VectorXd est(3);
  est << 1.0, 2.0, 3.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd r(2, 3);
  r << 1.0, -1.0, 0.0,
       2.0, -2.0, 0.0;  // row 1 duplicates row 0
  try {
    wald_test(est, cov, r, Eigen::VectorXd::Zero(2));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("wald equality tests on a simulated LCdist fit") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCdist, 3000);
  design.intercept_magnitude = 1.3;
  const GeneratedStudy gen = generate(design, 8);
  FitResult fit = lcmix::fit(design.model_spec(), gen.data, quick_config(3, 5));
  add_standard_errors(fit, gen.data);

  const WaldResult means = wald_equal_means(fit);
  CHECK(means.df == 1);
  CHECK(means.p_value < 0.01);  // true means -1 and 1

  const WaldResult vars = wald_equal_variances(fit);
  CHECK(vars.df == 1);
  CHECK(vars.p_value > 0.01);  // true variances equal

  // LCreg has no Gaussian component to test
  StudyDesign rdesign = StudyDesign::preset(ModelVariant::LCreg, 500);
  rdesign.intercept_magnitude = 1.3;
  const GeneratedStudy rgen = generate(rdesign, 9);
  FitResult rfit = lcmix::fit(rdesign.model_spec(), rgen.data, quick_config(4, 3));
  CHECK_THROWS_AS(wald_equal_means(rfit), InputError);
  CHECK_THROWS_AS(wald_equal_variances(rfit), InputError);

  // covariance required
  FitResult bare = lcmix::fit(design.model_spec(), gen.data, quick_config(3, 2));
  CHECK_THROWS_AS(wald_equal_means(bare), InputError);
}

TEST_CASE("direct-effect Wald tests on a simulated LCcw fit") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCcw, 3000);
  design.intercept_magnitude = 1.2;
  const GeneratedStudy gen = generate(design, 12);
  FitResult fit = lcmix::fit(design.model_spec(), gen.data, quick_config(5, 5));
  add_standard_errors(fit, gen.data);

  const DirectEffectTests tests = wald_direct_effects(fit, 0);
  CHECK(tests.zero_test.df == 2);
  CHECK(tests.equality_test.df == 1);
  CHECK(tests.zero_test.p_value < 0.01);      // true slopes -0.5 and 1
  CHECK(tests.equality_test.p_value < 0.01);  // they differ across classes

  // constrained item -> error
  const ModelSpec constrained = ModelSpec::make(
      ModelVariant::LCcw, 2, gen.data.cardinalities, VarianceMode::Heteroscedastic,
      {SlopeConstraint::Zero, SlopeConstraint::Free, SlopeConstraint::Free,
       SlopeConstraint::Free, SlopeConstraint::Free, SlopeConstraint::Free});
  FitResult cfit = lcmix::fit(constrained, gen.data, quick_config(5, 3));
  add_standard_errors(cfit, gen.data);
  CHECK_THROWS_AS(wald_direct_effects(cfit, 0), InputError);

  // S = 1: the cross-class equality test is undefined
  const ModelSpec s1 = ModelSpec::make(ModelVariant::LCcw, 1, gen.data.cardinalities);
  FitResult fit1 = lcmix::fit(s1, gen.data, quick_config(5, 1));
  add_standard_errors(fit1, gen.data);
  CHECK_THROWS_AS(wald_direct_effects(fit1, 0), InputError);
}
