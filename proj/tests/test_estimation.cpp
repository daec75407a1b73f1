#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "lcmix/diagnostics.hpp"
#include "lcmix/estimation.hpp"
#include "lcmix/inference.hpp"
#include "lcmix/model.hpp"
#include "lcmix/param_layout.hpp"
#include "lcmix/simulation.hpp"
#include "test_util.hpp"

using namespace lcmix;

namespace {

FitConfig quick_config(std::uint64_t seed, int starts = 5) {
  FitConfig c;
  c.n_starts = starts;
  c.rng_seed = seed;
  return c;
}

// EM trace driven through the public pieces, mirroring fit()'s inner loop.
std::vector<double> em_trace(const ModelSpec& spec, const Dataset& data, const FitConfig& config,
                             int start, int iterations) {
  Rng rng(config.rng_seed, static_cast<std::uint64_t>(start));
  Parameters params = initialize(spec, data, rng);
  EStepResult e = e_step(params, spec, data);
  std::vector<double> trace{e.loglik};
  for (int it = 0; it < iterations; ++it) {
    params.theta = m_step_mixing(e.posteriors);
    if (spec.models_z())
      std::tie(params.mu, params.sigma2) =
          m_step_gaussian(e.posteriors, data.z, spec.variance_mode);
    MeasurementStep ms = m_step_measurement(e.posteriors, spec, data, config, &params);
    params.beta0 = std::move(ms.beta0);
    params.beta = std::move(ms.beta);
    e = e_step(params, spec, data);
    trace.push_back(e.loglik);
  }
  return trace;
}

}  // namespace

TEST_CASE("initialize is deterministic for S=1 and matches moment estimates") {
  Rng gen(2);
  const Dataset data = test_util::random_dataset(gen, 60, {2, 3});
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCdist, 1, {2, 3});
  Rng r1(77);
  const Parameters p = initialize(spec, data, r1);
  CHECK(p.theta[0] == 0.0);
  const double mean = std::accumulate(data.z.begin(), data.z.end(), 0.0) / data.n;
  double ss = 0.0;
  for (double z : data.z) ss += (z - mean) * (z - mean);
  CHECK(p.mu[0] == doctest::Approx(mean).epsilon(1e-12));
  CHECK(p.sigma2[0] == doctest::Approx(ss / data.n).epsilon(1e-12));
  // empirical baseline-category logits
  int count1 = 0;
  for (int i = 0; i < data.n; ++i) count1 += data.code(i, 0);
  const double logit = std::log(static_cast<double>(count1) / (data.n - count1));
  CHECK(p.beta0[0][1] == doctest::Approx(logit).epsilon(1e-12));
}

TEST_CASE("initialize: same seed same start, different seeds differ") {
  Rng gen(3);
  const Dataset data = test_util::random_dataset(gen, 40, {2, 2});
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCcw, 2, {2, 2});
  Rng a(42), b(42), c(43);
  const Parameters pa = initialize(spec, data, a);
  const Parameters pb = initialize(spec, data, b);
  const Parameters pc = initialize(spec, data, c);
  CHECK(pa.theta == pb.theta);
  CHECK(pa.mu == pb.mu);
  CHECK(pa.beta0 == pb.beta0);
  CHECK(pa.beta0 != pc.beta0);
}

TEST_CASE("e_step matches the model-core posterior and likelihood") {
  Rng gen(5);
  const Dataset data = test_util::random_dataset(gen, 35, {2, 3});
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCcw, 2, {2, 3});
  const Parameters p = test_util::random_params(spec, gen);
  const EStepResult e = e_step(p, spec, data);
  CHECK(e.loglik == doctest::Approx(log_likelihood(p, spec, data)).epsilon(1e-14));
  const Eigen::MatrixXd post = posteriors(p, spec, data);
  CHECK((e.posteriors - post).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("e_step with identical class parameters gives uniform rows") {
  Rng gen(7);
  const Dataset data = test_util::random_dataset(gen, 12, {2});
  const ModelSpec spec2 = ModelSpec::make(ModelVariant::LCdist, 2, {2});
  const EStepResult e = e_step(Parameters::zeros(spec2), spec2, data);
  for (int i = 0; i < data.n; ++i) CHECK(e.posteriors(i, 0) == doctest::Approx(0.5));
  const ModelSpec spec1 = ModelSpec::make(ModelVariant::LCdist, 1, {2});
  const EStepResult e1 = e_step(Parameters::zeros(spec1), spec1, data);
  CHECK(e.loglik == doctest::Approx(e1.loglik).epsilon(1e-12));

  Dataset one = data;
  one.n = 1;
  one.codes.resize(1);
  one.z.resize(1);
  const EStepResult es = e_step(Parameters::zeros(spec2), spec2, one);
  CHECK(es.posteriors.rows() == 1);
  CHECK(es.posteriors(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("m_step_mixing reference values and degenerate error") {
  Eigen::MatrixXd post(2, 2);
  post << 0.5, 0.5, 0.5, 0.5;
  CHECK(m_step_mixing(post) == std::vector<double>{0.0, 0.0});

  Eigen::MatrixXd post2(2, 2);
  post2 << 0.8, 0.2, 0.8, 0.2;
  auto theta = m_step_mixing(post2);
  CHECK(theta[1] == doctest::Approx(std::log(0.25)).epsilon(1e-12));

  Eigen::MatrixXd post3(2, 2);
  post3 << 0.7, 0.3, 0.7, 0.3;
  theta = m_step_mixing(post3);
  CHECK(theta[1] == doctest::Approx(-0.8472978603872034).epsilon(1e-12));  // ln(3/7)

  Eigen::MatrixXd dead(2, 2);
  dead << 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(m_step_mixing(dead), NumericalError);
}

TEST_CASE("m_step_gaussian weighted moments, floor, and symmetry") {
  std::vector<double> z{1.0, 2.0, 3.0, 6.0};
  const double mean = 3.0;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double var = ss / 4.0;

  // all responsibility in one class
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(4, 2);
  post.col(0).setOnes();
  CHECK_THROWS_AS(m_step_gaussian(post, z, VarianceMode::Heteroscedastic), NumericalError);

  Eigen::MatrixXd post1 = Eigen::MatrixXd::Ones(4, 1);
  auto [mu1, s21] = m_step_gaussian(post1, z, VarianceMode::Heteroscedastic);
  CHECK(mu1[0] == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s21[0] == doctest::Approx(var).epsilon(1e-12));

  // constant z hits the floor
  std::vector<double> zc{2.5, 2.5, 2.5, 2.5};
  auto [muc, s2c] = m_step_gaussian(post1, zc, VarianceMode::Heteroscedastic);
  CHECK(muc[0] == doctest::Approx(2.5));
  CHECK(s2c[0] == variance_floor(zc));

  // uniform responsibilities: both classes equal the sample moments
  Eigen::MatrixXd postu = Eigen::MatrixXd::Constant(4, 2, 0.5);
  auto [muu, s2u] = m_step_gaussian(postu, z, VarianceMode::Heteroscedastic);
  CHECK(muu[0] == doctest::Approx(mean));
  CHECK(muu[1] == doctest::Approx(mean));
  CHECK(s2u[0] == doctest::Approx(var));
  auto [mup, s2p] = m_step_gaussian(postu, z, VarianceMode::Common);
  CHECK(s2p.size() == 1);
  CHECK(s2p[0] == doctest::Approx(var));
}

TEST_CASE("m_step_measurement closed form and degenerate z") {
  Dataset data;
  data.n = 4;
  data.j = 1;
  data.cardinalities = {2};
  data.codes = {1, 1, 1, 0};
  data.z = {0.0, 0.0, 0.0, 0.0};
  data.column_names = {"y", "z"};
  Eigen::MatrixXd post = Eigen::MatrixXd::Ones(4, 1);
  FitConfig config;

  const ModelSpec dist = ModelSpec::make(ModelVariant::LCdist, 1, {2});
  MeasurementStep ms = m_step_measurement(post, dist, data, config);
  CHECK(ms.beta0[0][1] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(ms.beta[0][1] == 0.0);

  // z identically zero with free slopes: intercept from the closed form,
  // slope flagged and left at zero
  const ModelSpec cw = ModelSpec::make(ModelVariant::LCcw, 1, {2});
  ms = m_step_measurement(post, cw, data, config);
  CHECK(ms.beta0[0][1] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(ms.beta[0][1] == 0.0);
  CHECK(!ms.flags.empty());
}

TEST_CASE("weighted logit M-step matches a brute-force grid oracle") {
  Dataset data;
  data.n = 6;
  data.j = 1;
  data.cardinalities = {2};
  data.codes = {0, 0, 1, 1, 1, 0};
  data.z = {-2.0, -1.0, 0.0, 1.0, 2.0, 0.5};
  data.column_names = {"y", "z"};
  Eigen::MatrixXd post(6, 1);
  post << 1.0, 0.5, 1.0, 1.0, 0.8, 0.3;

  const ModelSpec spec = ModelSpec::make(ModelVariant::LCreg, 1, {2});
  FitConfig config;
  const MeasurementStep ms = m_step_measurement(post, spec, data, config);

  const auto objective = [&](double b0, double b) {
    double q = 0.0;
    for (int i = 0; i < data.n; ++i) {
      const double eta = b0 + b * data.z[i];
      const double ll = data.code(i, 0) == 1 ? eta - std::log1p(std::exp(eta))
                                             : -std::log1p(std::exp(eta));
      q += post(i, 0) * ll;
    }
    return q;
  };
  // coarse grid over [-5,5]^2, then a fine local grid
  double best_b0 = 0.0, best_b = 0.0, best_q = -1e300;
  for (double b0 = -5.0; b0 <= 5.0; b0 += 0.01) {
    for (double b = -5.0; b <= 5.0; b += 0.01) {
      const double q = objective(b0, b);
      if (q > best_q) {
        best_q = q;
        best_b0 = b0;
        best_b = b;
      }
    }
  }
  double fine_b0 = best_b0, fine_b = best_b;
  for (double b0 = best_b0 - 0.02; b0 <= best_b0 + 0.02; b0 += 5e-5) {
    for (double b = best_b - 0.02; b <= best_b + 0.02; b += 5e-5) {
      const double q = objective(b0, b);
      if (q > best_q) {
        best_q = q;
        fine_b0 = b0;
        fine_b = b;
      }
    }
  }
  CHECK(std::fabs(ms.beta0[0][1] - fine_b0) < 1e-4);
  CHECK(std::fabs(ms.beta[0][1] - fine_b) < 1e-4);
}

TEST_CASE("equal-across-classes slopes are shared and fitted jointly") {
  const StudyDesign design = [] {
    StudyDesign d = StudyDesign::preset(ModelVariant::LCcw, 1500);
    d.intercept_magnitude = 1.0;
    d.slopes = {0.8, 0.8};
    return d;
  }();
  const GeneratedStudy gen = generate(design, 99);
  const ModelSpec spec = ModelSpec::make(
      ModelVariant::LCcw, 2, {2, 2, 2, 2, 2, 2}, VarianceMode::Heteroscedastic,
      std::vector<SlopeConstraint>(6, SlopeConstraint::EqualAcrossClasses));
  const FitResult fit = lcmix::fit(spec, gen.data, quick_config(4, 4));
  for (int item = 0; item < 6; ++item)
    CHECK(fit.params.beta_at(item, 0, 1, spec) ==
          doctest::Approx(fit.params.beta_at(item, 1, 1, spec)).epsilon(1e-12));
  // shared slope should land near the common truth 0.8
  CHECK(fit.params.beta_at(0, 0, 1, spec) == doctest::Approx(0.8).epsilon(0.35));
}

TEST_CASE("S=1 LCdist fit reaches the closed-form maximum") {
  Rng gen(11);
  const Dataset data = test_util::random_dataset(gen, 200, {2, 2, 2});
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCdist, 1, {2, 2, 2});
  const FitResult fit = lcmix::fit(spec, data, quick_config(1, 1));

  double expected = 0.0;
  for (int item = 0; item < data.j; ++item) {
    int c1 = 0;
    for (int i = 0; i < data.n; ++i) c1 += data.code(i, item);
    const double f = static_cast<double>(c1) / data.n;
    expected += data.n * (f * std::log(f) + (1.0 - f) * std::log(1.0 - f));
  }
  const double mean = std::accumulate(data.z.begin(), data.z.end(), 0.0) / data.n;
  double ss = 0.0;
  for (double z : data.z) ss += (z - mean) * (z - mean);
  const double var = ss / data.n;
  expected += -0.5 * data.n * (std::log(2.0 * std::numbers::pi * var) + 1.0);

  CHECK(fit.loglik == doctest::Approx(expected).epsilon(1e-8));
  CHECK(fit.converged);
}

TEST_CASE("EM is monotone on random small datasets") {
  Rng gen(13);
  for (int rep = 0; rep < 6; ++rep) {
    const Dataset data = test_util::random_dataset(gen, 60, {2, 3, 2});
    for (auto variant : {ModelVariant::LCreg, ModelVariant::LCdist, ModelVariant::LCcw}) {
      const ModelSpec spec = ModelSpec::make(variant, 2, {2, 3, 2});
      const auto trace = em_trace(spec, data, quick_config(rep), rep, 40);
      for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] >= trace[i - 1] - 1e-10);
    }
  }
}

TEST_CASE("fit recovers the mixing proportions of simulated LCdist data") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCdist, 6000);
  design.intercept_magnitude = 1.3;
  const GeneratedStudy gen = generate(design, 123);
  const FitResult fit = lcmix::fit(design.model_spec(), gen.data, quick_config(7, 6));
  const auto props = fit.params.class_proportions();
  CHECK(props[0] == doctest::Approx(0.7).epsilon(0.05));
  CHECK(props[1] == doctest::Approx(0.3).epsilon(0.12));
  CHECK(props[0] >= props[1]);  // canonical order
}

TEST_CASE("identical seeds give identical fits regardless of parallelism") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCcw, 500);
  design.intercept_magnitude = 1.2;
  const GeneratedStudy gen = generate(design, 5);
  FitConfig serial = quick_config(21, 6);
  serial.parallel_starts = false;
  FitConfig parallel = quick_config(21, 6);
  parallel.parallel_starts = true;
  const FitResult a = lcmix::fit(design.model_spec(), gen.data, serial);
  const FitResult b = lcmix::fit(design.model_spec(), gen.data, parallel);
  CHECK(a.loglik == b.loglik);
  CHECK(a.start_index == b.start_index);
  CHECK(a.params.theta == b.params.theta);
  CHECK(a.params.mu == b.params.mu);
  CHECK(a.params.sigma2 == b.params.sigma2);
  CHECK(a.params.beta0 == b.params.beta0);
  CHECK(a.params.beta == b.params.beta);
}

TEST_CASE("LCcw with all slopes constrained to zero matches the LCdist fit") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCdist, 800);
  design.intercept_magnitude = 1.1;
  const GeneratedStudy gen = generate(design, 31);
  const ModelSpec dist = ModelSpec::make(ModelVariant::LCdist, 2, gen.data.cardinalities);
  const ModelSpec cw =
      ModelSpec::make(ModelVariant::LCcw, 2, gen.data.cardinalities,
                      VarianceMode::Heteroscedastic,
                      std::vector<SlopeConstraint>(6, SlopeConstraint::Zero));
  const FitResult fd = lcmix::fit(dist, gen.data, quick_config(2, 5));
  const FitResult fc = lcmix::fit(cw, gen.data, quick_config(2, 5));
  CHECK(fc.loglik == doctest::Approx(fd.loglik).epsilon(1e-6));
}

TEST_CASE("label permutation leaves the likelihood unchanged") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCcw, 400);
  design.intercept_magnitude = 1.4;
  const GeneratedStudy gen = generate(design, 77);
  const ModelSpec spec = design.model_spec();
  const FitResult fit = lcmix::fit(spec, gen.data, quick_config(3, 4));
  const double base = log_likelihood(fit.params, spec, gen.data);

  // swap the two classes by hand
  Parameters swapped = fit.params;
  const auto props = fit.params.class_proportions();
  swapped.theta[1] = std::log(props[0] / props[1]);
  std::swap(swapped.mu[0], swapped.mu[1]);
  std::swap(swapped.sigma2[0], swapped.sigma2[1]);
  for (int item = 0; item < spec.n_items(); ++item) {
    for (int k = 0; k < 2; ++k) {
      std::swap(swapped.beta0[item][k], swapped.beta0[item][2 + k]);
      std::swap(swapped.beta[item][k], swapped.beta[item][2 + k]);
    }
  }
  CHECK(log_likelihood(swapped, spec, gen.data) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("numerical gradient vanishes at the EM fixed point") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCcw, 500);
  design.intercept_magnitude = 1.5;
  const GeneratedStudy gen = generate(design, 404);
  const ModelSpec spec = design.model_spec();
  FitConfig config = quick_config(9, 4);
  config.em_tolerance = 1e-12;
  config.max_em_iterations = 20000;
  const FitResult fit = lcmix::fit(spec, gen.data, config);
  REQUIRE(fit.converged);

  const ParameterLayout layout(spec);
  const auto f = [&](const Eigen::VectorXd& x) {
    return log_likelihood(layout.unpack(x), spec, gen.data);
  };
  const Eigen::VectorXd grad = fd_gradient(f, layout.pack(fit.params));
  CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("canonicalization orders classes by descending proportion") {
  StudyDesign design = StudyDesign::preset(ModelVariant::LCdist, 1500);
  design.intercept_magnitude = 1.2;
  const GeneratedStudy gen = generate(design, 15);
  const FitResult fit = lcmix::fit(design.model_spec(), gen.data, quick_config(8, 5));
  const auto props = fit.params.class_proportions();
  for (std::size_t s = 1; s < props.size(); ++s) CHECK(props[s - 1] >= props[s]);
  for (int i = 0; i < fit.posteriors.rows(); ++i)
    CHECK(fit.posteriors.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fit config validation") {
  FitConfig bad;
  bad.n_starts = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = FitConfig{};
  bad.em_tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}
