#include <benchmark/benchmark.h>

#include "lcmix/diagnostics.hpp"
#include "lcmix/estimation.hpp"
#include "lcmix/model.hpp"
#include "lcmix/simulation.hpp"
#include "lcmix/special_functions.hpp"

using namespace lcmix;

namespace {

GeneratedStudy make_study(ModelVariant v, int n, std::uint64_t seed) {
  StudyDesign design = StudyDesign::preset(v, n);
  design.intercept_magnitude = 1.2;
  return generate(design, seed);
}

void bm_log_likelihood(benchmark::State& state) {
  const auto gen = make_study(ModelVariant::LCcw, static_cast<int>(state.range(0)), 1);
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCcw, 2, gen.data.cardinalities);
  for (auto _ : state)
    benchmark::DoNotOptimize(log_likelihood(gen.true_params, spec, gen.data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_log_likelihood)->Arg(1000)->Arg(30000);

void bm_e_step(benchmark::State& state) {
  const auto gen = make_study(ModelVariant::LCcw, static_cast<int>(state.range(0)), 2);
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCcw, 2, gen.data.cardinalities);
  for (auto _ : state) benchmark::DoNotOptimize(e_step(gen.true_params, spec, gen.data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_e_step)->Arg(1000)->Arg(30000);

void bm_measurement_m_step(benchmark::State& state) {
  const auto gen = make_study(ModelVariant::LCcw, static_cast<int>(state.range(0)), 3);
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCcw, 2, gen.data.cardinalities);
  const EStepResult e = e_step(gen.true_params, spec, gen.data);
  const FitConfig config;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        m_step_measurement(e.posteriors, spec, gen.data, config, &gen.true_params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_measurement_m_step)->Arg(1000)->Arg(30000);

void bm_fit_small(benchmark::State& state) {
  const auto gen = make_study(ModelVariant::LCdist, 1000, 4);
  const ModelSpec spec = ModelSpec::make(ModelVariant::LCdist, 2, gen.data.cardinalities);
  FitConfig config;
  config.n_starts = 4;
  config.rng_seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, gen.data, config));
}
BENCHMARK(bm_fit_small)->Unit(benchmark::kMillisecond);

void bm_adjusted_rand_index(benchmark::State& state) {
  const auto gen = make_study(ModelVariant::LCdist, static_cast<int>(state.range(0)), 5);
  Partition a = gen.truth;
  Partition b = gen.truth;
  for (std::size_t i = 0; i < b.labels.size(); i += 17) b.labels[i] = 1 - b.labels[i];
  for (auto _ : state) benchmark::DoNotOptimize(adjusted_rand_index(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_adjusted_rand_index)->Arg(30000);

void bm_chi_square_upper_tail(benchmark::State& state) {
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi_square_upper_tail(x, 3));
    x += 0.01;
    if (x > 50.0) x = 0.01;
  }
}
BENCHMARK(bm_chi_square_upper_tail);

}  // namespace

BENCHMARK_MAIN();
