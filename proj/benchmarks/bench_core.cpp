#include <benchmark/benchmark.h>

#include "avsamp/experiment.hpp"
#include "avsamp/random.hpp"

using namespace avsamp;

namespace {

ExperimentConfig config(int m) {
  std::string text = "grid.periods = 8, 8\nbank.generators = bspline4\nsampling.gamma = 0.5\nkernels.a = 0.25\n";
  text += "grid.m = " + std::to_string(m) + "\n";
  return parse_config_text(text);
}

DiscreteField random_field(const GridSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  DiscreteField f(spec);
  for (double& v : f.values()) v = rng.uniform(-1.0, 1.0);
  return f;
}

void BM_ConvolveKernel(benchmark::State& state) {
  const GridSpec spec(1, {8, 8}, static_cast<int>(state.range(0)));
  const DiscreteField f = random_field(spec, 1);
  const DiscreteField g = rasterize(KernelSpec::bspline(2, 4), spec);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(f, g));
  state.SetItemsProcessed(state.iterations() * spec.size());
}
BENCHMARK(BM_ConvolveKernel)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_AmalgamNorm(benchmark::State& state) {
  const GridSpec spec(1, {8, 8}, static_cast<int>(state.range(0)));
  const DiscreteField f = random_field(spec, 2);
  for (auto _ : state) benchmark::DoNotOptimize(wiener_amalgam_norm(f, {1.5, 2.5}));
  state.SetItemsProcessed(state.iterations() * spec.size());
}
BENCHMARK(BM_AmalgamNorm)->Arg(16)->Arg(64);

void BM_BuildGram(benchmark::State& state) {
  const GridSpec spec(1, {8, 8}, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_gram(GeneratorBank(spec, {KernelSpec::bspline(2, 4)})));
}
BENCHMARK(BM_BuildGram)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_AcquireSamples(benchmark::State& state) {
  const Experiment ex = build_experiment(config(static_cast<int>(state.range(0))));
  const DiscreteField f = random_field(ex.spec, 3);
  for (auto _ : state) benchmark::DoNotOptimize(acquire_samples(f, ex.kernels, ex.X));
  state.SetItemsProcessed(state.iterations() * ex.X.size());
}
BENCHMARK(BM_AcquireSamples)->Arg(16)->Arg(32);

void BM_ReconstructionStep(benchmark::State& state) {
  const Experiment ex = build_experiment(config(static_cast<int>(state.range(0))));
  const DiscreteField f = synthesize(random_coefficients(ex.gram.bank(), 4), ex.gram.bank());
  const std::vector<double> s = acquire_samples(f, ex.kernels, ex.X);
  ReconstructionOptions o;
  o.max_iter = 1;
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(s, ex.system(), o));
}
BENCHMARK(BM_ReconstructionStep)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ContractionEstimate(benchmark::State& state) {
  const Experiment ex = build_experiment(config(16));
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_contraction(ex.system(), {2.0, 2.0}, 20, 5, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ContractionEstimate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
