#include <bdsurvey/design.hpp>
#include <bdsurvey/mc.hpp>
#include <bdsurvey/rng.hpp>
#include <bdsurvey/solve.hpp>
#include <bdsurvey/superpop.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <vector>

using namespace bdsurvey;

namespace {

const std::filesystem::path kConfigs{BDSURVEY_CONFIG_DIR};

std::vector<double> lognormal(std::size_t n, std::uint64_t seed) {
  auto rng = RngStream::derive(seed, 0, "bench");
  std::vector<double> y(n);
  for (auto& v : y) v = std::exp(rng.normal());
  return y;
}

std::vector<double> weights(std::size_t n, std::uint64_t seed) {
  auto rng = RngStream::derive(seed, 1, "bench");
  std::vector<double> w(n);
  for (auto& v : w) v = rng.uniform() < 0.5 ? 0.0 : 1.0 + rng.uniform();
  return w;
}

void BM_Gini(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto y = lognormal(n, 1);
  const auto w = weights(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gini(y, w).scalar());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gini)->RangeMultiplier(4)->Range(1 << 10, 1 << 20)->Complexity(benchmark::oNLogN);

void BM_WeightedQuantile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto y = lognormal(n, 3);
  const auto w = weights(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_quantile(y, w, 0.5).scalar());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WeightedQuantile)->RangeMultiplier(4)->Range(1 << 10, 1 << 20)->Complexity(benchmark::oNLogN);

void BM_BigDataSelect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto y = lognormal(n, 5);
  const BigDataMechanism mech{1.0, 0.05, n / 2};
  auto rng = RngStream::derive(6, 0, "bench-select");
  for (auto _ : state) benchmark::DoNotOptimize(bigdata_select(y, mech, rng));
}
BENCHMARK(BM_BigDataSelect)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

void BM_SuperpopSample(benchmark::State& state) {
  const auto model = build_model(load_superpop_spec(kConfigs / "superpop_desk.json"));
  auto rng = RngStream::derive(7, 0, "bench-sample");
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model.sample(n, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SuperpopSample)->Arg(10000)->Arg(100000);

void BM_Replicate(benchmark::State& state) {
  StudyConfig cfg;
  cfg.superpop = load_superpop_spec(kConfigs / "superpop_desk.json");
  cfg.population_sizes = {static_cast<std::size_t>(state.range(0))};
  cfg.sampling_fraction = 0.01;
  cfg.replicates = 2;
  cfg.seed = 8;
  const Study study(cfg);
  std::size_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(study.run_replicate(0, rep++));
}
BENCHMARK(BM_Replicate)->Arg(20000)->Arg(80000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
