#include <azoom/cluster.hpp>
#include <azoom/estimator.hpp>
#include <azoom/policy.hpp>

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

using namespace azoom;

namespace {

ArmSamples random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ArmSamples s;
  for (std::size_t i = 0; i < n; ++i) s.insert(u(rng), u(rng));
  return s;
}

void BM_KnnEstimate(benchmark::State& state) {
  const auto samples = random_samples(static_cast<std::size_t>(state.range(0)), 1);
  const auto k = static_cast<std::size_t>(state.range(1));
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_estimate(samples, x, k));
    x += 0.618033988749895;
    if (x >= 1.0) x -= 1.0;
  }
}
BENCHMARK(BM_KnnEstimate)->Args({1664, 1})->Args({1664, 26})->Args({50000, 26});

void BM_EstimatedCurve(benchmark::State& state) {
  const auto samples = random_samples(64 * 26, 2);
  for (auto _ : state) benchmark::DoNotOptimize(estimated_curve(samples, Interval{0.0, 0.5}, 26));
}
BENCHMARK(BM_EstimatedCurve);

void BM_Step(benchmark::State& state) {
  const auto variant = static_cast<Variant>(state.range(0));
  const auto model = presets::zigzag(50);
  const Trial horizon = 20000;
  for (auto _ : state) {
    Environment env(model, 0.01, horizon, 7);
    PolicyConfig cfg;
    cfg.variant = variant;
    cfg.noise_var = 1e-4;
    cfg.horizon = horizon;
    cfg.flag_mode = FlagMode::Simulation;
    cfg.fixed_k = 26;
    benchmark::DoNotOptimize(run_streaming(env, cfg, {}).trials());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(horizon));
  state.SetLabel(std::string(to_string(variant)));
}
BENCHMARK(BM_Step)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_OracleSubpartition(benchmark::State& state) {
  const auto model = presets::zigzag(static_cast<std::size_t>(state.range(0)));
  std::vector<ArmId> arms(model.num_arms());
  std::iota(arms.begin(), arms.end(), 0);
  for (auto _ : state) {
    TrueDistance dist(model);
    benchmark::DoNotOptimize(subpartition(arms, Interval{0.0, 1.0}, 1.0, dist));
  }
}
BENCHMARK(BM_OracleSubpartition)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
