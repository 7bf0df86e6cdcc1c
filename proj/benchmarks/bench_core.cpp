#include <benchmark/benchmark.h>

#include <vector>

#include "dfprune/bounds.hpp"
#include "dfprune/dataset.hpp"
#include "dfprune/evaluation.hpp"
#include "dfprune/model_io.hpp"
#include "dfprune/pruner.hpp"
#include "dfprune/saliency.hpp"

namespace {

const dfprune::Network& digits_model() {
  static const dfprune::Network net = dfprune::load_network(DFPRUNE_FIXTURE_DIR "/mlp_8x8digits.json");
  return net;
}

const dfprune::LabeledDataset& digits_test() {
  static const dfprune::LabeledDataset ds = dfprune::load_dataset(DFPRUNE_FIXTURE_DIR "/digits_test.nnds");
  return ds;
}

void BM_Forward(benchmark::State& state) {
  const auto& net = digits_model();
  const auto& ds = digits_test();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dfprune::forward(net, ds.sample(i++ % ds.n_samples)));
  }
}
BENCHMARK(BM_Forward);

void BM_BuildBoundsMap(benchmark::State& state) {
  const auto& net = digits_model();
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::build_bounds_map(net));
}
BENCHMARK(BM_BuildBoundsMap);

void BM_SaliencyList(benchmark::State& state) {
  const auto& net = digits_model();
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::saliency_list(net, 0));
}
BENCHMARK(BM_SaliencyList);

void BM_OutputImpact(benchmark::State& state) {
  const auto& net = digits_model();
  const auto bounds = dfprune::build_bounds_map(net);
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::output_impact(net, bounds, 0, 3, 7));
}
BENCHMARK(BM_OutputImpact);

void BM_Energy(benchmark::State& state) {
  const auto& net = digits_model();
  const auto bounds = dfprune::build_bounds_map(net);
  const auto impact = dfprune::output_impact(net, bounds, 0, 3, 7);
  const dfprune::EnergyWeights weights(0.75, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::energy(impact, weights));
}
BENCHMARK(BM_Energy);

void BM_PruneToTarget(benchmark::State& state) {
  dfprune::PruningConfig cfg;
  cfg.target = static_cast<double>(state.range(0)) / 100.0;
  cfg.batch_fraction = 0.0156;
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::run(digits_model(), cfg));
}
BENCHMARK(BM_PruneToTarget)->Arg(50)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_RobustCount(benchmark::State& state) {
  const auto& net = digits_model();
  dfprune::AttackConfig attack;
  attack.epsilon = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(dfprune::robust_count(net, net, digits_test(), attack));
}
BENCHMARK(BM_RobustCount)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
