#include <map>

#include <benchmark/benchmark.h>

#include "fxam/synthgen.hpp"
#include "fxam/trainer.hpp"

namespace {

const fxam::Dataset& hard_data(std::size_t n) {
  static std::map<std::size_t, fxam::Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    fxam::SynthConfig sc;
    sc.n_records = n;
    sc.n_features = 20;
    sc.difficulty = fxam::Difficulty::Hard;
    sc.has_temporal = true;
    sc.seasonality_ratio = 0.05;
    it = cache.emplace(n, fxam::generate(sc).dataset).first;
  }
  return it->second;
}

// Args: records, DFI on/off.
void BM_TsiTrain(benchmark::State& state) {
  const auto& d = hard_data(static_cast<std::size_t>(state.range(0)));
  fxam::TrainConfig c;
  c.temporal = {{1, fxam::kSyntheticPeriod}};
  c.dynamic_feature_iteration = state.range(1) != 0;
  std::size_t cycles = 0;
  for (auto _ : state) {
    const auto r = fxam::tsi_train_full(d, c);
    cycles = r.state.cycle;
  }
  state.counters["cycles"] = static_cast<double>(cycles);
}
BENCHMARK(BM_TsiTrain)
    ->ArgsProduct({{5000, 20000, 80000}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_TsiTrainPenalized(benchmark::State& state) {
  const auto& d = hard_data(static_cast<std::size_t>(state.range(0)));
  fxam::TrainConfig c;
  c.backend = fxam::SmootherKind::Penalized;
  c.temporal = {{1, fxam::kSyntheticPeriod}};
  for (auto _ : state) benchmark::DoNotOptimize(fxam::tsi_train_full(d, c).state.intercept);
}
BENCHMARK(BM_TsiTrainPenalized)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace
