#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "fxam/smoothers.hpp"

namespace {

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

Curve make_curve(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  Curve c;
  c.x.resize(n);
  for (auto& v : c.x) v = u(rng);
  std::sort(c.x.begin(), c.x.end());
  c.x.erase(std::unique(c.x.begin(), c.x.end()), c.x.end());
  for (double v : c.x) c.y.push_back(std::sin(v) + noise(rng));
  return c;
}

void BM_FastKernel(benchmark::State& state) {
  const auto c = make_curve(static_cast<std::size_t>(state.range(0)));
  fxam::SmoothRequest req{c.x, c.y, {}};
  req.bandwidth = fxam::default_bandwidth(c.x);
  for (auto _ : state) benchmark::DoNotOptimize(fxam::fast_kernel_smooth(req));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FastKernel)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_NaiveKernel(benchmark::State& state) {
  const auto c = make_curve(static_cast<std::size_t>(state.range(0)));
  fxam::SmoothRequest req{c.x, c.y, {}};
  req.bandwidth = fxam::default_bandwidth(c.x);
  for (auto _ : state) benchmark::DoNotOptimize(fxam::naive_kernel_smooth(req));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NaiveKernel)->RangeMultiplier(4)->Range(1 << 8, 1 << 14)->Complexity();

void BM_Penalized(benchmark::State& state) {
  const auto c = make_curve(static_cast<std::size_t>(state.range(0)));
  fxam::SmoothRequest req{c.x, c.y, {}};
  req.lambda = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(fxam::penalized_smooth(req));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Penalized)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

}  // namespace
