#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "fxam/categorical_solver.hpp"
#include "fxam/dataset.hpp"

namespace {

// q categorical columns sharing c levels in total, 5c + 200 records.
fxam::RidgeSystem make_system(std::size_t c, std::size_t q) {
  std::mt19937_64 rng(c);
  std::normal_distribution<double> normal(0.0, 10.0);
  const std::size_t n = 5 * c + 200;
  fxam::Dataset d;
  for (std::size_t m = 0; m < q; ++m) {
    auto& col = d.categorical.emplace_back();
    col.name = "z" + std::to_string(m);
    const std::size_t levels = c / q;
    for (std::size_t r = 0; r < n; ++r) {
      col.values.push_back("v" + std::to_string(r < levels ? r : rng() % levels));
    }
  }
  for (std::size_t r = 0; r < n; ++r) d.response.push_back(normal(rng));
  return fxam::gram_assemble(fxam::build_homogeneous_encoding(d), d.response, 1.0);
}

void BM_NgaSolve(benchmark::State& state) {
  const auto sys = make_system(static_cast<std::size_t>(state.range(0)), 4);
  fxam::NgaOptions options;
  options.tol = 1e-10;
  int iterations = 0;
  for (auto _ : state) {
    const auto r = fxam::nga_ridge_solve(sys, options);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.beta.data());
  }
  state.counters["iterations"] = iterations;
}
BENCHMARK(BM_NgaSolve)->Arg(100)->Arg(400)->Arg(1000)->Arg(4000);

void BM_ClosedForm(benchmark::State& state) {
  const auto sys = make_system(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fxam::closed_form_ridge(sys, 5000).data());
}
BENCHMARK(BM_ClosedForm)->Arg(100)->Arg(400)->Arg(1000);

void BM_PowerIteration(benchmark::State& state) {
  const auto sys = make_system(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fxam::power_iteration_max_eig(sys).eigenvalue);
}
BENCHMARK(BM_PowerIteration)->Arg(100)->Arg(1000)->Arg(4000);

}  // namespace
