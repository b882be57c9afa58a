#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

#include "fxam/error.hpp"
#include "fxam/harness.hpp"
#include "fxam/synthgen.hpp"

using namespace fxam;

TEST_SUITE("synthgen") {

TEST_CASE("function type frequencies") {
  for (auto level : {Difficulty::Easy, Difficulty::Hard}) {
    std::mt19937_64 rng(level == Difficulty::Easy ? 1 : 2);
    const int n = 20000;
    std::map<FunctionType, int> counts;
    for (int i = 0; i < n; ++i) ++counts[draw_function_type(level, rng)];
    const std::map<FunctionType, double> expected =
        level == Difficulty::Easy
            ? std::map<FunctionType, double>{{FunctionType::Linear, 0.3},
                                             {FunctionType::Quadratic, 0.3},
                                             {FunctionType::Sine, 0.4}}
            : std::map<FunctionType, double>{{FunctionType::Linear, 0.1},
                                             {FunctionType::Quadratic, 0.1},
                                             {FunctionType::Sine, 0.2},
                                             {FunctionType::Product, 0.2},
                                             {FunctionType::Cosine, 0.4}};
    int total = 0;
    for (const auto& [type, p] : expected) {
      const double sigma = std::sqrt(n * p * (1 - p));
      CHECK(std::abs(counts[type] - n * p) <= 3 * sigma);
      total += counts[type];
    }
    CHECK(total == n);
  }
}

TEST_CASE("response equals the sum of its parts") {
  SynthConfig c;
  c.n_records = 3000;
  c.n_features = 12;
  c.difficulty = Difficulty::Hard;
  c.has_temporal = true;
  c.seasonality_ratio = 0.05;
  const auto g = generate(c);
  CHECK(g.truth.reconstruct() == g.dataset.response);
  CHECK(g.dataset.numerical.size() == c.numerical_count());
  CHECK(g.dataset.categorical.size() == c.categorical_count());
  CHECK(g.dataset.temporal.size() == 1);
  CHECK_NOTHROW(g.dataset.validate());
}

TEST_CASE("same seed gives identical data") {
  SynthConfig c;
  c.n_records = 2000;
  c.difficulty = Difficulty::Hard;
  c.has_temporal = true;
  c.seasonality_ratio = 0.02;
  CHECK(dataset_csv(generate(c).dataset) == dataset_csv(generate(c).dataset));
  auto other = c;
  other.seed = 2;
  CHECK(dataset_csv(generate(other).dataset) != dataset_csv(generate(c).dataset));
}

TEST_CASE("zero seasonality means no seasonal signal") {
  SynthConfig c;
  c.n_records = 1000;
  c.has_temporal = true;
  c.seasonality_ratio = 0.0;
  const auto g = generate(c);
  CHECK(g.truth.seasonal_amplitude == 0.0);
  for (double v : g.truth.seasonal) CHECK(v == 0.0);
}

TEST_CASE("achieved FVE targets") {
  SynthConfig c;
  c.n_records = 50000;
  c.n_features = 30;
  c.has_temporal = true;
  c.seasonality_ratio = 0.06;
  c.difficulty = Difficulty::Hard;
  c.seed = 11;
  const auto g = generate(c);
  CHECK(std::abs(g.truth.noise_ratio - 0.005) <= 0.25 * 0.005);
  CHECK(std::abs(g.truth.interaction_fve - 0.65) <= 0.25 * 0.65);
  CHECK(std::abs(g.truth.seasonality_fve - 0.06) <= 0.25 * 0.06);
  // Recompute from the sidecar rather than trusting the reported ratios.
  const double tss = population_variance(g.dataset.response);
  CHECK(population_variance(g.truth.noise) / tss == doctest::Approx(g.truth.noise_ratio).epsilon(1e-9));

  c.difficulty = Difficulty::Easy;
  const auto e = generate(c);
  CHECK(std::abs(e.truth.noise_ratio - 0.001) <= 0.25 * 0.001);
  CHECK(e.truth.interactions.empty());
}

TEST_CASE("interactions use two numerical features") {
  SynthConfig c;
  c.n_records = 500;
  c.n_features = 40;
  c.numerical_ratio = 1.0;
  c.difficulty = Difficulty::Hard;
  const auto g = generate(c);
  std::size_t slots = 0;
  for (const auto& item : g.truth.items) {
    const bool pair = item.type == FunctionType::Product || item.type == FunctionType::Cosine;
    CHECK(item.features.size() == (pair ? 2u : 1u));
    slots += item.features.size();
  }
  CHECK(slots == c.numerical_count());
}

TEST_CASE("named sweep configurations") {
  const auto records = appendix_config("varyRecords");
  REQUIRE(records.size() == 5);
  CHECK(records.front().n_records == 10000);
  CHECK(records.back().n_records == 500000);
  for (const auto& c : records) {
    CHECK(c.n_features == 100);
    CHECK(c.max_cardinality == 10);
    CHECK(c.numerical_ratio == 0.8);
    CHECK_FALSE(c.has_temporal);
  }
  const auto seasonal = appendix_config("varySeasonality");
  for (const auto& c : seasonal) {
    CHECK(c.n_features == 51);
    CHECK(c.numerical_ratio == doctest::Approx(40.0 / 51.0));
    CHECK(c.has_temporal);
    CHECK(c.numerical_count() == 40);
    // The temporal column is one of the 51; 10 categoricals of mean
    // cardinality 6 give the expected total cardinality of 60.
    CHECK(c.categorical_count() == 10);
    CHECK(c.max_cardinality == 10);
  }
  const auto ablation = appendix_config("ablation1");
  REQUIRE(ablation.size() == 3);
  for (const auto& c : ablation) {
    CHECK(c.n_features == 100);
    CHECK(c.numerical_ratio == 1.0);
    CHECK(c.difficulty == Difficulty::Hard);
  }
  CHECK(appendix_config("varyRecords", 0.1).front().n_records == 1000);
  CHECK_THROWS_AS(appendix_config("nope"), ConfigError);
}

TEST_CASE("config errors") {
  SynthConfig c;
  c.numerical_ratio = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.seasonality_ratio = 0.05;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_cardinality = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

}
