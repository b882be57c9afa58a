#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "fxam/dataset.hpp"
#include "fxam/error.hpp"

using namespace fxam;

namespace {

Dataset two_categorical(std::vector<std::string> z1, std::vector<std::string> z2) {
  Dataset d;
  d.response.assign(z1.size(), 0.0);
  d.categorical.push_back({"Z1", std::move(z1)});
  d.categorical.push_back({"Z2", std::move(z2)});
  return d;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("homogeneous encoding assigns one index per feature") {
  const auto enc = build_homogeneous_encoding(two_categorical({"a", "b"}, {"x", "x"}));
  CHECK(enc.cardinality() == 3);
  CHECK(enc.num_features == 2);
  CHECK(std::vector<std::uint32_t>(enc.row(0).begin(), enc.row(0).end()) ==
        std::vector<std::uint32_t>{0, 2});
  CHECK(std::vector<std::uint32_t>(enc.row(1).begin(), enc.row(1).end()) ==
        std::vector<std::uint32_t>{1, 2});
  CHECK(enc.labels[0] == "Z1=a");
  CHECK(enc.labels[2] == "Z2=x");
}

TEST_CASE("no categorical features gives an empty encoding") {
  Dataset d;
  d.response = {1.0, 2.0};
  d.numerical.push_back({"x", {0.0, 1.0}});
  const auto enc = build_homogeneous_encoding(d);
  CHECK(enc.cardinality() == 0);
  CHECK(enc.row(1).empty());
}

TEST_CASE("single repeated value maps every row to index 0") {
  Dataset d;
  d.response = {0, 0, 0};
  d.categorical.push_back({"Z", {"a", "a", "a"}});
  const auto enc = build_homogeneous_encoding(d);
  CHECK(enc.cardinality() == 1);
  for (std::size_t r = 0; r < 3; ++r) CHECK(enc.row(r)[0] == 0);
}

TEST_CASE("same value under different features stays distinct") {
  const auto enc = build_homogeneous_encoding(two_categorical({"a", "b"}, {"a", "b"}));
  CHECK(enc.cardinality() == 4);
}

TEST_CASE("q-hot property on random data") {
  std::mt19937_64 rng(3);
  Dataset d;
  const std::size_t n = 500;
  d.response.assign(n, 0.0);
  for (int m = 0; m < 4; ++m) {
    auto& col = d.categorical.emplace_back();
    col.name = "z" + std::to_string(m);
    for (std::size_t r = 0; r < n; ++r) col.values.push_back(std::to_string(rng() % (m + 2)));
  }
  const auto enc = build_homogeneous_encoding(d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = enc.row(r);
    REQUIRE(row.size() == 4);
    for (std::size_t m = 0; m < 4; ++m) {
      CHECK(row[m] >= enc.feature_offsets[m]);
      CHECK(row[m] < enc.feature_offsets[m + 1]);
    }
  }
}

TEST_CASE("compression takes weighted means") {
  const std::vector<std::int64_t> t{1, 1, 2};
  const std::vector<double> v{3, 5, 7};
  const auto s = compress_time_points(t, v);
  CHECK(s.times == std::vector<std::int64_t>{1, 2});
  CHECK(s.values == std::vector<double>{4.0, 7.0});
  CHECK(s.weights == std::vector<std::int64_t>{2, 1});
  CHECK(s.back_map == std::vector<std::size_t>{0, 0, 1});

  const std::vector<std::int64_t> same{5, 5, 5};
  const std::vector<double> vals{1, 2, 3};
  const auto one = compress_time_points(same, vals);
  CHECK(one.size() == 1);
  CHECK(one.values[0] == doctest::Approx(2.0));
  CHECK(one.weights[0] == 3);
}

TEST_CASE("distinct times compress to themselves") {
  const std::vector<std::int64_t> t{4, 1, 3};
  const std::vector<double> v{1, 2, 3};
  const auto s = compress_time_points(t, v);
  CHECK(s.times == std::vector<std::int64_t>{1, 3, 4});
  CHECK(s.weights == std::vector<std::int64_t>{1, 1, 1});
  CHECK(s.values == std::vector<double>{2, 3, 1});
}

TEST_CASE("compression preserves the weighted sum") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<std::int64_t> t(1000);
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<std::int64_t>(rng() % 60);
    v[i] = normal(rng);
  }
  const auto s = compress_time_points(t, v);
  double lhs = 0.0;
  std::int64_t total = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    lhs += s.values[k] * static_cast<double>(s.weights[k]);
    total += s.weights[k];
  }
  CHECK(total == 1000);
  CHECK(lhs == doctest::Approx(std::accumulate(v.begin(), v.end(), 0.0)).epsilon(1e-12));
  const auto back = expand_to_records(s, s.values);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(s.times[s.back_map[i]] == t[i]);
  const auto agg = aggregate_to_points(s, v);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(agg[k] == doctest::Approx(s.values[k]));
  CHECK(back.size() == t.size());
}

TEST_CASE("phase partition by modulus") {
  const std::vector<std::int64_t> t{0, 1, 2, 3, 4, 5};
  const auto s = compress_time_points(t, std::vector<double>(6, 0.0));
  const auto p = partition_phases(s, 1, 3);
  REQUIRE(p.phase_sets.size() == 3);
  CHECK(p.phase_sets[0] == std::vector<std::size_t>{0, 3});
  CHECK(p.phase_sets[1] == std::vector<std::size_t>{1, 4});
  CHECK(p.phase_sets[2] == std::vector<std::size_t>{2, 5});
}

TEST_CASE("phase partition with tau 2") {
  const std::vector<std::int64_t> t{0, 2, 4};
  const auto s = compress_time_points(t, std::vector<double>(3, 0.0));
  const auto p = partition_phases(s, 2, 2);
  CHECK(p.phase_sets[0] == std::vector<std::size_t>{0, 2});
  CHECK(p.phase_sets[1] == std::vector<std::size_t>{1});
}

TEST_CASE("missing time point leaves an empty phase") {
  const std::vector<std::int64_t> t{0, 1, 3};
  const auto s = compress_time_points(t, std::vector<double>(3, 0.0));
  const auto p = partition_phases(s, 1, 4);
  CHECK(p.phase_sets[0] == std::vector<std::size_t>{0});
  CHECK(p.phase_sets[1] == std::vector<std::size_t>{1});
  CHECK(p.phase_sets[2].empty());
  CHECK(p.phase_sets[3] == std::vector<std::size_t>{2});
}

TEST_CASE("phase sets partition the points on random gappy series") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t tau = 1 + static_cast<std::int64_t>(rng() % 3);
    const std::int64_t d = 2 + static_cast<std::int64_t>(rng() % 7);
    std::vector<std::int64_t> t;
    for (int i = 0; i < 80; ++i) t.push_back(tau * static_cast<std::int64_t>(rng() % 50));
    const auto s = compress_time_points(t, std::vector<double>(t.size(), 0.0));
    const auto p = partition_phases(s, tau, d);
    std::vector<int> seen(s.size(), 0);
    for (std::size_t phi = 0; phi < p.phase_sets.size(); ++phi) {
      for (auto k : p.phase_sets[phi]) {
        ++seen[k];
        CHECK((s.times[k] / tau) % d == static_cast<std::int64_t>(phi));
      }
    }
    for (int c : seen) CHECK(c == 1);
  }
}

TEST_CASE("phase partition rejects bad settings") {
  const std::vector<std::int64_t> t{0, 3};
  const auto s = compress_time_points(t, std::vector<double>(2, 0.0));
  CHECK_THROWS_AS(partition_phases(s, 1, 1), ConfigError);
  CHECK_THROWS_AS(partition_phases(s, 0, 4), ConfigError);
  CHECK_THROWS_AS(partition_phases(s, 2, 4), DataError);
}

TEST_CASE("negative times use a non-negative phase") {
  CHECK(phase_of(-1, 1, 4) == 3);
  CHECK(phase_of(-4, 1, 4) == 0);
}

TEST_CASE("knot grid merges ties") {
  const std::vector<double> x{0.5, 0.1, 0.5, 0.3};
  const auto g = build_knot_grid(x);
  CHECK(g.knots == std::vector<double>{0.1, 0.3, 0.5});
  CHECK(g.weights == std::vector<double>{1, 1, 2});
  const std::vector<double> y{1, 2, 3, 4};
  const auto agg = aggregate_to_knots(g, y);
  CHECK(agg == std::vector<double>{2, 4, 2});
  const auto back = expand_from_knots(g, agg);
  CHECK(back == std::vector<double>{2, 2, 2, 4});
}

TEST_CASE("validation") {
  Dataset d;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.response = {1, 2};
  d.numerical.push_back({"x", {0.0, 1.0}});
  CHECK_NOTHROW(d.validate());
  d.numerical.push_back({"x", {0.0, 1.0}});
  CHECK_THROWS_AS(d.validate(), DataError);
  d.numerical.back().name = "w";
  d.numerical.back().values = {0.0};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.numerical.back().values = {0.0, std::nan("")};
  CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("subset keeps order") {
  Dataset d;
  d.response = {1, 2, 3};
  d.numerical.push_back({"x", {10, 20, 30}});
  d.categorical.push_back({"z", {"a", "b", "c"}});
  d.temporal.push_back({"t", {1, 2, 3}});
  const std::vector<std::size_t> rows{2, 0};
  const auto s = d.subset(rows);
  CHECK(s.response == std::vector<double>{3, 1});
  CHECK(s.numerical[0].values == std::vector<double>{30, 10});
  CHECK(s.categorical[0].values == std::vector<std::string>{"c", "a"});
  CHECK(s.temporal[0].values == std::vector<std::int64_t>{3, 1});
}

}
