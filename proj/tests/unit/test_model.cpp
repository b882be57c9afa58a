#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"

#include "fxam/error.hpp"
#include "fxam/model.hpp"
#include "fxam/trainer.hpp"
#include "support/toy.hpp"

using namespace fxam;
using fxam::testing::make_toy;
using fxam::testing::tight_penalized_config;

namespace {

FxamModel tiny_model() {
  FxamModel m;
  m.schema.response = "y";
  m.schema.numerical = {"x"};
  m.intercept = 1.0;
  m.shapes.push_back({{0.0, 1.0}, {0.0, 2.0}});
  return m;
}

FxamModel trained(std::uint64_t seed) {
  const auto d = make_toy(seed);
  return tsi_train(d, tight_penalized_config(d));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("shape evaluation") {
  const ShapeCurve c{{0.0, 1.0, 3.0}, {5.0, 2.0, 4.0}};
  CHECK(evaluate_shape(c, 1.0) == 2.0);
  CHECK(evaluate_shape(c, 2.0) == doctest::Approx(3.0));
  CHECK(evaluate_shape(c, -10.0) == 5.0);
  CHECK(evaluate_shape(c, 10.0) == 4.0);
  CHECK_THROWS_AS(evaluate_shape(ShapeCurve{}, 0.0), DataError);
  CHECK_THROWS_AS((ShapeCurve{{1.0, 1.0}, {0.0, 0.0}}.validate()), DataError);
}

TEST_CASE("record prediction") {
  auto m = tiny_model();
  Record r;
  r.numerical["x"] = 0.5;
  CHECK(m.predict(r) == doctest::Approx(2.0));
  Record missing;
  CHECK_THROWS_AS(m.predict(missing), DataError);
  r.numerical["x"] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(m.predict(r), DataError);
}

TEST_CASE("unseen categorical values contribute zero") {
  auto m = tiny_model();
  m.schema.categorical = {"z"};
  m.betas["z=a"] = 1.5;
  m.betas["z=b"] = -0.5;
  Record seen;
  seen.numerical["x"] = 0.0;
  seen.categorical["z"] = "a";
  Record unseen = seen;
  unseen.categorical["z"] = "never";
  CHECK(m.predict(seen) == doctest::Approx(2.5));
  CHECK(m.predict(unseen) == doctest::Approx(1.0));
  CHECK(m.beta("z=a") == 1.5);
  CHECK(m.beta("z=never") == 0.0);
}

TEST_CASE("batch and record predictions agree") {
  const auto d = make_toy(3);
  const auto m = tsi_train(d, tight_penalized_config(d));
  const auto batch = m.predict(d);
  for (std::size_t r = 0; r < d.size(); r += 17) {
    Record rec;
    for (const auto& c : d.numerical) rec.numerical[c.name] = c.values[r];
    for (const auto& c : d.categorical) rec.categorical[c.name] = c.values[r];
    for (const auto& c : d.temporal) rec.temporal[c.name] = c.values[r];
    CHECK(m.predict(rec) == doctest::Approx(batch[r]).epsilon(1e-12));
  }
}

TEST_CASE("decomposition sums to the prediction") {
  const auto d = make_toy(4);
  const auto m = tsi_train(d, tight_penalized_config(d));
  const auto parts = decompose_records(m, d);
  const auto pred = m.predict(d);
  CHECK(parts.columns.size() == 2 + 2 + 2);
  for (std::size_t r = 0; r < d.size(); ++r) {
    double total = parts.intercept;
    for (const auto& [name, values] : parts.columns) total += values[r];
    CHECK(total == doctest::Approx(pred[r]).epsilon(1e-12));
  }
}

TEST_CASE("serialization round trip is exact") {
  const auto m = trained(5);
  const auto back = deserialize(serialize(m));
  CHECK(back.intercept == m.intercept);
  CHECK(back.betas == m.betas);
  REQUIRE(back.shapes.size() == m.shapes.size());
  for (std::size_t i = 0; i < m.shapes.size(); ++i) {
    CHECK(back.shapes[i].knots == m.shapes[i].knots);
    CHECK(back.shapes[i].values == m.shapes[i].values);
  }
  CHECK(back.diagnostics.objective_history == m.diagnostics.objective_history);
  const auto probe = make_toy(77);
  CHECK(back.predict(probe) == m.predict(probe));
  CHECK(serialize(back) == serialize(m));
}

TEST_CASE("model without categorical features round trips") {
  const auto m = tiny_model();
  const auto back = deserialize(serialize(m));
  CHECK(back.betas.empty());
  Record r;
  r.numerical["x"] = 0.25;
  CHECK(back.predict(r) == m.predict(r));
}

TEST_CASE("version mismatch and malformed payloads") {
  auto text = serialize(tiny_model());
  const auto pos = text.find("\"version\"");
  REQUIRE(pos != std::string::npos);
  auto tampered = text;
  const auto colon = tampered.find(':', pos);
  const auto end = tampered.find_first_of(",}", colon);
  tampered.replace(colon + 1, end - colon - 1, "99");
  CHECK_THROWS_WITH_AS(deserialize(tampered), doctest::Contains("version"), DataError);
  CHECK_THROWS_AS(deserialize("{not json"), DataError);
  CHECK_THROWS_AS(deserialize("{\"version\": 1}"), DataError);
}

TEST_CASE("format_double is shortest and exact") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("save and load") {
  const auto m = trained(6);
  const auto path = (std::filesystem::temp_directory_path() / "fxam_model_test.json").string();
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(serialize(back) == serialize(m));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), DataError);
}

TEST_CASE("contribution export") {
  FxamModel m;
  m.schema.categorical = {"z"};
  m.betas["z=a"] = 1.5;
  const auto rows = export_contributions(m);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].component == "categorical");
  CHECK(rows[0].feature == "z");
  CHECK(rows[0].key == "z=a");
  CHECK(rows[0].value == 1.5);
  CHECK(contributions_csv(rows) == "component,feature,phase,key,value\ncategorical,z,,z=a,1.5\n");

  FxamModel q;
  q.schema.categorical = {"z"};
  q.betas["z=a,\"b\""] = 1.0;
  CHECK(contributions_csv(export_contributions(q)).find("\"z=a,\"\"b\"\"\"") != std::string::npos);
}

TEST_CASE("seasonal export reproduces temporal evaluation") {
  const auto m = trained(7);
  const auto rows = export_contributions(m);
  const auto& curves = m.temporals.at(0);
  std::size_t checked = 0;
  for (const auto& r : rows) {
    if (r.component != "seasonal") continue;
    const auto t = static_cast<std::int64_t>(std::stod(r.key));
    const auto [trend, seasonal] = evaluate_temporal_curves(curves, t);
    CHECK(seasonal == r.value);
    CHECK(r.phase == static_cast<int>(phase_of(t, curves.tau, curves.period)));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("noiseless linear shape exports slope two") {
  Dataset d;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int r = 0; r < 300; ++r) {
    const double x = u(rng);
    d.numerical.resize(1);
    d.numerical[0].name = "x";
    d.numerical[0].values.push_back(x);
    d.response.push_back(2.0 * x);
  }
  const auto m = tsi_train(d, tight_penalized_config(d));
  const auto& c = m.shapes[0];
  for (std::size_t k = 1; k + 1 < c.knots.size(); k += 10) {
    CHECK((c.values[k + 1] - c.values[k]) / (c.knots[k + 1] - c.knots[k]) ==
          doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("validation catches inconsistent models") {
  auto m = tiny_model();
  CHECK_NOTHROW(m.validate());
  m.schema.numerical.push_back("w");
  CHECK_THROWS_AS(m.validate(), DataError);
  auto n = tiny_model();
  n.intercept = std::nan("");
  CHECK_THROWS_AS(n.validate(), DataError);
}

}
