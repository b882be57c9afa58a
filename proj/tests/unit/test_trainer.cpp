#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "fxam/error.hpp"
#include "fxam/harness.hpp"
#include "fxam/trainer.hpp"
#include "support/toy.hpp"

using namespace fxam;
using fxam::testing::make_toy;
using fxam::testing::ToyShape;
using fxam::testing::tight_penalized_config;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> fitted(const TrainState& s) {
  std::vector<double> f(s.residual.size(), s.intercept);
  for (std::size_t r = 0; r < f.size(); ++r) {
    f[r] += s.categorical[r];
    for (const auto& c : s.numerical) f[r] += c[r];
    for (std::size_t k = 0; k < s.trend.size(); ++k) f[r] += s.trend[k][r] + s.seasonal[k][r];
  }
  return f;
}

// v'Kv in extended precision; near-tied knots make K's entries large enough
// for the double product to cancel.
double quad_form(const Eigen::MatrixXd& k, const Eigen::Ref<const Eigen::VectorXd>& v) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      total += static_cast<long double>(v[i]) * k(i, j) * v[j];
    }
  }
  return static_cast<double>(total);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
  const auto d = make_toy(1);
  TrainConfig c = tight_penalized_config(d);
  CHECK_NOTHROW(c.validate(d));
  auto bad = c;
  bad.temporal.clear();
  CHECK_THROWS_AS(bad.validate(d), ConfigError);
  bad = c;
  bad.lambda_z = 0.0;
  CHECK_THROWS_AS(bad.validate(d), ConfigError);
  bad = c;
  bad.temporal[0].period = 1;
  CHECK_THROWS_AS(bad.validate(d), ConfigError);
  bad = c;
  bad.stage_tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(d), ConfigError);
}

TEST_CASE("pilot estimates") {
  std::vector<double> x(400), y(400);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 10.0 * static_cast<double>(i) / 399.0;
    y[i] = 2.0 * x[i];
  }
  const auto p = pilot_estimates(x, y, 200, 3, SmootherKind::Penalized, 1.0);
  CHECK(p.max_slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p.sigma2 < 1e-12);

  const std::vector<double> flat(400, 5.0);
  const auto q = pilot_estimates(x, flat, 100, 3, SmootherKind::FastKernel, 0.5);
  CHECK(q.sup_f2 == doctest::Approx(25.0));
  CHECK(q.max_slope < 1e-9);
  CHECK(q.sigma2 < 1e-12);

  // n0 >= N smooths everything.
  const auto all = pilot_estimates(x, y, 1000, 1, SmootherKind::Penalized, 1.0);
  const auto again = pilot_estimates(x, y, 400, 99, SmootherKind::Penalized, 1.0);
  CHECK(all.sup_f2 == again.sup_f2);
}

TEST_CASE("sample size rule") {
  const PilotEstimate a{1.0, 4.0, 2.0};
  CHECK(estimate_sample_size(std::vector<PilotEstimate>{a}, 1.0, 5) == 10);
  CHECK(estimate_sample_size(std::vector<PilotEstimate>{a}, 1.0, 50) == 50);
  const PilotEstimate b{1.0, 2.0, 10.0};  // 30
  CHECK(estimate_sample_size(std::vector<PilotEstimate>{a, b}, 1.0, 1) == 30);
  CHECK(estimate_sample_size(std::vector<PilotEstimate>{a, b}, 0.5, 1) == 15);
}

TEST_CASE("predictive power") {
  std::vector<double> x(50);
  std::iota(x.begin(), x.end(), 0.0);
  const std::vector<double> flat(50, 2.0);
  CHECK(predictive_power(x, flat, 1.5, 1.0, 0.2) == doctest::Approx(-(2 * 1.5 * 1.0 * 0.2) * (2 * 1.5 * 1.0 * 0.2)));
  std::vector<double> line(50);
  double tss = 0.0;
  for (std::size_t i = 0; i < 50; ++i) line[i] = 3.0 * x[i] + 1.0;
  const double m = mean(line);
  for (double v : line) tss += (v - m) * (v - m);
  CHECK(predictive_power(x, line, 0.0, 1.0, 0.2) == doctest::Approx(2.0 * tss / 48.0));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> xi(1000), r(1000);
  for (auto& v : xi) v = normal(rng);
  for (auto& v : r) v = normal(rng);
  const double p = predictive_power(xi, r, 0.5, 1.0, 0.3);
  // r^2 is O(1/N), so the first term is O(TSS/N^2).
  CHECK(std::abs(p + 0.09) < 0.02);
}

TEST_CASE("feature ordering is stable and descending") {
  CHECK(order_features(std::vector<double>{1.0, 3.0, 2.0}) == std::vector<std::size_t>{1, 2, 0});
  CHECK(order_features(std::vector<double>{2.0, 2.0, 2.0}) == std::vector<std::size_t>{0, 1, 2});
  CHECK(order_features(std::vector<double>{7.0}) == std::vector<std::size_t>{0});
}

TEST_CASE("single feature reaches its fixed point in one pass") {
  ToyShape shape;
  shape.numerical = 1;
  shape.categorical = 0;
  shape.temporal = false;
  const auto d = make_toy(3, shape);
  auto c = tight_penalized_config(d);
  c.stage1_max_passes = 1;
  const Trainer t(d, c);
  auto s = t.initial_state();
  t.stage1_backfit(s);
  auto again = s;
  t.stage1_backfit(again);
  CHECK(max_abs_diff(s.numerical[0], again.numerical[0]) < 1e-12);
}

TEST_CASE("features on disjoint supports smooth independently") {
  // Each feature varies on its own half of the records and is constant on
  // the other half, so backfitting decouples.
  Dataset d;
  const std::size_t n = 50;
  d.response.resize(n);
  d.numerical.push_back({"a", std::vector<double>(n, 0.0)});
  d.numerical.push_back({"b", std::vector<double>(n, 0.0)});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double v = 1.0 + u(rng);
    if (r < n / 2) d.numerical[0].values[r] = v;
    else d.numerical[1].values[r] = v;
    d.response[r] = std::sin(3.0 * v) + 0.1 * u(rng);
  }
  auto c = tight_penalized_config(d, 0.1);
  const auto result = tsi_train_full(d, c);

  // Oracle: brute-force fixed-point iteration with dense smoother matrices.
  const Trainer t(d, c);
  const auto blocks = t.dense_blocks();
  const Eigen::Map<const Eigen::VectorXd> y(d.response.data(), n);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), f1 = a, f2 = a;
  for (int it = 0; it < 5000; ++it) {
    a = blocks[0].smoother * (y - f1 - f2);
    f1 = blocks[1].smoother * (y - a - f2);
    f2 = blocks[2].smoother * (y - a - f1);
  }
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(result.state.numerical[0][r] == doctest::Approx(f1(static_cast<Eigen::Index>(r))).epsilon(1e-6));
    CHECK(result.state.numerical[1][r] == doctest::Approx(f2(static_cast<Eigen::Index>(r))).epsilon(1e-6));
  }
}

TEST_CASE("shapes are centred after each stage 1 pass") {
  ToyShape shape;
  shape.numerical = 3;
  const auto d = make_toy(8, shape);
  auto c = tight_penalized_config(d);
  c.stage1_max_passes = 1;
  const Trainer t(d, c);
  auto s = t.initial_state();
  for (int pass = 0; pass < 5; ++pass) {
    t.stage1_backfit(s);
    for (const auto& f : s.numerical) CHECK(std::abs(mean(f)) < 1e-10 * t.response_sd());
  }
}

TEST_CASE("DFI only changes the order within a cycle") {
  ToyShape shape;
  shape.numerical = 4;
  const auto d = make_toy(5, shape);
  auto on = tight_penalized_config(d);
  auto off = on;
  off.dynamic_feature_iteration = false;
  const auto a = tsi_train_full(d, on);
  const auto b = tsi_train_full(d, off);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(max_abs_diff(a.state.numerical[i], b.state.numerical[i]) < 1e-6);
  }
}

TEST_CASE("stage 2 with no categorical features is a no-op") {
  ToyShape shape;
  shape.categorical = 0;
  const auto d = make_toy(2, shape);
  const Trainer t(d, tight_penalized_config(d));
  auto s = t.initial_state();
  t.stage1_backfit(s);
  const auto before = s;
  t.stage2_categorical(s);
  CHECK(s.intercept == before.intercept);
  CHECK(s.residual == before.residual);
}

TEST_CASE("stage 2 with zero target gives zero weights") {
  Dataset d;
  d.response.assign(30, 0.0);
  d.categorical.push_back({"z", {}});
  for (int r = 0; r < 30; ++r) d.categorical[0].values.push_back(std::to_string(r % 4));
  const Trainer t(d, tight_penalized_config(d));
  auto s = t.initial_state();
  t.stage2_categorical(s);
  CHECK(s.beta.cwiseAbs().maxCoeff() < 1e-12);
  for (double v : s.categorical) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("stage 2 one-hot closed form") {
  Dataset d;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  const std::size_t n = 90;
  d.categorical.push_back({"z", {}});
  for (std::size_t r = 0; r < n; ++r) {
    const auto v = rng() % 5;
    d.categorical[0].values.push_back("v" + std::to_string(v));
    d.response.push_back(static_cast<double>(v) + normal(rng));
  }
  const Trainer t(d, tight_penalized_config(d));
  auto s = t.initial_state();
  t.stage2_categorical(s);
  // The intercept is fitted jointly, so each weight shrinks the group mean
  // of y - alpha: beta_j = n_j mean_j(y - alpha) / (n_j + lambda_z).
  const auto& enc = t.encoding();
  for (std::size_t j = 0; j < enc.cardinality(); ++j) {
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (enc.row(r)[0] == j) {
        sum += d.response[r] - s.intercept;
        count += 1.0;
      }
    }
    CHECK(s.beta(static_cast<Eigen::Index>(j)) == doctest::Approx(sum / (count + 1.0)).epsilon(1e-9));
  }
  double fz = 0.0;
  for (std::size_t r = 0; r < n; ++r) fz += d.response[r] - s.categorical[r];
  CHECK(s.intercept == doctest::Approx(fz / static_cast<double>(n)).epsilon(1e-12));
}

TEST_CASE("stage 3 without temporal features is a no-op") {
  ToyShape shape;
  shape.temporal = false;
  const auto d = make_toy(2, shape);
  const Trainer t(d, tight_penalized_config(d));
  auto s = t.initial_state();
  const auto before = s.residual;
  t.stage3_temporal(s);
  CHECK(s.residual == before);
}

TEST_CASE("stage 3 on a zero residual leaves zero components") {
  Dataset d;
  for (int r = 0; r < 40; ++r) {
    d.response.push_back(4.0);
  }
  d.temporal.push_back({"t", {}});
  for (int r = 0; r < 40; ++r) d.temporal[0].values.push_back(r);
  const Trainer t(d, tight_penalized_config(d));
  auto s = t.initial_state();
  t.stage3_temporal(s);
  CHECK(s.intercept == doctest::Approx(4.0));
  for (double v : s.trend[0]) CHECK(std::abs(v) < 1e-10);
  for (double v : s.seasonal[0]) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("stage 3 recovers injected seasonality") {
  SynthConfig sc;
  sc.n_records = 20000;
  sc.n_features = 6;
  sc.has_temporal = true;
  sc.seasonality_ratio = 0.05;
  sc.seed = 4;
  const auto g = generate(sc);
  TrainConfig c;
  c.temporal = {{1, kSyntheticPeriod}};
  const auto r = tsi_train_full(g.dataset, c);
  double sab = 0, saa = 0, sbb = 0;
  const double ma = mean(r.state.seasonal[0]);
  const double mb = mean(g.truth.seasonal);
  for (std::size_t i = 0; i < g.truth.seasonal.size(); ++i) {
    const double a = r.state.seasonal[0][i] - ma;
    const double b = g.truth.seasonal[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  CHECK(sab / std::sqrt(saa * sbb) >= 0.9);
}

TEST_CASE("objective value examples") {
  ToyShape shape;
  shape.n = 20;
  shape.categorical = 0;
  auto d = make_toy(12, shape);
  auto c = tight_penalized_config(d, 0.0);
  const Trainer t(d, c);
  const std::vector<std::vector<double>> zeros2(2, std::vector<double>(20, 0.0));
  const std::vector<std::vector<double>> zeros1(1, std::vector<double>(20, 0.0));
  const auto zero_state = t.state_from_components(0.0, zeros2, {}, zeros1, zeros1);
  double ss = 0.0;
  for (double y : d.response) ss += y * y;
  CHECK(t.objective_value(zero_state).value == doctest::Approx(ss).epsilon(1e-12));

  // Perfect fit with all penalties zero: put y into the first shape.
  auto perfect = zeros2;
  perfect[0] = d.response;
  // Only valid as a shape if x0 has no ties; build distinct x0.
  for (std::size_t r = 0; r < 20; ++r) d.numerical[0].values[r] = static_cast<double>(r);
  const Trainer t2(d, c);
  const auto fit = t2.state_from_components(0.0, perfect, {}, zeros1, zeros1);
  CHECK(t2.objective_value(fit).value < 1e-20);
}

TEST_CASE("objective matches a termwise expansion") {
  ToyShape shape;
  shape.n = 20;
  const auto d = make_toy(13, shape);
  auto c = tight_penalized_config(d);
  c.lambda = 0.7;
  c.lambda_z = 1.3;
  c.lambda_t = 2.1;
  c.lambda_s = 0.4;
  c.max_cycles = 2;
  const Trainer t(d, c);
  auto s = t.initial_state();
  t.stage1_backfit(s);
  t.stage2_categorical(s);
  t.stage3_temporal(s);

  double expected = 0.0;
  const auto f = fitted(s);
  for (std::size_t r = 0; r < 20; ++r) expected += (d.response[r] - f[r]) * (d.response[r] - f[r]);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& knots = t.knot_grid(i).knots;
    const auto k = penalty_matrix(knots);
    const Eigen::Map<const Eigen::VectorXd> v(s.shape_values[i].data(), static_cast<Eigen::Index>(knots.size()));
    expected += c.lambda * quad_form(k, v);
  }
  expected += c.lambda_z * s.beta.squaredNorm();
  const auto& comp = s.temporal[0];
  std::vector<double> times(comp.times.begin(), comp.times.end());
  const Eigen::Map<const Eigen::VectorXd> tr(comp.trend.data(), static_cast<Eigen::Index>(times.size()));
  expected += c.lambda_t * quad_form(penalty_matrix(times), tr);
  const auto& p = t.partition(0);
  for (std::size_t phi = 0; phi < p.phase_sets.size(); ++phi) {
    if (p.phase_sets[phi].size() < 3) continue;
    std::vector<double> pt;
    for (auto k : p.phase_sets[phi]) pt.push_back(times[k]);
    const auto& sv = comp.seasonal_by_phase[phi];
    const Eigen::Map<const Eigen::VectorXd> v(sv.data(), static_cast<Eigen::Index>(sv.size()));
    expected += c.lambda_s * quad_form(penalty_matrix(pt), v);
  }
  CHECK(t.objective_value(s).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tsi matches the direct normal-equation solve") {
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    const auto d = make_toy(seed);
    const auto c = tight_penalized_config(d);
    const auto r = tsi_train_full(d, c);
    const Trainer t(d, c);
    const auto direct = normal_equation_direct_solve(t);
    CHECK(std::abs(r.state.intercept - direct.intercept) < 1e-6);
    for (std::size_t i = 0; i < 2; ++i) CHECK(max_abs_diff(r.state.numerical[i], direct.numerical[i]) < 1e-6);
    CHECK(max_abs_diff(r.state.categorical, direct.categorical) < 1e-6);
    CHECK(max_abs_diff(r.state.trend[0], direct.trend[0]) < 1e-6);
    CHECK(max_abs_diff(r.state.seasonal[0], direct.seasonal[0]) < 1e-6);
    CHECK(t.objective_value(direct).value <= t.objective_value(r.state).value + 1e-8);
    for (const auto& b : t.normal_equation_residuals(r.state)) {
      INFO(b.block);
      CHECK(b.value < 1e-6 * t.response_sd());
    }
  }
}

TEST_CASE("objective never increases across stages") {
  const auto d = make_toy(55);
  const auto r = tsi_train_full(d, tight_penalized_config(d));
  const auto& h = r.state.objective_history;
  REQUIRE(h.size() >= 4);
  for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] + 1e-10);
}

TEST_CASE("direct solve reduces to single-block problems") {
  ToyShape one;
  one.numerical = 1;
  one.categorical = 0;
  one.temporal = false;
  const auto d = make_toy(7, one);
  const auto c = tight_penalized_config(d);
  const Trainer t(d, c);
  const auto s = normal_equation_direct_solve(t);
  const auto& grid = t.knot_grid(0);
  std::vector<double> centred = d.response;
  const double m = mean(centred);
  for (double& v : centred) v -= m;
  const auto target = aggregate_to_knots(grid, centred);
  SmoothRequest req{grid.knots, target, grid.weights};
  req.lambda = c.lambda;
  const auto expected = expand_from_knots(grid, penalized_smooth(req));
  CHECK(max_abs_diff(s.numerical[0], expected) < 1e-9);
  CHECK(s.intercept == doctest::Approx(m));

  ToyShape cat;
  cat.numerical = 0;
  cat.temporal = false;
  const auto dc = make_toy(8, cat);
  const Trainer tc(dc, tight_penalized_config(dc));
  const auto sc = normal_equation_direct_solve(tc);
  const auto sys = absorb_intercept(gram_assemble(tc.encoding(), dc.response, 1.0), dc.response);
  CHECK((sc.beta - closed_form_ridge(sys)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("normal-equation residual examples") {
  Dataset zero;
  zero.response.assign(30, 0.0);
  zero.numerical.push_back({"x", {}});
  for (int r = 0; r < 30; ++r) zero.numerical[0].values.push_back(r * 0.1);
  const Trainer tz(zero, tight_penalized_config(zero));
  for (const auto& b : tz.normal_equation_residuals(tz.initial_state())) CHECK(b.value == 0.0);

  const auto d = make_toy(9);
  const auto c = tight_penalized_config(d);
  const auto r = tsi_train_full(d, c);
  const Trainer t(d, c);
  const double delta = 0.5;
  auto numerical = r.state.numerical;
  numerical[0][17] += delta;
  const auto bumped =
      t.state_from_components(r.state.intercept, numerical, r.state.beta, r.state.trend, r.state.seasonal);
  const auto blocks = t.dense_blocks();
  const double m = blocks[1].smoother(17, 17);
  const auto res = t.normal_equation_residuals(bumped);
  CHECK(res[1].value >= delta * (1.0 - m) - 1e-9);
  CHECK(res[1].value > 0.0);
}

TEST_CASE("residual helpers refuse large problems") {
  SynthConfig sc;
  sc.n_records = 6000;
  sc.n_features = 2;
  sc.numerical_ratio = 1.0;
  const auto g = generate(sc);
  TrainConfig c;
  c.backend = SmootherKind::Penalized;
  const Trainer t(g.dataset, c);
  CHECK_THROWS_AS(t.normal_equation_residuals(t.initial_state()), TestSupportError);
  CHECK_THROWS_AS(normal_equation_direct_solve(t), TestSupportError);
}

TEST_CASE("noiseless additive data is fitted closely") {
  // Many records per knot, so the additive parts are identifiable.
  ToyShape shape;
  shape.noise = 0.0;
  shape.n = 3000;
  shape.x_step = 0.1;
  const auto d = make_toy(21, shape);
  auto c = tight_penalized_config(d, 1e-5);
  const auto r = tsi_train_full(d, c);
  const auto pred = r.model.predict(d);
  const double sd = std::sqrt(population_variance(d.response));
  CHECK(rmse(pred, d.response) < 1e-3 * sd);
}

TEST_CASE("constant response") {
  const auto base = make_toy(4);
  Dataset d = base;
  std::fill(d.response.begin(), d.response.end(), 2.5);
  for (auto backend : {SmootherKind::Penalized, SmootherKind::FastKernel}) {
    auto c = tight_penalized_config(d);
    c.backend = backend;
    const auto r = tsi_train_full(d, c);
    CHECK(r.model.intercept == doctest::Approx(2.5));
    for (double p : r.model.predict(d)) CHECK(p == doctest::Approx(2.5).epsilon(1e-9));
    for (const auto& f : r.state.numerical) {
      for (double v : f) CHECK(std::abs(v) < 1e-9);
    }
    for (double v : r.state.categorical) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("training stops at max cycles without converging") {
  const auto d = make_toy(31);
  auto c = tight_penalized_config(d);
  c.max_cycles = 1;
  const auto model = tsi_train(d, c);
  CHECK_FALSE(model.diagnostics.converged);
  CHECK(model.diagnostics.cycles == 1);
}

TEST_CASE("sampling changes only the initialisation") {
  SynthConfig sc;
  sc.n_records = 6000;
  sc.n_features = 8;
  sc.numerical_ratio = 1.0;
  sc.seed = 3;
  const auto g = generate(sc);
  TrainConfig on;
  on.sampling.activation_threshold = 1000;
  on.sampling.pilot_size = 500;
  on.sampling.gamma = 1e-3;
  auto off = on;
  off.sampling.enabled = false;
  ExperimentConfig a{on, {}, 3, 1, 1};
  ExperimentConfig b{off, {}, 3, 1, 1};
  const std::vector<ExperimentConfig> runs{a, b};
  const auto reports = run_paired_experiments(g.dataset, runs);
  CHECK(reports[0].folds[0].sample_size > 0);
  CHECK(reports[0].folds[0].sample_size < 4000);
  CHECK(reports[1].folds[0].sample_size == 0);
  CHECK(std::abs(reports[0].mean_rmse - reports[1].mean_rmse) < 1e-3 * reports[1].mean_rmse);
}

TEST_CASE("kernel backend reports rss only") {
  const auto d = make_toy(14);
  auto c = tight_penalized_config(d);
  c.backend = SmootherKind::FastKernel;
  c.outer_tolerance = 1e-6;
  const auto r = tsi_train_full(d, c);
  CHECK(r.model.diagnostics.objective_is_rss);
  const Trainer t(d, c);
  const auto v = t.objective_value(r.state);
  CHECK(v.rss_only);
  CHECK(v.value == v.rss);
}

TEST_CASE("model predictions reproduce the training fit") {
  const auto d = make_toy(16);
  const auto r = tsi_train_full(d, tight_penalized_config(d));
  CHECK(max_abs_diff(r.model.predict(d), fitted(r.state)) < 1e-9);
}

}
