#include "fxam/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "fxam/error.hpp"
#include "fxam/interpolation.hpp"

namespace fxam {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// First min(m, n) entries of a seeded Fisher-Yates shuffle.
std::vector<std::size_t> uniform_subsample(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (m >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double knot_mean(const KnotGrid& grid, std::span<const double> values) {
  double s = 0.0;
  double w = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    s += grid.weights[k] * values[k];
    w += grid.weights[k];
  }
  return s / w;
}

}  // namespace

void TrainConfig::validate(const Dataset& dataset) const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(lambda >= 0.0 && lambda_t >= 0.0 && lambda_s >= 0.0, "penalties must be >= 0");
  require(dataset.categorical.empty() || lambda_z > 0.0, "lambda_z must be > 0");
  require(bandwidth_factor > 0.0 && trend_bandwidth_factor > 0.0 &&
              seasonal_bandwidth_factor > 0.0,
          "bandwidth factors must be > 0");
  require(stage_tolerance > 0.0 && outer_tolerance > 0.0 && temporal_tolerance > 0.0 &&
              nga_tolerance > 0.0,
          "tolerances must be > 0");
  require(stage1_max_passes >= 1 && max_cycles >= 1 && temporal_max_iterations >= 1,
          "iteration limits must be >= 1");
  require(sampling.gamma > 0.0, "sampling gamma must be > 0");
  require(sampling.pilot_size >= 10, "pilot size must be >= 10");
  if (temporal.size() != dataset.temporal.size()) {
    throw ConfigError("need one (tau, period) entry per temporal column");
  }
  for (const auto& t : temporal) {
    require(t.period > 1, "seasonal period must be > 1");
    require(t.tau > 0, "tau must be > 0");
  }
}

PilotEstimate pilot_estimates(std::span<const double> x, std::span<const double> y, std::size_t n0,
                              std::uint64_t seed, SmootherKind backend, double parameter) {
  if (n0 < 10) throw ConfigError("pilot size must be >= 10");
  if (x.size() != y.size() || x.empty()) throw DataError("pilot: x and y differ in length");
  const auto rows = uniform_subsample(x.size(), n0, seed);
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(rows.size());
  ys.reserve(rows.size());
  for (auto r : rows) {
    xs.push_back(x[r]);
    ys.push_back(y[r]);
  }
  const auto grid = build_knot_grid(xs);
  const auto target = aggregate_to_knots(grid, ys);
  SmoothRequest req{grid.knots, target, grid.weights};
  req.bandwidth = default_bandwidth(grid.knots, parameter, xs.size());
  req.lambda = parameter;
  const auto fit = smooth(backend, req);

  PilotEstimate out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - fit[grid.back_map[i]];
    out.sigma2 += e * e;
  }
  out.sigma2 /= static_cast<double>(xs.size());
  for (double f : fit) out.sup_f2 = std::max(out.sup_f2, f * f);
  out.max_slope = max_abs_slope(grid.knots, fit);
  return out;
}

std::size_t estimate_sample_size(std::span<const PilotEstimate> pilots, double gamma,
                                 std::size_t n0) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  double best = 0.0;
  for (const auto& p : pilots) best = std::max(best, gamma * (p.sigma2 + p.sup_f2) * p.max_slope);
  const double n = std::ceil(best);
  if (n <= static_cast<double>(n0)) return n0;
  return static_cast<std::size_t>(n);
}

namespace {

double power_from_sums(double sxx, double srr, double sxr, std::size_t n, double max_slope,
                       double support, double bandwidth) {
  const double r = (sxx > 0.0 && srr > 0.0) ? sxr / std::sqrt(sxx * srr) : 0.0;
  const double bias = 2.0 * max_slope * support * bandwidth;
  return 2.0 * srr * r * r / static_cast<double>(n - 2) - bias * bias;
}

}  // namespace

double predictive_power(std::span<const double> x, std::span<const double> residual,
                        double max_slope, double support, double bandwidth) {
  const std::size_t n = x.size();
  if (n < 3 || residual.size() != n) throw ConfigError("predictive_power: need N >= 3");
  const double mx = mean_of(x);
  const double mr = mean_of(residual);
  double sxx = 0.0;
  double srr = 0.0;
  double sxr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dr = residual[i] - mr;
    sxx += dx * dx;
    srr += dr * dr;
    sxr += dx * dr;
  }
  return power_from_sums(sxx, srr, sxr, n, max_slope, support, bandwidth);
}

std::vector<std::size_t> order_features(std::span<const double> powers) {
  std::vector<std::size_t> order(powers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return powers[a] > powers[b]; });
  return order;
}

double max_abs_slope(std::span<const double> knots, std::span<const double> values) {
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double dx = knots[k + 1] - knots[k];
    if (dx > 0.0) best = std::max(best, std::abs(values[k + 1] - values[k]) / dx);
  }
  return best;
}

Trainer::Trainer(const Dataset& dataset, TrainConfig config)
    : dataset_(dataset), config_(std::move(config)) {
  dataset_.validate();
  config_.validate(dataset_);
  const std::size_t n = dataset_.size();
  y_mean_ = mean_of(dataset_.response);
  y_sd_ = sd_of(dataset_.response);

  for (const auto& col : dataset_.numerical) {
    const double mx = mean_of(col.values);
    double ss = 0.0;
    for (double v : col.values) ss += (v - mx) * (v - mx);
    x_mean_.push_back(mx);
    x_ss_.push_back(ss);
    grids_.push_back(build_knot_grid(col.values));
    bandwidths_.push_back(default_bandwidth(grids_.back().knots, config_.bandwidth_factor, n));
  }

  encoding_ = build_homogeneous_encoding(dataset_);
  if (encoding_.cardinality() > 0) {
    const std::vector<double> zeros(n, 0.0);
    ridge_ = std::make_unique<RidgeSystem>(
        absorb_intercept(gram_assemble(encoding_, zeros, config_.lambda_z), zeros));
    ridge_step_ = 1.0 / power_iteration_max_eig(*ridge_).eigenvalue;
  }

  const std::vector<double> zeros(n, 0.0);
  for (std::size_t k = 0; k < dataset_.temporal.size(); ++k) {
    series_.push_back(compress_time_points(dataset_.temporal[k].values, zeros));
    partitions_.push_back(
        partition_phases(series_.back(), config_.temporal[k].tau, config_.temporal[k].period));
  }
}

TrainState Trainer::initial_state() const {
  const std::size_t n = dataset_.size();
  TrainState s;
  s.intercept = y_mean_;
  for (const auto& g : grids_) {
    s.shape_values.emplace_back(g.size(), 0.0);
    s.numerical.emplace_back(n, 0.0);
  }
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(encoding_.cardinality()));
  s.categorical.assign(n, 0.0);
  for (std::size_t k = 0; k < series_.size(); ++k) {
    TemporalComponents c;
    c.times = series_[k].times;
    c.weights.assign(series_[k].weights.begin(), series_[k].weights.end());
    c.trend.assign(series_[k].size(), 0.0);
    c.seasonal.assign(series_[k].size(), 0.0);
    for (const auto& set : partitions_[k].phase_sets) c.seasonal_by_phase.emplace_back(set.size(), 0.0);
    s.temporal.push_back(std::move(c));
    s.trend.emplace_back(n, 0.0);
    s.seasonal.emplace_back(n, 0.0);
  }
  s.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.residual[i] = dataset_.response[i] - s.intercept;
  return s;
}

std::vector<double> Trainer::smooth_feature(std::size_t feature,
                                            std::span<const double> target) const {
  const auto& grid = grids_[feature];
  const auto agg = aggregate_to_knots(grid, target);
  SmoothRequest req{grid.knots, agg, grid.weights};
  req.bandwidth = bandwidths_[feature];
  req.lambda = config_.lambda;
  return smooth(config_.backend, req);
}

std::vector<double> Trainer::partial_residual_with(const TrainState& state,
                                                   std::span<const double> component) const {
  std::vector<double> out(state.residual.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = state.residual[i] + component[i];
  return out;
}

void Trainer::stage1_backfit(TrainState& state) const {
  const std::size_t p = grids_.size();
  if (p == 0) return;
  const std::size_t n = dataset_.size();
  const double threshold = config_.stage_tolerance * (y_sd_ > 0.0 ? y_sd_ : 1.0);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> partial(n);
  std::vector<double> powers(p);

  if (config_.dynamic_feature_iteration && p > 1 && n >= 3) {
    // Reordered once per cycle. Same value as predictive_power on the
    // partial residual, in one sweep: x is centred once up front and the
    // partial residual is never stored.
    for (std::size_t i = 0; i < p; ++i) {
      const auto& x = dataset_.numerical[i].values;
      const auto& f = state.numerical[i];
      const double mx = x_mean_[i];
      double sp = 0.0;
      double spp = 0.0;
      double sxp = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double v = state.residual[r] + f[r];
        sp += v;
        spp += v * v;
        sxp += (x[r] - mx) * v;
      }
      const double srr = std::max(0.0, spp - sp * sp / static_cast<double>(n));
      powers[i] = power_from_sums(x_ss_[i], srr, sxp, n,
                                  max_abs_slope(grids_[i].knots, state.shape_values[i]), 1.0,
                                  bandwidths_[i]);
    }
    order = order_features(powers);
  }

  for (int pass = 0; pass < config_.stage1_max_passes; ++pass) {
    double max_change = 0.0;
    for (auto i : order) {
      auto& f = state.numerical[i];
      for (std::size_t r = 0; r < n; ++r) partial[r] = state.residual[r] + f[r];
      auto fitted = smooth_feature(i, partial);
      const double shift = knot_mean(grids_[i], fitted);
      for (std::size_t k = 0; k < fitted.size(); ++k) {
        fitted[k] -= shift;
        max_change = std::max(max_change, std::abs(fitted[k] - state.shape_values[i][k]));
      }
      state.intercept += shift;
      const auto& back = grids_[i].back_map;
      for (std::size_t r = 0; r < n; ++r) {
        f[r] = fitted[back[r]];
        state.residual[r] = partial[r] - f[r] - shift;
      }
      state.shape_values[i] = std::move(fitted);
    }
    ++state.stage1_passes;
    if (max_change <= threshold) break;
  }
}

void Trainer::stage2_categorical(TrainState& state) const {
  if (!ridge_) return;
  const std::size_t n = dataset_.size();
  // Everything except the intercept and f_Z; both are refit jointly.
  std::vector<double> target(n);
  double target_mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    target[r] = state.residual[r] + state.categorical[r] + state.intercept;
    target_mean += target[r];
  }
  target_mean /= static_cast<double>(n);
  // Centre before summing per label: forming the sums first and subtracting
  // counts * mean leaves rounding noise along the flat directions of the
  // system, which NGA cannot remove when lambda_Z is small.
  // A second pass removes what rounding left of the mean.
  std::vector<double> centred(n);
  double drift = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    centred[r] = target[r] - target_mean;
    drift += centred[r];
  }
  drift /= static_cast<double>(n);
  for (double& v : centred) v -= drift;
  const Eigen::VectorXd rhs = assemble_rhs(encoding_, centred);

  NgaOptions options;
  options.tol = config_.nga_tolerance;
  options.max_iter = config_.nga_max_iterations;
  options.step = ridge_step_;
  auto result = nga_ridge_solve(*ridge_, rhs, options, &state.beta);

  // Keep the previous weights if the accelerated iterate ends up worse.
  auto quadratic = [&](const Eigen::VectorXd& b) {
    return 0.5 * b.dot(ridge_->multiply(b)) - rhs.dot(b);
  };
  if (quadratic(result.beta) <= quadratic(state.beta)) state.beta = std::move(result.beta);

  state.categorical = expand_categorical(encoding_, state.beta);
  double intercept = 0.0;
  for (std::size_t r = 0; r < n; ++r) intercept += target[r] - state.categorical[r];
  state.intercept = intercept / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    state.residual[r] = target[r] - state.intercept - state.categorical[r];
  }
}

DecomposeConfig Trainer::decompose_config() const {
  DecomposeConfig dc;
  dc.backend = config_.backend;
  const bool kernel = config_.backend == SmootherKind::FastKernel;
  dc.trend_parameter = kernel ? config_.trend_bandwidth_factor : config_.lambda_t;
  dc.seasonal_parameter = kernel ? config_.seasonal_bandwidth_factor : config_.lambda_s;
  dc.tolerance = config_.temporal_tolerance;
  dc.max_iterations = config_.temporal_max_iterations;
  return dc;
}

void Trainer::stage3_temporal(TrainState& state) const {
  const std::size_t n = dataset_.size();
  const auto dc = decompose_config();
  for (std::size_t k = 0; k < series_.size(); ++k) {
    std::vector<double> partial(n);
    for (std::size_t r = 0; r < n; ++r) {
      partial[r] = state.residual[r] + state.trend[k][r] + state.seasonal[k][r];
    }
    const auto points = aggregate_to_points(series_[k], partial);
    auto comp = decompose(series_[k], partitions_[k], points, dc, &state.temporal[k]);

    double sw = 0.0;
    double shift = 0.0;
    for (std::size_t j = 0; j < comp.trend.size(); ++j) {
      sw += comp.weights[j];
      shift += comp.weights[j] * comp.trend[j];
    }
    shift /= sw;
    for (auto& v : comp.trend) v -= shift;
    state.intercept += shift;

    state.trend[k] = expand_to_records(series_[k], comp.trend);
    state.seasonal[k] = expand_to_records(series_[k], comp.seasonal);
    for (std::size_t r = 0; r < n; ++r) {
      state.residual[r] = partial[r] - state.trend[k][r] - state.seasonal[k][r] - shift;
    }
    state.temporal[k] = std::move(comp);
  }
}

std::size_t Trainer::sampling_initialize(TrainState& state) const {
  const auto& sc = config_.sampling;
  const std::size_t n = dataset_.size();
  const std::size_t p = grids_.size();
  if (!sc.enabled || p == 0 || n <= sc.activation_threshold) return 0;

  const double parameter =
      config_.backend == SmootherKind::FastKernel ? config_.bandwidth_factor : config_.lambda;
  std::vector<double> centered(n);
  for (std::size_t r = 0; r < n; ++r) centered[r] = dataset_.response[r] - y_mean_;

  std::vector<PilotEstimate> pilots;
  pilots.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    pilots.push_back(pilot_estimates(dataset_.numerical[i].values, centered, sc.pilot_size,
                                     config_.seed, config_.backend, parameter));
  }
  const std::size_t n_star = estimate_sample_size(pilots, sc.gamma, sc.pilot_size);
  if (n_star >= n) return 0;

  // Backfit the numerical features alone on the subsample.
  const auto rows = uniform_subsample(n, n_star, config_.seed + 1);
  Dataset sample;
  sample.response_name = dataset_.response_name;
  sample.response.reserve(rows.size());
  for (auto r : rows) sample.response.push_back(centered[r]);
  for (const auto& col : dataset_.numerical) {
    auto& c = sample.numerical.emplace_back();
    c.name = col.name;
    c.values.reserve(rows.size());
    for (auto r : rows) c.values.push_back(col.values[r]);
  }
  TrainConfig sub_config = config_;
  sub_config.temporal.clear();
  sub_config.sampling.enabled = false;
  const Trainer sub(sample, sub_config);
  auto sub_state = sub.initial_state();
  sub.stage1_backfit(sub_state);

  for (std::size_t i = 0; i < p; ++i) {
    const auto& grid = grids_[i];
    std::vector<double> values(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      values[k] = interpolate_clamped(sub.knot_grid(i).knots, sub_state.shape_values[i],
                                      grid.knots[k]);
    }
    const double shift = knot_mean(grid, values);
    for (auto& v : values) v -= shift;
    auto& f = state.numerical[i];
    for (std::size_t r = 0; r < n; ++r) {
      const double updated = values[grid.back_map[r]];
      state.residual[r] -= updated - f[r];
      f[r] = updated;
    }
    state.shape_values[i] = std::move(values);
  }
  return n_star;
}

ObjectiveValue Trainer::objective_value(const TrainState& state) const {
  const std::size_t n = dataset_.size();
  ObjectiveValue out;
  for (std::size_t r = 0; r < n; ++r) {
    double e = dataset_.response[r] - state.intercept - state.categorical[r];
    for (const auto& f : state.numerical) e -= f[r];
    for (std::size_t k = 0; k < state.trend.size(); ++k) e -= state.trend[k][r] + state.seasonal[k][r];
    out.rss += e * e;
  }
  out.value = out.rss;
  if (config_.backend != SmootherKind::Penalized) {
    out.rss_only = true;
    return out;
  }
  for (std::size_t i = 0; i < grids_.size(); ++i) {
    out.value += config_.lambda * roughness_penalty(grids_[i].knots, state.shape_values[i]);
  }
  if (state.beta.size() > 0) out.value += config_.lambda_z * state.beta.squaredNorm();
  for (std::size_t k = 0; k < state.temporal.size(); ++k) {
    out.value += config_.lambda_t * temporal_trend_penalty(state.temporal[k]);
    out.value += config_.lambda_s * temporal_seasonal_penalty(state.temporal[k], partitions_[k]);
  }
  return out;
}

TrainState Trainer::state_from_components(double intercept,
                                          const std::vector<std::vector<double>>& numerical,
                                          const Eigen::VectorXd& beta,
                                          const std::vector<std::vector<double>>& trend,
                                          const std::vector<std::vector<double>>& seasonal) const {
  TrainState s = initial_state();
  const std::size_t n = dataset_.size();
  s.intercept = intercept;
  for (std::size_t i = 0; i < grids_.size(); ++i) {
    s.numerical[i] = numerical.at(i);
    for (std::size_t r = 0; r < n; ++r) s.shape_values[i][grids_[i].back_map[r]] = numerical[i][r];
  }
  if (beta.size() > 0) {
    s.beta = beta;
    s.categorical = expand_categorical(encoding_, beta);
  }
  for (std::size_t k = 0; k < series_.size(); ++k) {
    s.trend[k] = trend.at(k);
    s.seasonal[k] = seasonal.at(k);
    auto& c = s.temporal[k];
    for (std::size_t r = 0; r < n; ++r) {
      c.trend[series_[k].back_map[r]] = trend[k][r];
      c.seasonal[series_[k].back_map[r]] = seasonal[k][r];
    }
    for (std::size_t phi = 0; phi < partitions_[k].phase_sets.size(); ++phi) {
      const auto& set = partitions_[k].phase_sets[phi];
      for (std::size_t a = 0; a < set.size(); ++a) c.seasonal_by_phase[phi][a] = c.seasonal[set[a]];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    double e = dataset_.response[r] - s.intercept - s.categorical[r];
    for (const auto& f : s.numerical) e -= f[r];
    for (std::size_t k = 0; k < s.trend.size(); ++k) e -= s.trend[k][r] + s.seasonal[k][r];
    s.residual[r] = e;
  }
  return s;
}

FxamModel Trainer::to_model(const TrainState& state, TrainingDiagnostics diagnostics) const {
  FxamModel m;
  m.schema.response = dataset_.response_name;
  for (const auto& c : dataset_.numerical) m.schema.numerical.push_back(c.name);
  for (const auto& c : dataset_.categorical) m.schema.categorical.push_back(c.name);
  for (const auto& c : dataset_.temporal) m.schema.temporal.push_back(c.name);
  m.intercept = state.intercept;
  for (std::size_t i = 0; i < grids_.size(); ++i) {
    m.shapes.push_back(ShapeCurve{grids_[i].knots, state.shape_values[i]});
  }
  for (std::size_t j = 0; j < encoding_.cardinality(); ++j) {
    m.betas.emplace(encoding_.labels[j], state.beta[static_cast<Eigen::Index>(j)]);
  }
  for (std::size_t k = 0; k < series_.size(); ++k) {
    TemporalCurves tc;
    tc.name = dataset_.temporal[k].name;
    tc.tau = partitions_[k].tau;
    tc.period = partitions_[k].period;
    const auto& comp = state.temporal[k];
    tc.trend.knots.assign(comp.times.begin(), comp.times.end());
    tc.trend.values = comp.trend;
    for (std::size_t phi = 0; phi < partitions_[k].phase_sets.size(); ++phi) {
      ShapeCurve curve;
      curve.knots = phase_times(comp, partitions_[k], phi);
      curve.values = comp.seasonal_by_phase[phi];
      tc.seasonal.push_back(std::move(curve));
    }
    m.temporals.push_back(std::move(tc));
  }
  m.diagnostics = std::move(diagnostics);
  return m;
}

TrainResult tsi_train_full(const Dataset& dataset, const TrainConfig& config) {
  const auto t_init = Clock::now();
  const Trainer trainer(dataset, config);
  TrainState state = trainer.initial_state();

  TrainingDiagnostics diag;
  diag.objective_is_rss = config.backend != SmootherKind::Penalized;
  diag.sample_size = trainer.sampling_initialize(state);
  diag.timing.init_seconds = seconds_since(t_init);

  auto record = [&]() {
    const double v = trainer.objective_value(state).value;
    if (!std::isfinite(v)) throw ConvergenceError("diverged: objective is not finite");
    state.objective_history.push_back(v);
    return v;
  };

  double previous = record();
  for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
    auto t = Clock::now();
    trainer.stage1_backfit(state);
    diag.timing.stage1_seconds += seconds_since(t);
    record();

    t = Clock::now();
    trainer.stage2_categorical(state);
    diag.timing.stage2_seconds += seconds_since(t);
    record();

    t = Clock::now();
    trainer.stage3_temporal(state);
    diag.timing.stage3_seconds += seconds_since(t);
    const double current = record();

    state.cycle = cycle;
    const double scale = std::abs(previous);
    const double decrease = scale > 0.0 ? (previous - current) / scale : 0.0;
    if (decrease < config.outer_tolerance) {
      diag.converged = true;
      break;
    }
    previous = current;
  }
  diag.cycles = state.cycle;
  diag.objective_history = state.objective_history;
  TrainResult out{trainer.to_model(state, std::move(diag)), std::move(state)};
  return out;
}

FxamModel tsi_train(const Dataset& dataset, const TrainConfig& config) {
  return tsi_train_full(dataset, config).model;
}

}  // namespace fxam
