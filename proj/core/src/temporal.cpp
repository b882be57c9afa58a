#include "fxam/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseLU>

#include "fxam/error.hpp"
#include "fxam/interpolation.hpp"

namespace fxam {

namespace {

double weighted_sd(std::span<const double> v, std::span<const double> w) {
  double sw = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sw += w[i];
    mean += w[i] * v[i];
  }
  mean /= sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) ss += w[i] * (v[i] - mean) * (v[i] - mean);
  return std::sqrt(ss / sw);
}

std::vector<double> as_doubles(std::span<const std::int64_t> t) {
  return {t.begin(), t.end()};
}

void split_seasonal(TemporalComponents& c, const PhasePartition& partition) {
  c.seasonal_by_phase.assign(partition.phase_sets.size(), {});
  for (std::size_t phi = 0; phi < partition.phase_sets.size(); ++phi) {
    for (auto k : partition.phase_sets[phi]) c.seasonal_by_phase[phi].push_back(c.seasonal[k]);
  }
}

// Minimises sum w (r - T - S)^2 + lt T'K_T T + ls sum_phi S_phi'K_phi S_phi
// subject to sum w S = 0 and sum w (t - tbar) S = 0, via the KKT system.
// Returns false if the factorization fails.
bool joint_solve(TemporalComponents& c, const PhasePartition& partition,
                 std::span<const double> residual, std::span<const double> times,
                 double lambda_t, double lambda_s) {
  using Triplet = Eigen::Triplet<double>;
  const std::size_t n = times.size();
  double sw = 0.0;
  double t_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += c.weights[k];
    t_mean += c.weights[k] * times[k];
  }
  t_mean /= sw;
  double t_spread = 0.0;
  for (std::size_t k = 0; k < n; ++k) t_spread = std::max(t_spread, std::abs(times[k] - t_mean));
  const std::size_t constraints = t_spread > 0.0 ? 2 : 1;
  const std::size_t m = 2 * n + constraints;

  std::vector<Triplet> triplets;
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), 0);
  append_penalty_triplets(times, index, lambda_t, triplets);
  for (const auto& set : partition.phase_sets) {
    if (set.size() < 3) continue;
    std::vector<double> pt;
    std::vector<std::size_t> pi;
    for (auto k : set) {
      pt.push_back(times[k]);
      pi.push_back(n + k);
    }
    append_penalty_triplets(pt, pi, lambda_s, triplets);
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  const int c0 = static_cast<int>(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const int ti = static_cast<int>(k);
    const int si = static_cast<int>(n + k);
    const double w = c.weights[k];
    triplets.emplace_back(ti, ti, w);
    triplets.emplace_back(si, si, w);
    triplets.emplace_back(ti, si, w);
    triplets.emplace_back(si, ti, w);
    triplets.emplace_back(c0, si, w);
    triplets.emplace_back(si, c0, w);
    if (constraints == 2) {
      const double v = w * (times[k] - t_mean) / t_spread;
      triplets.emplace_back(c0 + 1, si, v);
      triplets.emplace_back(si, c0 + 1, v);
    }
    rhs[ti] = w * residual[k];
    rhs[si] = w * residual[k];
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  for (std::size_t k = 0; k < n; ++k) {
    c.trend[k] = sol[static_cast<Eigen::Index>(k)];
    c.seasonal[k] = sol[static_cast<Eigen::Index>(n + k)];
  }
  return true;
}

}  // namespace

std::vector<double> phase_times(const TemporalComponents& components,
                                const PhasePartition& partition, std::size_t phi) {
  std::vector<double> out;
  out.reserve(partition.phase_sets[phi].size());
  for (auto k : partition.phase_sets[phi]) out.push_back(static_cast<double>(components.times[k]));
  return out;
}

void recenter_seasonal(TemporalComponents& c, const PhasePartition& partition) {
  const std::size_t n = c.times.size();
  double sw = 0.0;
  double t_mean = 0.0;
  double s_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += c.weights[k];
    t_mean += c.weights[k] * static_cast<double>(c.times[k]);
    s_mean += c.weights[k] * c.seasonal[k];
  }
  t_mean /= sw;
  s_mean /= sw;
  double stt = 0.0;
  double sts = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = static_cast<double>(c.times[k]) - t_mean;
    stt += c.weights[k] * dt * dt;
    sts += c.weights[k] * dt * c.seasonal[k];
  }
  const double slope = stt > 0.0 ? sts / stt : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double shift = s_mean + slope * (static_cast<double>(c.times[k]) - t_mean);
    c.seasonal[k] -= shift;
    c.trend[k] += shift;
  }
  split_seasonal(c, partition);
}

TemporalComponents decompose(const CompressedSeries& series, const PhasePartition& partition,
                             std::span<const double> residual, const DecomposeConfig& config,
                             const TemporalComponents* warm_start) {
  const std::size_t n = series.size();
  if (residual.size() != n) throw DataError("decompose: residual not aligned with series");
  if (partition.phase_of_point.size() != n) throw DataError("decompose: partition mismatch");
  const bool any_phase = std::any_of(partition.phase_sets.begin(), partition.phase_sets.end(),
                                     [](const auto& s) { return !s.empty(); });
  if (!any_phase) throw DataError("decompose: all phase sets are empty");
  if (config.max_iterations < 1) throw ConfigError("decompose: max_iterations must be >= 1");

  TemporalComponents c;
  c.times = series.times;
  c.weights.assign(series.weights.begin(), series.weights.end());
  if (warm_start != nullptr && warm_start->trend.size() == n) {
    c.trend = warm_start->trend;
    c.seasonal = warm_start->seasonal;
  } else {
    c.trend.assign(n, 0.0);
    c.seasonal.assign(n, 0.0);
  }

  const bool kernel = config.backend == SmootherKind::FastKernel;
  const auto times = as_doubles(series.times);
  const double total_weight = std::accumulate(c.weights.begin(), c.weights.end(), 0.0);

  // Per-phase knots, weights and smoothing parameters do not change across
  // iterations.
  struct PhaseData {
    std::vector<double> t;
    std::vector<double> w;
    double parameter = 0.0;
  };
  std::vector<PhaseData> phases(partition.phase_sets.size());
  for (std::size_t phi = 0; phi < phases.size(); ++phi) {
    auto& pd = phases[phi];
    for (auto k : partition.phase_sets[phi]) {
      pd.t.push_back(times[k]);
      pd.w.push_back(c.weights[k]);
    }
    const double phase_weight = std::accumulate(pd.w.begin(), pd.w.end(), 0.0);
    pd.parameter = kernel ? default_bandwidth(pd.t, config.seasonal_parameter,
                                              static_cast<std::size_t>(phase_weight))
                          : config.seasonal_parameter;
  }
  const double trend_parameter =
      kernel ? default_bandwidth(times, config.trend_parameter,
                                 static_cast<std::size_t>(total_weight))
             : config.trend_parameter;

  if (!kernel && config.exact && config.trend_parameter > 0.0 && config.seasonal_parameter > 0.0 &&
      joint_solve(c, partition, residual, times, config.trend_parameter,
                  config.seasonal_parameter)) {
    recenter_seasonal(c, partition);
    c.iterations = 1;
    c.converged = true;
    return c;
  }

  const double threshold = config.tolerance * weighted_sd(residual, c.weights);
  std::vector<double> target(n);
  std::vector<double> phase_target;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto old_trend = c.trend;
    const auto old_seasonal = c.seasonal;

    for (std::size_t k = 0; k < n; ++k) target[k] = residual[k] - c.seasonal[k];
    SmoothRequest trend_req{times, target, c.weights};
    trend_req.bandwidth = trend_parameter;
    trend_req.lambda = trend_parameter;
    c.trend = smooth(config.backend, trend_req);

    for (std::size_t phi = 0; phi < phases.size(); ++phi) {
      const auto& set = partition.phase_sets[phi];
      if (set.empty()) continue;
      phase_target.resize(set.size());
      for (std::size_t a = 0; a < set.size(); ++a) phase_target[a] = residual[set[a]] - c.trend[set[a]];
      SmoothRequest req{phases[phi].t, phase_target, phases[phi].w};
      req.bandwidth = phases[phi].parameter;
      req.lambda = phases[phi].parameter;
      const auto fitted = smooth(config.backend, req);
      for (std::size_t a = 0; a < set.size(); ++a) c.seasonal[set[a]] = fitted[a];
    }
    recenter_seasonal(c, partition);

    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      change = std::max(change, std::abs(c.trend[k] - old_trend[k]));
      change = std::max(change, std::abs(c.seasonal[k] - old_seasonal[k]));
    }
    c.iterations = it;
    if (change <= threshold) {
      c.converged = true;
      break;
    }
  }
  split_seasonal(c, partition);
  return c;
}

std::pair<double, double> evaluate_temporal(const TemporalComponents& components,
                                            const PhasePartition& partition, std::int64_t t) {
  if (t % partition.tau != 0) {
    throw DataError("time " + std::to_string(t) + " is not a multiple of tau=" +
                    std::to_string(partition.tau));
  }
  if (components.times.empty()) return {0.0, 0.0};
  const auto times = as_doubles(components.times);
  const double x = static_cast<double>(t);
  const double trend = interpolate_clamped(times, components.trend, x);

  const auto phi = static_cast<std::size_t>(phase_of(t, partition.tau, partition.period));
  if (phi >= partition.phase_sets.size() || partition.phase_sets[phi].empty()) return {trend, 0.0};
  const auto pt = phase_times(components, partition, phi);
  return {trend, interpolate_clamped(pt, components.seasonal_by_phase[phi], x)};
}

double temporal_trend_penalty(const TemporalComponents& components) {
  const auto times = as_doubles(components.times);
  return roughness_penalty(times, components.trend);
}

double temporal_seasonal_penalty(const TemporalComponents& components,
                                 const PhasePartition& partition) {
  double total = 0.0;
  for (std::size_t phi = 0; phi < partition.phase_sets.size(); ++phi) {
    if (partition.phase_sets[phi].size() < 3) continue;
    const auto pt = phase_times(components, partition, phi);
    total += roughness_penalty(pt, components.seasonal_by_phase[phi]);
  }
  return total;
}

}  // namespace fxam
