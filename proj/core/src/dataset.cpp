#include "fxam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "fxam/error.hpp"

namespace fxam {

void Dataset::validate() const {
  const std::size_t n = response.size();
  if (n == 0) throw DataError("dataset is empty");

  std::unordered_set<std::string> names;
  auto claim = [&](const std::string& name) {
    if (!names.insert(name).second) throw DataError("duplicate column name '" + name + "'");
  };
  claim(response_name);

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(response[i])) {
      throw DataError("non-finite response at row " + std::to_string(i));
    }
  }
  for (const auto& col : numerical) {
    claim(col.name);
    if (col.values.size() != n) throw DataError("column '" + col.name + "' has wrong length");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(col.values[i])) {
        throw DataError("non-finite value in column '" + col.name + "' at row " +
                        std::to_string(i));
      }
    }
  }
  for (const auto& col : categorical) {
    claim(col.name);
    if (col.values.size() != n) throw DataError("column '" + col.name + "' has wrong length");
  }
  for (const auto& col : temporal) {
    claim(col.name);
    if (col.values.size() != n) throw DataError("column '" + col.name + "' has wrong length");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.response_name = response_name;
  out.response.reserve(rows.size());
  for (auto r : rows) out.response.push_back(response.at(r));

  auto pick = [&](const auto& src, auto& dst) {
    dst.reserve(rows.size());
    for (auto r : rows) dst.push_back(src.at(r));
  };
  for (const auto& col : numerical) {
    auto& c = out.numerical.emplace_back();
    c.name = col.name;
    pick(col.values, c.values);
  }
  for (const auto& col : categorical) {
    auto& c = out.categorical.emplace_back();
    c.name = col.name;
    pick(col.values, c.values);
  }
  for (const auto& col : temporal) {
    auto& c = out.temporal.emplace_back();
    c.name = col.name;
    pick(col.values, c.values);
  }
  return out;
}

std::string categorical_label(const std::string& feature, const std::string& value) {
  return feature + "=" + value;
}

CategoricalEncoding build_homogeneous_encoding(const Dataset& dataset) {
  CategoricalEncoding enc;
  const std::size_t n = dataset.size();
  const std::size_t q = dataset.categorical.size();
  enc.num_features = q;
  enc.num_rows = n;
  enc.row_indices.resize(n * q);
  enc.feature_offsets.push_back(0);

  for (std::size_t m = 0; m < q; ++m) {
    const auto& col = dataset.categorical[m];
    // Values of one feature get consecutive indices in first-appearance order.
    std::unordered_map<std::string, std::uint32_t> local;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = local.find(col.values[i]);
      if (it == local.end()) {
        auto idx = static_cast<std::uint32_t>(enc.labels.size());
        it = local.emplace(col.values[i], idx).first;
        enc.labels.push_back(categorical_label(col.name, col.values[i]));
        enc.index_of.emplace(enc.labels.back(), idx);
      }
      enc.row_indices[i * q + m] = it->second;
    }
    enc.feature_offsets.push_back(enc.labels.size());
  }
  return enc;
}

CompressedSeries compress_time_points(std::span<const std::int64_t> times,
                                      std::span<const double> values) {
  if (times.empty()) throw DataError("empty series");
  if (times.size() != values.size()) throw DataError("times and values differ in length");

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  CompressedSeries out;
  out.back_map.resize(times.size());
  std::vector<double> sums;
  for (auto r : order) {
    if (out.times.empty() || out.times.back() != times[r]) {
      out.times.push_back(times[r]);
      out.weights.push_back(0);
      sums.push_back(0.0);
    }
    out.weights.back() += 1;
    sums.back() += values[r];
    out.back_map[r] = out.times.size() - 1;
  }
  out.values.resize(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    out.values[k] = sums[k] / static_cast<double>(out.weights[k]);
  }
  return out;
}

std::vector<double> aggregate_to_points(const CompressedSeries& series,
                                        std::span<const double> record_values) {
  if (record_values.size() != series.back_map.size()) {
    throw DataError("record vector does not match series length");
  }
  std::vector<double> out(series.size(), 0.0);
  for (std::size_t r = 0; r < record_values.size(); ++r) out[series.back_map[r]] += record_values[r];
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= static_cast<double>(series.weights[k]);
  return out;
}

std::vector<double> expand_to_records(const CompressedSeries& series,
                                      std::span<const double> point_values) {
  std::vector<double> out(series.back_map.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = point_values[series.back_map[r]];
  return out;
}

std::int64_t phase_of(std::int64_t t, std::int64_t tau, std::int64_t period) {
  const std::int64_t step = t / tau;
  const std::int64_t phi = step % period;
  return phi < 0 ? phi + period : phi;
}

PhasePartition partition_phases(const CompressedSeries& series, std::int64_t tau,
                                std::int64_t period) {
  if (period <= 1) throw ConfigError("seasonal period must be > 1");
  if (tau <= 0) throw ConfigError("time unit tau must be > 0");

  PhasePartition out;
  out.period = period;
  out.tau = tau;
  out.phase_sets.resize(static_cast<std::size_t>(period));
  out.phase_of_point.resize(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto t = series.times[k];
    if (t % tau != 0) {
      throw DataError("time " + std::to_string(t) + " is not a multiple of tau=" +
                      std::to_string(tau));
    }
    const auto phi = static_cast<std::size_t>(phase_of(t, tau, period));
    out.phase_sets[phi].push_back(k);
    out.phase_of_point[k] = phi;
  }
  return out;
}

KnotGrid build_knot_grid(std::span<const double> x) {
  if (x.empty()) throw DataError("empty feature");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  KnotGrid grid;
  grid.back_map.resize(x.size());
  for (auto r : order) {
    if (grid.knots.empty() || grid.knots.back() != x[r]) {
      grid.knots.push_back(x[r]);
      grid.weights.push_back(0.0);
    }
    grid.weights.back() += 1.0;
    grid.back_map[r] = grid.knots.size() - 1;
  }
  return grid;
}

std::vector<double> aggregate_to_knots(const KnotGrid& grid,
                                       std::span<const double> record_values) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t r = 0; r < record_values.size(); ++r) out[grid.back_map[r]] += record_values[r];
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= grid.weights[k];
  return out;
}

std::vector<double> expand_from_knots(const KnotGrid& grid,
                                      std::span<const double> knot_values) {
  std::vector<double> out(grid.back_map.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = knot_values[grid.back_map[r]];
  return out;
}

}  // namespace fxam
