#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fxam {

struct NumericalColumn {
  std::string name;
  std::vector<double> values;
};

struct CategoricalColumn {
  std::string name;
  std::vector<std::string> values;
};

/// Integer time stamps; the time unit tau and the seasonal period live in
/// TrainConfig, not here.
struct TemporalColumn {
  std::string name;
  std::vector<std::int64_t> values;
};

/// Column-typed table: numerical, categorical and temporal features plus a
/// real-valued response. All columns share the same length.
struct Dataset {
  std::string response_name = "y";
  std::vector<double> response;
  std::vector<NumericalColumn> numerical;
  std::vector<CategoricalColumn> categorical;
  std::vector<TemporalColumn> temporal;

  std::size_t size() const { return response.size(); }

  /// Throws DataError if lengths differ, N == 0, a numeric value is not
  /// finite, or two columns share a name.
  void validate() const;

  /// Row subset in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Homogeneous set of all categorical values, labelled "feature=value".
struct CategoricalEncoding {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index_of;
  /// labels[feature_offsets[m] .. feature_offsets[m+1]) belong to feature m.
  std::vector<std::size_t> feature_offsets;
  std::size_t num_features = 0;  // q
  std::size_t num_rows = 0;
  /// Row-major N x q active indices.
  std::vector<std::uint32_t> row_indices;

  std::size_t cardinality() const { return labels.size(); }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {row_indices.data() + i * num_features, num_features};
  }
};

std::string categorical_label(const std::string& feature, const std::string& value);

CategoricalEncoding build_homogeneous_encoding(const Dataset& dataset);

/// Sorted distinct time points with multiplicities and the per-record mapping.
struct CompressedSeries {
  std::vector<std::int64_t> times;
  std::vector<double> values;
  std::vector<std::int64_t> weights;
  std::vector<std::size_t> back_map;

  std::size_t size() const { return times.size(); }
};

CompressedSeries compress_time_points(std::span<const std::int64_t> times,
                                      std::span<const double> values);

/// Weighted mean of record-level values per compressed point.
std::vector<double> aggregate_to_points(const CompressedSeries& series,
                                        std::span<const double> record_values);

/// Expands per-point values back to records through back_map.
std::vector<double> expand_to_records(const CompressedSeries& series,
                                      std::span<const double> point_values);

struct PhasePartition {
  std::int64_t period = 0;
  std::int64_t tau = 1;
  /// phase_sets[phi] lists compressed point indices in time order.
  std::vector<std::vector<std::size_t>> phase_sets;
  std::vector<std::size_t> phase_of_point;
};

std::int64_t phase_of(std::int64_t t, std::int64_t tau, std::int64_t period);

PhasePartition partition_phases(const CompressedSeries& series, std::int64_t tau,
                                std::int64_t period);

/// Real-valued analogue of CompressedSeries used for numerical features:
/// ties in x are merged into a single weighted knot.
struct KnotGrid {
  std::vector<double> knots;
  std::vector<double> weights;
  std::vector<std::size_t> back_map;

  std::size_t size() const { return knots.size(); }
};

KnotGrid build_knot_grid(std::span<const double> x);

std::vector<double> aggregate_to_knots(const KnotGrid& grid,
                                       std::span<const double> record_values);

std::vector<double> expand_from_knots(const KnotGrid& grid,
                                      std::span<const double> knot_values);

}  // namespace fxam
