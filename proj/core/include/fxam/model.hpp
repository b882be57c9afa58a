#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fxam/dataset.hpp"
#include "fxam/error.hpp"

namespace fxam {

/// Deployable shape function: piecewise linear through (knot, value)
/// pairs, clamped outside the knot range.
struct ShapeCurve {
  std::vector<double> knots;
  std::vector<double> values;

  void validate() const;
};

double evaluate_shape(const ShapeCurve& curve, double x);

struct TemporalCurves {
  std::string name;
  std::int64_t tau = 1;
  std::int64_t period = 2;
  /// Trend over the observed (compressed) time points.
  ShapeCurve trend;
  /// One curve per phase; a phase without observations has empty knots and
  /// contributes zero.
  std::vector<ShapeCurve> seasonal;
};

/// Seasonal and trend value at time t, using the same interpolation rules
/// as evaluate_temporal.
std::pair<double, double> evaluate_temporal_curves(const TemporalCurves& curves, std::int64_t t);

struct StageTiming {
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  double stage3_seconds = 0.0;
  double init_seconds = 0.0;
};

struct TrainingDiagnostics {
  int cycles = 0;
  bool converged = false;
  /// True when the objective history holds residual sums of squares only
  /// (kernel backend, where the roughness penalty is not defined).
  bool objective_is_rss = false;
  std::vector<double> objective_history;
  StageTiming timing;
  std::size_t sample_size = 0;  // 0 when sampling was not used
};

struct ModelSchema {
  std::string response;
  std::vector<std::string> numerical;
  std::vector<std::string> categorical;
  std::vector<std::string> temporal;
};

/// One record for prediction, keyed by column name.
struct Record {
  std::unordered_map<std::string, double> numerical;
  std::unordered_map<std::string, std::string> categorical;
  std::unordered_map<std::string, std::int64_t> temporal;
};

class FxamModel {
 public:
  static constexpr int kFormatVersion = 1;

  ModelSchema schema;
  double intercept = 0.0;
  std::vector<ShapeCurve> shapes;  // aligned with schema.numerical
  /// Categorical weights keyed by "feature=value" label.
  std::map<std::string, double> betas;
  std::vector<TemporalCurves> temporals;  // aligned with schema.temporal
  TrainingDiagnostics diagnostics;

  /// Unseen categorical values contribute 0.
  double predict(const Record& record) const;
  /// Batch prediction by column name; the dataset may omit the response.
  std::vector<double> predict(const Dataset& dataset) const;

  /// Weight of a categorical label, 0 when unseen.
  double beta(const std::string& label) const;

  void validate() const;
};

std::string serialize(const FxamModel& model);
FxamModel deserialize(const std::string& text);

void save_model(const FxamModel& model, const std::string& path);
FxamModel load_model(const std::string& path);

/// Per-record additive parts of a prediction. Columns are named after the
/// feature; temporal features contribute "<name>:trend" and "<name>:seasonal".
/// intercept + the column sums equals predict().
struct RecordDecomposition {
  double intercept = 0.0;
  std::size_t rows = 0;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
};

RecordDecomposition decompose_records(const FxamModel& model, const Dataset& dataset);

struct ContributionRow {
  std::string component;  // numerical | categorical | trend | seasonal
  std::string feature;
  int phase = -1;         // seasonal rows only
  std::string key;        // knot / label / time
  double value = 0.0;
};

std::vector<ContributionRow> export_contributions(const FxamModel& model);

/// CSV with header component,feature,phase,key,value.
std::string contributions_csv(const std::vector<ContributionRow>& rows);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace fxam
