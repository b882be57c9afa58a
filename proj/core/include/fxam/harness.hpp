#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fxam/dataset.hpp"
#include "fxam/synthgen.hpp"
#include "fxam/trainer.hpp"

namespace fxam {

enum class ColumnKind { Numerical, Categorical, Temporal, Response, Ignore };

struct SchemaColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  std::int64_t tau = 1;     // temporal only
  std::int64_t period = 0;  // temporal only, must be > 1
};

/// Column roles for a CSV file. Stored as JSON:
/// {"columns": [{"name": "t", "kind": "temporal", "tau": 1, "period": 7}, ...]}
struct SchemaFile {
  std::vector<SchemaColumn> columns;

  /// Exactly one response (unless allow_missing_response), at least one
  /// feature, temporal periods > 1 and tau > 0, unique names.
  void validate(bool allow_missing_response = false) const;
  /// Per temporal column, in schema order.
  std::vector<TemporalSettings> temporal_settings() const;

  static SchemaFile from_json(const std::string& text);
  static SchemaFile load(const std::string& path);
  std::string to_json() const;
  void save(const std::string& path) const;
};

ColumnKind parse_column_kind(const std::string& text);
const char* column_kind_name(ColumnKind kind);

/// Schema describing a synthetic dataset (period fixed by the generator).
SchemaFile synthetic_schema(const Dataset& dataset);

/// Reads a comma-separated file with a header row. Columns not in the
/// schema are an error; schema columns absent from the header are an error
/// except the response when allow_missing_response is set.
Dataset ingest_csv(const std::string& path, const SchemaFile& schema,
                   bool allow_missing_response = false);
Dataset parse_csv(const std::string& text, const SchemaFile& schema,
                  bool allow_missing_response = false);

/// Writes the dataset back as CSV (response last).
std::string dataset_csv(const Dataset& dataset);
/// Ground-truth sidecar: one column per contribution, plus noise.
std::string ground_truth_csv(const GroundTruth& truth);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Shuffled partition of 0..N-1 into k folds; the first N % k folds get one
/// extra record.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

double rmse(const std::vector<double>& pred, const std::vector<double>& actual);

struct Ablation {
  bool no_sampling = false;
  bool no_dfi = false;
  /// Treat temporal columns as numerical features.
  bool no_tas = false;
};

/// Applies ablation toggles, returning the dataset and config to train on.
std::pair<Dataset, TrainConfig> apply_ablation(const Dataset& dataset, const TrainConfig& config,
                                               const Ablation& ablation);

struct ExperimentConfig {
  TrainConfig train;
  Ablation ablation;
  std::size_t folds = 5;
  std::uint64_t seed = 7;
  /// Concurrent folds; 0 reads FXAM_THREADS (default 1).
  std::size_t threads = 0;
};

struct FoldResult {
  std::size_t fold = 0;
  double rmse = 0.0;
  double train_seconds = 0.0;
  int cycles = 0;
  bool converged = false;
  std::size_t sample_size = 0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_rmse = 0.0;
  double mean_train_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON
};

/// Cross-validated training and scoring. Timing covers training only.
EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& config);

/// Runs several variants on identical folds, sequentially and interleaved
/// fold by fold, so slow drift in machine load hits every variant alike.
/// All configs must share folds and seed.
std::vector<EvalReport> run_paired_experiments(const Dataset& dataset,
                                               std::span<const ExperimentConfig> configs);

/// fold,rmse,train_seconds
std::string report_csv(const EvalReport& report);
std::string report_summary(const EvalReport& report);

/// Thread cap from FXAM_THREADS; 1 when unset or invalid.
std::size_t env_thread_cap();

/// Overlays keys present in the JSON object onto `base`. Unknown keys are a
/// ConfigError.
TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});
std::string train_config_to_json(const TrainConfig& config);

/// Like train_config_from_json, additionally accepting folds, cv_seed,
/// threads, no_sampling, no_dfi and no_tas.
ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig base = {});

SmootherKind parse_backend(const std::string& text);
const char* backend_name(SmootherKind kind);
Difficulty parse_difficulty(const std::string& text);

}  // namespace fxam
