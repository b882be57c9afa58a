#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fxam/categorical_solver.hpp"
#include "fxam/dataset.hpp"
#include "fxam/model.hpp"
#include "fxam/smoothers.hpp"
#include "fxam/temporal.hpp"

namespace fxam {

struct TemporalSettings {
  std::int64_t tau = 1;
  std::int64_t period = 2;
};

struct SamplingConfig {
  bool enabled = true;
  double gamma = 1.0;
  std::size_t pilot_size = 10000;
  /// Sampling-based initialisation only runs when N exceeds this.
  std::size_t activation_threshold = 100000;
};

struct TrainConfig {
  SmootherKind backend = SmootherKind::FastKernel;

  // Roughness penalties (penalized backend) and ridge penalty.
  double lambda = 1.0;
  double lambda_z = 1.0;
  double lambda_t = 1.0;
  double lambda_s = 1.0;

  // Kernel backend: h = factor * range * N^(-1/5).
  double bandwidth_factor = 0.5;
  double trend_bandwidth_factor = 0.5;
  double seasonal_bandwidth_factor = 0.5;

  /// One entry per temporal column, in column order.
  std::vector<TemporalSettings> temporal;

  /// Stage 1 pass tolerance, relative to sd(y).
  double stage_tolerance = 1e-4;
  int stage1_max_passes = 100;
  /// Relative objective decrease over a full cycle.
  double outer_tolerance = 1e-6;
  int max_cycles = 50;
  /// Inner seasonal-trend iteration, relative to sd(residual).
  double temporal_tolerance = 1e-6;
  int temporal_max_iterations = 50;
  double nga_tolerance = 1e-8;
  int nga_max_iterations = 0;

  SamplingConfig sampling;
  bool dynamic_feature_iteration = true;
  std::uint64_t seed = 42;

  void validate(const Dataset& dataset) const;
};

/// Mutable fitting state. All component vectors live in record space
/// (length N); shape values are additionally kept per knot.
struct TrainState {
  double intercept = 0.0;
  std::vector<std::vector<double>> shape_values;  // per feature, per knot
  std::vector<std::vector<double>> numerical;     // per feature, per record
  Eigen::VectorXd beta;
  std::vector<double> categorical;                // f_Z = Z beta
  std::vector<TemporalComponents> temporal;       // per temporal feature, per point
  std::vector<std::vector<double>> trend;         // per temporal feature, per record
  std::vector<std::vector<double>> seasonal;      // per temporal feature, per record
  /// y - intercept - sum of all components.
  std::vector<double> residual;
  int cycle = 0;
  std::vector<double> objective_history;
  int stage1_passes = 0;
};

struct PilotEstimate {
  double sigma2 = 0.0;       // mean squared pilot residual
  double sup_f2 = 0.0;       // max squared pilot curve value
  double max_slope = 0.0;    // max |df/dx| between consecutive knots
};

/// Pilot smooth of y on x over a uniform subsample of min(n0, N) records.
PilotEstimate pilot_estimates(std::span<const double> x, std::span<const double> y, std::size_t n0,
                              std::uint64_t seed, SmootherKind backend = SmootherKind::FastKernel,
                              double parameter = 0.5);

/// n* = ceil(max_i gamma (sigma_i^2 + sup F_i^2) U_i), floored at n0.
std::size_t estimate_sample_size(std::span<const PilotEstimate> pilots, double gamma,
                                 std::size_t n0);

/// 2 TSS r^2 / (N - 2) - (2 U B h)^2, with r the Pearson correlation of x
/// and the partial residual (0 when either has zero variance).
double predictive_power(std::span<const double> x, std::span<const double> residual,
                        double max_slope, double support, double bandwidth);

/// Stable descending order.
std::vector<std::size_t> order_features(std::span<const double> powers);

/// max |f[k+1] - f[k]| / (x[k+1] - x[k]) over consecutive knots.
double max_abs_slope(std::span<const double> knots, std::span<const double> values);

struct ObjectiveValue {
  double value = 0.0;
  double rss = 0.0;
  /// Kernel backend: value == rss, penalties undefined.
  bool rss_only = false;
};

struct BlockResidual {
  std::string block;
  double value = 0.0;
};

/// Precomputed structures (knot grids, encoding, Gram matrix, time grids)
/// for one dataset and configuration, plus the three TSI stages.
class Trainer {
 public:
  Trainer(const Dataset& dataset, TrainConfig config);

  const Dataset& dataset() const { return dataset_; }
  const TrainConfig& config() const { return config_; }
  const CategoricalEncoding& encoding() const { return encoding_; }
  const KnotGrid& knot_grid(std::size_t feature) const { return grids_[feature]; }
  const CompressedSeries& time_grid(std::size_t k) const { return series_[k]; }
  const PhasePartition& partition(std::size_t k) const { return partitions_[k]; }
  double bandwidth(std::size_t feature) const { return bandwidths_[feature]; }
  double response_sd() const { return y_sd_; }

  /// intercept = mean(y), every component zero.
  TrainState initial_state() const;

  /// Backfitting passes over numerical features until the largest change
  /// in a pass falls below stage_tolerance * sd(y). Each f_i is centred
  /// to mean zero with the mean folded into the intercept.
  void stage1_backfit(TrainState& state) const;

  /// Joint ridge solve for all categorical weights together with the
  /// intercept (profiled out, so it ends at the mean residual).
  void stage2_categorical(TrainState& state) const;

  /// Seasonal-trend partial learning for each temporal feature in turn.
  void stage3_temporal(TrainState& state) const;

  /// Initialise shape functions by backfitting on a subsample of size n*.
  /// Returns the sample size used (0 if sampling did not activate).
  std::size_t sampling_initialize(TrainState& state) const;

  ObjectiveValue objective_value(const TrainState& state) const;

  /// Per block: || f_j - M_j (y - sum_{i != j} f_i) ||_inf with explicit
  /// dense smoother matrices (intercept included as a block).
  std::vector<BlockResidual> normal_equation_residuals(const TrainState& state,
                                                       std::size_t bound = kDefaultDenseBound) const;

  /// Rebuilds a consistent TrainState from record-space components.
  TrainState state_from_components(double intercept,
                                   const std::vector<std::vector<double>>& numerical,
                                   const Eigen::VectorXd& beta,
                                   const std::vector<std::vector<double>>& trend,
                                   const std::vector<std::vector<double>>& seasonal) const;

  FxamModel to_model(const TrainState& state, TrainingDiagnostics diagnostics) const;

  /// Record-space dense smoother matrices of every block, in the order
  /// intercept, numerical..., categorical (if any), then trend and seasonal
  /// per temporal feature.
  struct DenseBlock {
    std::string name;
    Eigen::MatrixXd smoother;
  };
  std::vector<DenseBlock> dense_blocks(std::size_t bound = kDefaultDenseBound) const;

 private:
  std::vector<double> smooth_feature(std::size_t feature, std::span<const double> target) const;
  DecomposeConfig decompose_config() const;
  std::vector<double> partial_residual_with(const TrainState& state,
                                            std::span<const double> component) const;

  Dataset dataset_;
  TrainConfig config_;
  double y_mean_ = 0.0;
  double y_sd_ = 0.0;
  std::vector<KnotGrid> grids_;
  std::vector<double> bandwidths_;
  std::vector<double> x_mean_;  // per numerical feature
  std::vector<double> x_ss_;    // sum of squared deviations of x
  CategoricalEncoding encoding_;
  std::unique_ptr<RidgeSystem> ridge_;
  double ridge_step_ = 0.0;  // 1 / largest Gram eigenvalue
  std::vector<CompressedSeries> series_;
  std::vector<PhasePartition> partitions_;
};

struct TrainResult {
  FxamModel model;
  TrainState state;
};

/// Three-stage iteration: initialise (optionally from a subsample), then
/// cycle Stage 1 -> Stage 2 -> Stage 3 until the objective's relative
/// decrease over a cycle drops below outer_tolerance. The objective is
/// recorded after initialisation and after every stage.
TrainResult tsi_train_full(const Dataset& dataset, const TrainConfig& config);

FxamModel tsi_train(const Dataset& dataset, const TrainConfig& config);

inline constexpr std::size_t kDirectSolveBound = 5000;

/// Solves the stacked block normal equations densely, with the
/// identifiability constraints used by TSI appended as extra rows
/// (mean-zero shapes and trend, seasonal orthogonal to 1 and t).
/// Penalized backend only.
TrainState normal_equation_direct_solve(const Trainer& trainer,
                                        std::size_t bound = kDirectSolveBound);

}  // namespace fxam
