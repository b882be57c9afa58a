#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fxam/dataset.hpp"
#include "fxam/smoothers.hpp"

namespace fxam {

struct DecomposeConfig {
  SmootherKind backend = SmootherKind::Penalized;
  /// Penalized backend: lambda_T / lambda_S. Kernel backend: bandwidth
  /// factors for the rule-of-thumb bandwidth on all points / on each phase.
  double trend_parameter = 1.0;
  double seasonal_parameter = 1.0;
  /// Stop when the largest component change < tolerance * sd(residual).
  double tolerance = 1e-6;
  int max_iterations = 50;
  /// Penalized backend with positive penalties: solve the joint
  /// trend/seasonal problem in one sparse factorization, which is the limit
  /// the alternation converges to. The alternation itself is slow along
  /// smooth curves that can move between trend and seasonal at little cost.
  bool exact = true;
};

/// Trend over all compressed points and one seasonal curve per phase set.
struct TemporalComponents {
  std::vector<std::int64_t> times;
  std::vector<double> weights;
  std::vector<double> trend;
  std::vector<std::vector<double>> seasonal_by_phase;
  /// Seasonal values at every compressed point (merged over phases).
  std::vector<double> seasonal;
  int iterations = 0;
  bool converged = false;
};

/// Partial learning on one temporal feature: alternate trend smoothing
/// over all points with cycle-subseries smoothing inside each phase set
/// until the components stop changing. The seasonal part is kept
/// orthogonal (in the weighted inner product) to constants and to a
/// linear function of time; both are folded into the trend.
TemporalComponents decompose(const CompressedSeries& series, const PhasePartition& partition,
                             std::span<const double> residual, const DecomposeConfig& config,
                             const TemporalComponents* warm_start = nullptr);

/// Moves the weighted mean and linear-in-time part of the seasonal
/// component into the trend. f_T + f_S is unchanged pointwise.
void recenter_seasonal(TemporalComponents& components, const PhasePartition& partition);

/// Trend and seasonal value at time t: linear interpolation on the observed
/// points (the seasonal curve is interpolated within t's own phase),
/// clamped outside the observed range.
std::pair<double, double> evaluate_temporal(const TemporalComponents& components,
                                            const PhasePartition& partition, std::int64_t t);

/// Unscaled roughness terms f_T'K_T f_T and sum_phi f_phi'K_phi f_phi.
double temporal_trend_penalty(const TemporalComponents& components);
double temporal_seasonal_penalty(const TemporalComponents& components,
                                 const PhasePartition& partition);

/// Times of phase phi in increasing order as doubles.
std::vector<double> phase_times(const TemporalComponents& components,
                                const PhasePartition& partition, std::size_t phi);

}  // namespace fxam
