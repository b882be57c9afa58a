#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fxam/dataset.hpp"

namespace fxam {

enum class Difficulty { Easy, Hard };

struct SynthConfig {
  std::size_t n_records = 10000;
  std::size_t n_features = 20;
  /// Per categorical feature, cardinality ~ U{2..max_cardinality}.
  std::size_t max_cardinality = 10;
  double numerical_ratio = 0.8;
  bool has_temporal = false;
  /// Seasonal fraction of variance explained, in [0, 0.1].
  double seasonality_ratio = 0.0;
  Difficulty difficulty = Difficulty::Easy;
  std::uint64_t seed = 1;
  /// Hard mode aggregate interaction FVE target.
  double interaction_fve = 0.65;

  std::size_t numerical_count() const;
  std::size_t categorical_count() const;
  /// Throws ConfigError on inconsistent factors.
  void validate() const;
};

/// Univariate f, g, h and the two-feature interactions I1, I2.
enum class FunctionType { Linear, Quadratic, Sine, Product, Cosine };

const char* function_name(FunctionType type);

struct FunctionItem {
  FunctionType type = FunctionType::Linear;
  /// One feature for univariate items, two for interactions.
  std::vector<std::size_t> features;
  std::vector<double> coefficients;
};

/// Draw from 0.3:0.3:0.4 (easy) or 0.1:0.1:0.2:0.2:0.4 (hard).
template <typename Rng>
FunctionType draw_function_type(Difficulty difficulty, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (difficulty == Difficulty::Easy) {
    if (r < 0.3) return FunctionType::Linear;
    if (r < 0.6) return FunctionType::Quadratic;
    return FunctionType::Sine;
  }
  if (r < 0.1) return FunctionType::Linear;
  if (r < 0.2) return FunctionType::Quadratic;
  if (r < 0.4) return FunctionType::Sine;
  if (r < 0.6) return FunctionType::Product;
  return FunctionType::Cosine;
}

struct GroundTruth {
  std::vector<FunctionItem> items;
  /// Univariate contribution per numerical feature (zero for features
  /// consumed by an interaction).
  std::vector<std::vector<double>> numerical;
  /// Per interaction item, in item order.
  std::vector<std::vector<double>> interactions;
  /// Per categorical feature, the weight of each row's value.
  std::vector<std::vector<double>> categorical;
  std::vector<double> seasonal;  // empty without a temporal feature
  std::vector<double> noise;
  double seasonal_amplitude = 0.0;  // V1
  double seasonal_phase = 0.0;      // V2
  double noise_ratio = 0.0;         // achieved Var(eps) / TSS
  double interaction_fve = 0.0;
  double seasonality_fve = 0.0;

  /// Sum of all contributions plus noise, in the order used by generate.
  std::vector<double> reconstruct() const;
};

struct SynthResult {
  Dataset dataset;
  GroundTruth truth;
};

inline constexpr std::int64_t kSyntheticPeriod = 10;

/// Columns are named x0.., z0.. and t; categorical values v0...
SynthResult generate(const SynthConfig& config);

/// Named experiment sweeps: varyRecords, varyFeatures,
/// varyNumRatio, varySeasonality, ablation1, ablation2. Record counts are
/// multiplied by record_scale (at least 100 records are kept).
std::vector<SynthConfig> appendix_config(const std::string& name, double record_scale = 1.0,
                                         Difficulty difficulty = Difficulty::Hard);

/// Variance with divisor N.
double population_variance(const std::vector<double>& v);

}  // namespace fxam
