#include "fxam/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fxam/error.hpp"

namespace fxam {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool is_interaction(FunctionType t) {
  return t == FunctionType::Product || t == FunctionType::Cosine;
}

std::vector<double> draw_coefficients(FunctionType type, std::mt19937_64& rng) {
  switch (type) {
    case FunctionType::Linear:
      return {uniform(rng, -2, 2)};
    case FunctionType::Quadratic:
      return {uniform(rng, -1, 1), uniform(rng, -2, 2)};
    case FunctionType::Sine:
      return {uniform(rng, -2, 2), uniform(rng, 0, 6 * kPi), uniform(rng, -0.5, 0.5)};
    case FunctionType::Product:
      return {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2)};
    case FunctionType::Cosine:
      return {uniform(rng, -2, 2), uniform(rng, 0, 4 * kPi), uniform(rng, 0, 4 * kPi),
              uniform(rng, 0, 4 * kPi), uniform(rng, -0.5, 0.5)};
  }
  return {};
}

double evaluate_item(const FunctionItem& item, double x1, double x2) {
  const auto& c = item.coefficients;
  switch (item.type) {
    case FunctionType::Linear:
      return c[0] * x1;
    case FunctionType::Quadratic:
      return c[0] * x1 * x1 + c[1] * x1;
    case FunctionType::Sine:
      return c[0] * std::sin(c[1] * x1 + c[2]);
    case FunctionType::Product:
      return c[0] * x1 * x2 + c[1] * x1 + c[2] * x2;
    case FunctionType::Cosine:
      return c[0] * std::cos(c[1] * x1 * x2 + c[2] * x1 + c[3] * x2 + c[4]);
  }
  return 0.0;
}

double scale_for(double target_fve, double component_var, double total_var) {
  if (target_fve <= 0.0 || component_var <= 0.0) return 0.0;
  return std::sqrt(target_fve * total_var / component_var);
}

}  // namespace

std::size_t SynthConfig::numerical_count() const {
  return static_cast<std::size_t>(std::llround(numerical_ratio * static_cast<double>(n_features)));
}

std::size_t SynthConfig::categorical_count() const {
  const auto used = numerical_count() + (has_temporal ? 1 : 0);
  return used > n_features ? 0 : n_features - used;
}

void SynthConfig::validate() const {
  if (n_records < 2) throw ConfigError("synthetic data needs at least 2 records");
  if (n_features < 1) throw ConfigError("synthetic data needs at least one feature");
  if (!(numerical_ratio >= 0.0 && numerical_ratio <= 1.0)) {
    throw ConfigError("numerical ratio must lie in [0, 1]");
  }
  if (numerical_count() + (has_temporal ? 1 : 0) > n_features) {
    throw ConfigError("numerical ratio leaves a negative number of categorical features");
  }
  if (categorical_count() > 0 && max_cardinality < 2) {
    throw ConfigError("max cardinality must be >= 2");
  }
  if (!(seasonality_ratio >= 0.0 && seasonality_ratio <= 0.1)) {
    throw ConfigError("seasonality ratio must lie in [0, 0.1]");
  }
  if (seasonality_ratio > 0.0 && !has_temporal) {
    throw ConfigError("seasonality ratio needs a temporal feature");
  }
  if (!(interaction_fve > 0.0 && interaction_fve < 0.9)) {
    throw ConfigError("interaction FVE target must lie in (0, 0.9)");
  }
}

const char* function_name(FunctionType type) {
  switch (type) {
    case FunctionType::Linear:
      return "f";
    case FunctionType::Quadratic:
      return "g";
    case FunctionType::Sine:
      return "h";
    case FunctionType::Product:
      return "I1";
    case FunctionType::Cosine:
      return "I2";
  }
  return "?";
}

double population_variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

std::vector<double> GroundTruth::reconstruct() const {
  const std::size_t n = noise.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (const auto& f : numerical) s += f[r];
    for (const auto& f : interactions) s += f[r];
    for (const auto& f : categorical) s += f[r];
    if (!seasonal.empty()) s += seasonal[r];
    y[r] = s + noise[r];
  }
  return y;
}

SynthResult generate(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.n_records;
  const std::size_t p = config.numerical_count();
  const std::size_t q = config.categorical_count();
  std::mt19937_64 rng(config.seed);

  SynthResult out;
  auto& data = out.dataset;
  auto& truth = out.truth;
  data.response_name = "y";

  for (std::size_t j = 0; j < p; ++j) {
    auto& col = data.numerical.emplace_back();
    col.name = "x" + std::to_string(j);
    col.values.resize(n);
  }
  // Column-major draws keep each column independent of the others' lengths.
  for (auto& col : data.numerical) {
    for (auto& v : col.values) v = uniform(rng, 0.0, 10.0);
  }

  // Fill the numerical feature budget; an interaction needs two slots, so
  // with one slot left a univariate type is redrawn.
  std::size_t slot = 0;
  while (slot < p) {
    auto type = draw_function_type(config.difficulty, rng);
    while (is_interaction(type) && slot + 1 >= p) type = draw_function_type(config.difficulty, rng);
    FunctionItem item;
    item.type = type;
    item.features.push_back(slot++);
    if (is_interaction(type)) item.features.push_back(slot++);
    item.coefficients = draw_coefficients(type, rng);
    truth.items.push_back(std::move(item));
  }

  truth.numerical.assign(p, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> raw_interactions;
  for (const auto& item : truth.items) {
    const auto& x1 = data.numerical[item.features[0]].values;
    if (is_interaction(item.type)) {
      const auto& x2 = data.numerical[item.features[1]].values;
      auto& v = raw_interactions.emplace_back(n);
      for (std::size_t r = 0; r < n; ++r) v[r] = evaluate_item(item, x1[r], x2[r]);
    } else {
      auto& v = truth.numerical[item.features[0]];
      for (std::size_t r = 0; r < n; ++r) v[r] = evaluate_item(item, x1[r], 0.0);
    }
  }

  for (std::size_t j = 0; j < q; ++j) {
    const auto card = std::uniform_int_distribution<std::size_t>(2, config.max_cardinality)(rng);
    std::vector<double> weights(card);
    for (auto& w : weights) w = uniform(rng, 0.0, 15.0);
    auto& col = data.categorical.emplace_back();
    col.name = "z" + std::to_string(j);
    col.values.resize(n);
    auto& contrib = truth.categorical.emplace_back(n);
    std::uniform_int_distribution<std::size_t> pick(0, card - 1);
    for (std::size_t r = 0; r < n; ++r) {
      const auto v = pick(rng);
      col.values[r] = "v" + std::to_string(v);
      contrib[r] = weights[v];
    }
  }

  std::vector<double> raw_seasonal;
  if (config.has_temporal) {
    auto& col = data.temporal.emplace_back();
    col.name = "t";
    col.values.resize(n);
    std::uniform_int_distribution<std::int64_t> pick(1, 200);
    for (auto& t : col.values) t = pick(rng);
    truth.seasonal_phase = uniform(rng, -5.0, 5.0);
    raw_seasonal.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      raw_seasonal[r] = std::sin(2.0 * kPi * static_cast<double>(col.values[r]) /
                                     static_cast<double>(kSyntheticPeriod) +
                                 truth.seasonal_phase);
    }
  }

  std::vector<double> raw_noise(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& e : raw_noise) e = normal(rng);

  // Scale interactions, seasonality and noise so each hits its fraction of
  // the final response variance. The final variance depends on the scales
  // through cross terms, so iterate to a fixed point.
  const double interaction_target = config.difficulty == Difficulty::Hard ? config.interaction_fve : 0.0;
  const double noise_target = config.difficulty == Difficulty::Hard ? 0.005 : 0.001;
  std::vector<double> base(n, 0.0);
  std::vector<double> interaction_sum(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& f : truth.numerical) base[r] += f[r];
    for (const auto& f : truth.categorical) base[r] += f[r];
    for (const auto& f : raw_interactions) interaction_sum[r] += f[r];
  }
  const double var_interaction = population_variance(interaction_sum);
  const double var_seasonal = population_variance(raw_seasonal);
  const double var_noise = population_variance(raw_noise);

  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double total_var = std::max(population_variance(base), 1.0);
  std::vector<double> y(n);
  for (int it = 0; it < 500; ++it) {
    const double a_next = scale_for(interaction_target, var_interaction, total_var);
    const double b_next = scale_for(config.seasonality_ratio, var_seasonal, total_var);
    const double c_next = scale_for(noise_target, var_noise, total_var);
    for (std::size_t r = 0; r < n; ++r) {
      y[r] = base[r] + a_next * interaction_sum[r] + c_next * raw_noise[r];
      if (!raw_seasonal.empty()) y[r] += b_next * raw_seasonal[r];
    }
    const double next_var = population_variance(y);
    const bool settled = std::abs(a_next - a) <= 1e-13 * std::max(1.0, a_next) &&
                         std::abs(b_next - b) <= 1e-13 * std::max(1.0, b_next) &&
                         std::abs(c_next - c) <= 1e-13 * std::max(1.0, c_next);
    a = a_next;
    b = b_next;
    c = c_next;
    total_var = next_var;
    if (settled) break;
  }

  for (auto& v : raw_interactions) {
    for (auto& x : v) x *= a;
  }
  truth.interactions = std::move(raw_interactions);
  if (!raw_seasonal.empty()) {
    for (auto& x : raw_seasonal) x *= b;
    truth.seasonal = std::move(raw_seasonal);
    truth.seasonal_amplitude = b;
  }
  for (auto& e : raw_noise) e *= c;
  truth.noise = std::move(raw_noise);

  data.response = truth.reconstruct();
  const double tss = population_variance(data.response);
  std::vector<double> interaction_total(n, 0.0);
  for (const auto& f : truth.interactions) {
    for (std::size_t r = 0; r < n; ++r) interaction_total[r] += f[r];
  }
  truth.noise_ratio = tss > 0.0 ? population_variance(truth.noise) / tss : 0.0;
  truth.interaction_fve = tss > 0.0 ? population_variance(interaction_total) / tss : 0.0;
  truth.seasonality_fve = tss > 0.0 ? population_variance(truth.seasonal) / tss : 0.0;
  return out;
}

std::vector<SynthConfig> appendix_config(const std::string& name, double record_scale,
                                         Difficulty difficulty) {
  if (!(record_scale > 0.0)) throw ConfigError("record scale must be > 0");
  auto records = [&](std::size_t n) {
    return std::max<std::size_t>(
        100, static_cast<std::size_t>(std::llround(static_cast<double>(n) * record_scale)));
  };
  SynthConfig base;
  base.difficulty = difficulty;
  base.n_records = records(100000);
  base.n_features = 100;
  base.max_cardinality = 10;
  base.numerical_ratio = 0.8;

  std::vector<SynthConfig> out;
  if (name == "varyRecords") {
    for (std::size_t n : {10000, 50000, 100000, 200000, 500000}) {
      auto c = base;
      c.n_records = records(n);
      out.push_back(c);
    }
  } else if (name == "varyFeatures") {
    for (std::size_t f : {20, 50, 100, 150, 200}) {
      auto c = base;
      c.n_features = f;
      out.push_back(c);
    }
  } else if (name == "varyNumRatio") {
    for (double r : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      auto c = base;
      c.max_cardinality = 38;
      c.numerical_ratio = r;
      out.push_back(c);
    }
  } else if (name == "varySeasonality") {
    for (double s : {0.0, 0.02, 0.04, 0.06, 0.08, 0.1}) {
      auto c = base;
      c.n_features = 51;
      c.numerical_ratio = 40.0 / 51.0;
      c.has_temporal = true;
      c.seasonality_ratio = s;
      out.push_back(c);
    }
  } else if (name == "ablation1") {
    for (std::size_t n : {50000, 100000, 500000}) {
      auto c = base;
      c.n_records = records(n);
      c.numerical_ratio = 1.0;
      c.difficulty = Difficulty::Hard;
      out.push_back(c);
    }
  } else if (name == "ablation2") {
    for (std::size_t f : {50, 100, 200}) {
      auto c = base;
      c.n_features = f;
      c.numerical_ratio = 1.0;
      c.difficulty = Difficulty::Hard;
      out.push_back(c);
    }
  } else {
    throw ConfigError("unknown sweep configuration '" + name + "'");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].seed = 1000 + i;
  return out;
}

}  // namespace fxam
