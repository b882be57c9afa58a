// fxam: command-line front end for training, evaluating and inspecting
// additive models on CSV data.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fxam/error.hpp"
#include "fxam/harness.hpp"
#include "fxam/model.hpp"
#include "fxam/synthgen.hpp"
#include "fxam/trainer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

/// TrainConfig fields settable from the command line. Unset options leave
/// the value from the config file (or the default) untouched.
struct TrainFlags {
  std::string config_path;
  std::optional<std::string> backend;
  std::optional<double> lambda, lambda_z, lambda_t, lambda_s;
  std::optional<double> bandwidth_factor, trend_bandwidth_factor, seasonal_bandwidth_factor;
  std::optional<double> stage_tolerance, outer_tolerance, temporal_tolerance, nga_tolerance;
  std::optional<int> stage1_max_passes, max_cycles, temporal_max_iterations, nga_max_iterations;
  std::optional<bool> sampling, dfi;
  std::optional<double> gamma;
  std::optional<std::size_t> pilot_size, activation_threshold;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON file with TrainConfig fields")
        ->check(CLI::ExistingFile);
    app->add_option("--backend", backend, "kernel | penalized");
    app->add_option("--lambda", lambda, "roughness penalty for shape functions");
    app->add_option("--lambda-z", lambda_z, "ridge penalty for categorical weights");
    app->add_option("--lambda-t", lambda_t, "trend roughness penalty");
    app->add_option("--lambda-s", lambda_s, "seasonal roughness penalty");
    app->add_option("--bandwidth-factor", bandwidth_factor);
    app->add_option("--trend-bandwidth-factor", trend_bandwidth_factor);
    app->add_option("--seasonal-bandwidth-factor", seasonal_bandwidth_factor);
    app->add_option("--stage-tolerance", stage_tolerance);
    app->add_option("--stage1-max-passes", stage1_max_passes);
    app->add_option("--outer-tolerance", outer_tolerance);
    app->add_option("--max-cycles", max_cycles);
    app->add_option("--temporal-tolerance", temporal_tolerance);
    app->add_option("--temporal-max-iterations", temporal_max_iterations);
    app->add_option("--nga-tolerance", nga_tolerance);
    app->add_option("--nga-max-iterations", nga_max_iterations);
    app->add_option("--sampling", sampling, "sampling-based initialisation (true/false)");
    app->add_option("--gamma", gamma, "sample size multiplier");
    app->add_option("--pilot-size", pilot_size);
    app->add_option("--sampling-threshold", activation_threshold,
                    "sampling only runs above this many records");
    app->add_option("--dfi", dfi, "dynamic feature iteration (true/false)");
    app->add_option("--seed", seed);
  }

  /// defaults < config file < flags.
  fxam::TrainConfig resolve(fxam::TrainConfig base = {}) const {
    if (!config_path.empty()) base = fxam::train_config_from_json(fxam::read_text(config_path), base);
    apply(base);
    return base;
  }

  void apply(fxam::TrainConfig& c) const {
    if (backend) c.backend = fxam::parse_backend(*backend);
    if (lambda) c.lambda = *lambda;
    if (lambda_z) c.lambda_z = *lambda_z;
    if (lambda_t) c.lambda_t = *lambda_t;
    if (lambda_s) c.lambda_s = *lambda_s;
    if (bandwidth_factor) c.bandwidth_factor = *bandwidth_factor;
    if (trend_bandwidth_factor) c.trend_bandwidth_factor = *trend_bandwidth_factor;
    if (seasonal_bandwidth_factor) c.seasonal_bandwidth_factor = *seasonal_bandwidth_factor;
    if (stage_tolerance) c.stage_tolerance = *stage_tolerance;
    if (stage1_max_passes) c.stage1_max_passes = *stage1_max_passes;
    if (outer_tolerance) c.outer_tolerance = *outer_tolerance;
    if (max_cycles) c.max_cycles = *max_cycles;
    if (temporal_tolerance) c.temporal_tolerance = *temporal_tolerance;
    if (temporal_max_iterations) c.temporal_max_iterations = *temporal_max_iterations;
    if (nga_tolerance) c.nga_tolerance = *nga_tolerance;
    if (nga_max_iterations) c.nga_max_iterations = *nga_max_iterations;
    if (sampling) c.sampling.enabled = *sampling;
    if (gamma) c.sampling.gamma = *gamma;
    if (pilot_size) c.sampling.pilot_size = *pilot_size;
    if (activation_threshold) c.sampling.activation_threshold = *activation_threshold;
    if (dfi) c.dynamic_feature_iteration = *dfi;
    if (seed) c.seed = *seed;
  }
};

struct ExperimentFlags {
  std::optional<std::size_t> folds, threads;
  std::optional<std::uint64_t> cv_seed;
  bool no_sampling = false, no_dfi = false, no_tas = false;

  void add_to(CLI::App* app) {
    app->add_option("--folds", folds, "cross-validation folds (default 5)");
    app->add_option("--cv-seed", cv_seed, "fold shuffling seed");
    app->add_option("--threads", threads, "concurrent folds (default: FXAM_THREADS or 1)");
    app->add_flag("--no-sampling", no_sampling, "ablation: disable sampling initialisation");
    app->add_flag("--no-dfi", no_dfi, "ablation: fixed feature order");
    app->add_flag("--no-tas", no_tas, "ablation: treat temporal columns as numerical");
  }

  fxam::ExperimentConfig resolve(const TrainFlags& train, const fxam::TrainConfig& base) const {
    fxam::ExperimentConfig e;
    e.train = base;
    if (!train.config_path.empty()) {
      e = fxam::experiment_config_from_json(fxam::read_text(train.config_path), e);
    }
    train.apply(e.train);
    if (folds) e.folds = *folds;
    if (cv_seed) e.seed = *cv_seed;
    if (threads) e.threads = *threads;
    if (no_sampling) e.ablation.no_sampling = true;
    if (no_dfi) e.ablation.no_dfi = true;
    if (no_tas) e.ablation.no_tas = true;
    return e;
  }
};

/// Temporal settings come from the schema unless the config lists them.
fxam::TrainConfig with_schema_temporal(fxam::TrainConfig c, const fxam::SchemaFile& schema) {
  if (c.temporal.empty()) c.temporal = schema.temporal_settings();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    fxam::write_text(path, text);
  }
}

std::string predictions_csv(const std::vector<double>& pred) {
  std::string out = "prediction\n";
  for (double v : pred) out += fxam::format_double(v) + '\n';
  return out;
}

std::string decomposition_csv(const fxam::RecordDecomposition& parts) {
  std::string out = "row,intercept";
  for (const auto& [name, values] : parts.columns) out += ',' + name;
  out += ",prediction\n";
  for (std::size_t r = 0; r < parts.rows; ++r) {
    double total = parts.intercept;
    out += std::to_string(r) + ',' + fxam::format_double(parts.intercept);
    for (const auto& [name, values] : parts.columns) {
      out += ',' + fxam::format_double(values[r]);
      total += values[r];
    }
    out += ',' + fxam::format_double(total) + '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fxam: interpretable additive models with temporal and categorical terms"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset with ground truth");
  fxam::SynthConfig synth;
  std::string difficulty = "easy";
  std::string data_out, schema_out, truth_out;
  gen->add_option("--records", synth.n_records);
  gen->add_option("--features", synth.n_features, "total features excluding time");
  gen->add_option("--max-cardinality", synth.max_cardinality);
  gen->add_option("--numerical-ratio", synth.numerical_ratio);
  gen->add_flag("--temporal", synth.has_temporal, "add a time column with seasonality");
  gen->add_option("--seasonality", synth.seasonality_ratio, "seasonal FVE in [0, 0.1]");
  gen->add_option("--difficulty", difficulty, "easy | hard");
  gen->add_option("--interaction-fve", synth.interaction_fve);
  gen->add_option("--seed", synth.seed);
  gen->add_option("--out", data_out, "dataset CSV")->required();
  gen->add_option("--schema-out", schema_out, "schema JSON");
  gen->add_option("--truth-out", truth_out, "ground-truth contributions CSV");

  // train
  auto* train = app.add_subcommand("train", "fit a model on a CSV file");
  std::string data_path, schema_path, model_path;
  TrainFlags train_flags;
  train->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  train->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);
  train->add_option("--model-out", model_path)->required();
  train_flags.add_to(train);

  // predict
  auto* predict = app.add_subcommand("predict", "score a CSV file with a saved model");
  std::string model_in, out_path;
  predict->add_option("--model", model_in)->required()->check(CLI::ExistingFile);
  predict->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_path, "predictions CSV (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validated RMSE and timing");
  TrainFlags eval_flags;
  ExperimentFlags exp_flags;
  std::string report_path;
  evaluate->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report", report_path, "per-fold CSV: fold,rmse,train_seconds");
  eval_flags.add_to(evaluate);
  exp_flags.add_to(evaluate);

  // decompose
  auto* decompose = app.add_subcommand("decompose", "per-record additive components");
  decompose->add_option("--model", model_in)->required()->check(CLI::ExistingFile);
  decompose->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  decompose->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);
  decompose->add_option("--out", out_path, "CSV (default stdout)");

  // export-contributions
  auto* contrib = app.add_subcommand("export-contributions",
                                     "shape values, categorical weights and temporal curves");
  contrib->add_option("--model", model_in)->required()->check(CLI::ExistingFile);
  contrib->add_option("--out", out_path, "CSV (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a named synthetic sweep with cross-validation");
  std::string sweep_name;
  double record_scale = 0.1;
  std::vector<std::string> variants{"full"};
  TrainFlags sweep_flags;
  ExperimentFlags sweep_exp;
  sweep->add_option("--name", sweep_name,
                    "varyRecords | varyFeatures | varyNumRatio | varySeasonality | ablation1 | ablation2")
      ->required();
  sweep->add_option("--record-scale", record_scale, "multiplier on the sweep's record counts");
  sweep->add_option("--difficulty", difficulty, "easy | hard");
  sweep->add_option("--variants", variants, "full, no_sampling, no_dfi, no_tas")->delimiter(',');
  sweep->add_option("--out", out_path, "CSV (default stdout)");
  sweep_flags.add_to(sweep);
  sweep_exp.add_to(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      synth.difficulty = fxam::parse_difficulty(difficulty);
      const auto result = fxam::generate(synth);
      fxam::write_text(data_out, fxam::dataset_csv(result.dataset));
      if (!schema_out.empty()) fxam::synthetic_schema(result.dataset).save(schema_out);
      if (!truth_out.empty()) fxam::write_text(truth_out, fxam::ground_truth_csv(result.truth));
      std::cerr << "noise ratio " << result.truth.noise_ratio << ", interaction FVE "
                << result.truth.interaction_fve << ", seasonal FVE "
                << result.truth.seasonality_fve << '\n';
      return 0;
    }
    if (*train) {
      const auto schema = fxam::SchemaFile::load(schema_path);
      const auto data = fxam::ingest_csv(data_path, schema);
      const auto config = with_schema_temporal(train_flags.resolve(), schema);
      const auto model = fxam::tsi_train(data, config);
      fxam::save_model(model, model_path);
      std::cerr << "cycles " << model.diagnostics.cycles << ", converged "
                << (model.diagnostics.converged ? "yes" : "no") << '\n';
      if (!model.diagnostics.converged) {
        std::cerr << "error: training did not converge within max_cycles (model written)\n";
        return kExitConvergence;
      }
      return 0;
    }
    if (*predict) {
      const auto schema = fxam::SchemaFile::load(schema_path);
      const auto data = fxam::ingest_csv(data_path, schema, true);
      const auto model = fxam::load_model(model_in);
      emit(out_path, predictions_csv(model.predict(data)));
      return 0;
    }
    if (*evaluate) {
      const auto schema = fxam::SchemaFile::load(schema_path);
      const auto data = fxam::ingest_csv(data_path, schema);
      auto exp = exp_flags.resolve(eval_flags, {});
      exp.train = with_schema_temporal(exp.train, schema);
      const auto report = fxam::run_experiment(data, exp);
      if (!report_path.empty()) fxam::write_text(report_path, fxam::report_csv(report));
      std::cout << fxam::report_summary(report);
      return 0;
    }
    if (*decompose) {
      const auto schema = fxam::SchemaFile::load(schema_path);
      const auto data = fxam::ingest_csv(data_path, schema, true);
      const auto model = fxam::load_model(model_in);
      emit(out_path, decomposition_csv(fxam::decompose_records(model, data)));
      return 0;
    }
    if (*contrib) {
      const auto model = fxam::load_model(model_in);
      emit(out_path, fxam::contributions_csv(fxam::export_contributions(model)));
      return 0;
    }
    if (*sweep) {
      const auto level = fxam::parse_difficulty(difficulty);
      const auto configs = fxam::appendix_config(sweep_name, record_scale, level);
      std::string out =
          "index,records,features,numerical_ratio,seasonality,variant,mean_rmse,mean_train_seconds\n";
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& sc = configs[i];
        const auto generated = fxam::generate(sc);
        const auto schema = fxam::synthetic_schema(generated.dataset);
        std::vector<fxam::ExperimentConfig> runs;
        for (const auto& v : variants) {
          auto e = sweep_exp.resolve(sweep_flags, {});
          e.train = with_schema_temporal(e.train, schema);
          if (v == "no_sampling") e.ablation.no_sampling = true;
          else if (v == "no_dfi") e.ablation.no_dfi = true;
          else if (v == "no_tas") e.ablation.no_tas = true;
          else if (v != "full") throw fxam::ConfigError("unknown variant '" + v + "'");
          runs.push_back(e);
        }
        const auto reports = fxam::run_paired_experiments(generated.dataset, runs);
        for (std::size_t v = 0; v < variants.size(); ++v) {
          out += std::to_string(i) + ',' + std::to_string(sc.n_records) + ',' +
                 std::to_string(sc.n_features) + ',' + fxam::format_double(sc.numerical_ratio) +
                 ',' + fxam::format_double(sc.seasonality_ratio) + ',' + variants[v] + ',' +
                 fxam::format_double(reports[v].mean_rmse) + ',' +
                 fxam::format_double(reports[v].mean_train_seconds) + '\n';
        }
        std::cerr << "sweep " << sweep_name << ": " << (i + 1) << "/" << configs.size() << '\n';
      }
      emit(out_path, out);
      return 0;
    }
  } catch (const fxam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fxam::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fxam::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
