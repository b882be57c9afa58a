#include "fxam/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "fxam/error.hpp"
#include "fxam/model.hpp"

namespace fxam {

using nlohmann::json;

ColumnKind parse_column_kind(const std::string& text) {
  if (text == "numerical") return ColumnKind::Numerical;
  if (text == "categorical") return ColumnKind::Categorical;
  if (text == "temporal") return ColumnKind::Temporal;
  if (text == "response") return ColumnKind::Response;
  if (text == "ignore") return ColumnKind::Ignore;
  throw ConfigError("unknown column kind '" + text + "'");
}

const char* column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Numerical:
      return "numerical";
    case ColumnKind::Categorical:
      return "categorical";
    case ColumnKind::Temporal:
      return "temporal";
    case ColumnKind::Response:
      return "response";
    case ColumnKind::Ignore:
      return "ignore";
  }
  return "?";
}

void SchemaFile::validate(bool allow_missing_response) const {
  std::unordered_set<std::string> names;
  std::size_t responses = 0;
  std::size_t features = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw ConfigError("schema column without a name");
    if (!names.insert(c.name).second) throw ConfigError("duplicate schema column '" + c.name + "'");
    switch (c.kind) {
      case ColumnKind::Response:
        ++responses;
        break;
      case ColumnKind::Temporal:
        if (c.period <= 1) throw ConfigError("temporal column '" + c.name + "' needs period > 1");
        if (c.tau <= 0) throw ConfigError("temporal column '" + c.name + "' needs tau > 0");
        ++features;
        break;
      case ColumnKind::Numerical:
      case ColumnKind::Categorical:
        ++features;
        break;
      case ColumnKind::Ignore:
        break;
    }
  }
  if (responses > 1 || (responses == 0 && !allow_missing_response)) {
    throw ConfigError("schema needs exactly one response column");
  }
  if (features == 0) throw ConfigError("schema needs at least one feature");
}

std::vector<TemporalSettings> SchemaFile::temporal_settings() const {
  std::vector<TemporalSettings> out;
  for (const auto& c : columns) {
    if (c.kind == ColumnKind::Temporal) out.push_back({c.tau, c.period});
  }
  return out;
}

SchemaFile SchemaFile::from_json(const std::string& text) {
  SchemaFile s;
  try {
    const auto doc = json::parse(text);
    for (const auto& c : doc.at("columns")) {
      SchemaColumn col;
      col.name = c.at("name").get<std::string>();
      col.kind = parse_column_kind(c.at("kind").get<std::string>());
      if (c.contains("tau")) col.tau = c.at("tau").get<std::int64_t>();
      if (c.contains("period")) col.period = c.at("period").get<std::int64_t>();
      s.columns.push_back(std::move(col));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
  return s;
}

SchemaFile SchemaFile::load(const std::string& path) { return from_json(read_text(path)); }

std::string SchemaFile::to_json() const {
  json cols = json::array();
  for (const auto& c : columns) {
    json j = {{"name", c.name}, {"kind", column_kind_name(c.kind)}};
    if (c.kind == ColumnKind::Temporal) {
      j["tau"] = c.tau;
      j["period"] = c.period;
    }
    cols.push_back(std::move(j));
  }
  return json{{"columns", std::move(cols)}}.dump(1) + "\n";
}

void SchemaFile::save(const std::string& path) const { write_text(path, to_json()); }

SchemaFile synthetic_schema(const Dataset& dataset) {
  SchemaFile s;
  for (const auto& c : dataset.numerical) s.columns.push_back({c.name, ColumnKind::Numerical});
  for (const auto& c : dataset.categorical) s.columns.push_back({c.name, ColumnKind::Categorical});
  for (const auto& c : dataset.temporal) {
    s.columns.push_back({c.name, ColumnKind::Temporal, 1, kSyntheticPeriod});
  }
  s.columns.push_back({dataset.response_name, ColumnKind::Response});
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(field));
  return out;
}

std::string data_location(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw DataError("cannot parse '" + s + "' as a number at " + data_location(row, column));
  }
  return v;
}

std::int64_t parse_integer(const std::string& s, std::size_t row, const std::string& column) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("cannot parse '" + s + "' as an integer time at " +
                    data_location(row, column));
  }
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

Dataset parse_csv(const std::string& text, const SchemaFile& schema, bool allow_missing_response) {
  schema.validate(allow_missing_response);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw DataError("CSV file is empty");
  auto header = split_csv_line(line, line_no);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  std::unordered_map<std::string, const SchemaColumn*> by_name;
  for (const auto& c : schema.columns) by_name[c.name] = &c;
  std::vector<const SchemaColumn*> roles;
  std::unordered_set<std::string> seen;
  for (const auto& h : header) {
    const auto it = by_name.find(h);
    if (it == by_name.end()) throw DataError("CSV column '" + h + "' is not in the schema");
    if (!seen.insert(h).second) throw DataError("CSV header repeats column '" + h + "'");
    roles.push_back(it->second);
  }
  for (const auto& c : schema.columns) {
    if (seen.contains(c.name)) continue;
    if (c.kind == ColumnKind::Ignore) continue;
    if (c.kind == ColumnKind::Response && allow_missing_response) continue;
    throw DataError("CSV file is missing column '" + c.name + "'");
  }

  // Dataset columns follow schema order.
  Dataset d;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& c : schema.columns) {
    if (!seen.contains(c.name)) continue;
    switch (c.kind) {
      case ColumnKind::Numerical:
        slot[c.name] = d.numerical.size();
        d.numerical.push_back({c.name, {}});
        break;
      case ColumnKind::Categorical:
        slot[c.name] = d.categorical.size();
        d.categorical.push_back({c.name, {}});
        break;
      case ColumnKind::Temporal:
        slot[c.name] = d.temporal.size();
        d.temporal.push_back({c.name, {}});
        break;
      case ColumnKind::Response:
        d.response_name = c.name;
        break;
      case ColumnKind::Ignore:
        break;
    }
  }

  std::size_t row = 0;
  while (next_line()) {
    ++row;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto& col = *roles[j];
      switch (col.kind) {
        case ColumnKind::Numerical:
          d.numerical[slot[col.name]].values.push_back(parse_number(fields[j], row, col.name));
          break;
        case ColumnKind::Categorical:
          d.categorical[slot[col.name]].values.push_back(fields[j]);
          break;
        case ColumnKind::Temporal: {
          const auto t = parse_integer(fields[j], row, col.name);
          if (t % col.tau != 0) {
            throw DataError("time " + fields[j] + " is not a multiple of tau=" +
                            std::to_string(col.tau) + " at " + data_location(row, col.name));
          }
          d.temporal[slot[col.name]].values.push_back(t);
          break;
        }
        case ColumnKind::Response:
          d.response.push_back(parse_number(fields[j], row, col.name));
          break;
        case ColumnKind::Ignore:
          break;
      }
    }
  }
  if (row == 0) throw DataError("CSV file has a header but no records");
  return d;
}

Dataset ingest_csv(const std::string& path, const SchemaFile& schema, bool allow_missing_response) {
  return parse_csv(read_text(path), schema, allow_missing_response);
}

std::string dataset_csv(const Dataset& d) {
  std::ostringstream out;
  bool first = true;
  auto sep = [&]() {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& c : d.numerical) sep(), out << csv_field(c.name);
  for (const auto& c : d.categorical) sep(), out << csv_field(c.name);
  for (const auto& c : d.temporal) sep(), out << csv_field(c.name);
  if (!d.response.empty()) sep(), out << csv_field(d.response_name);
  out << '\n';
  const std::size_t n = d.size();
  for (std::size_t r = 0; r < n; ++r) {
    first = true;
    for (const auto& c : d.numerical) sep(), out << format_double(c.values[r]);
    for (const auto& c : d.categorical) sep(), out << csv_field(c.values[r]);
    for (const auto& c : d.temporal) sep(), out << c.values[r];
    sep(), out << format_double(d.response[r]);
    out << '\n';
  }
  return out.str();
}

std::string ground_truth_csv(const GroundTruth& truth) {
  std::vector<std::pair<std::string, const std::vector<double>*>> cols;
  for (std::size_t j = 0; j < truth.numerical.size(); ++j) {
    cols.emplace_back("f_x" + std::to_string(j), &truth.numerical[j]);
  }
  std::size_t interaction = 0;
  for (const auto& item : truth.items) {
    if (item.features.size() != 2) continue;
    cols.emplace_back(std::string(function_name(item.type)) + "_x" +
                          std::to_string(item.features[0]) + "_x" +
                          std::to_string(item.features[1]),
                      &truth.interactions[interaction++]);
  }
  for (std::size_t j = 0; j < truth.categorical.size(); ++j) {
    cols.emplace_back("f_z" + std::to_string(j), &truth.categorical[j]);
  }
  if (!truth.seasonal.empty()) cols.emplace_back("seasonal_t", &truth.seasonal);
  cols.emplace_back("noise", &truth.noise);

  std::string out;
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c].first;
  out += '\n';
  for (std::size_t r = 0; r < truth.noise.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      out += format_double((*cols[c].second)[r]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (n < k) throw ConfigError("k-fold needs N >= k");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                    idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
  if (pred.size() != actual.size()) throw DataError("rmse: length mismatch");
  if (pred.empty()) throw DataError("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

std::pair<Dataset, TrainConfig> apply_ablation(const Dataset& dataset, const TrainConfig& config,
                                               const Ablation& ablation) {
  Dataset d = dataset;
  TrainConfig c = config;
  if (ablation.no_sampling) c.sampling.enabled = false;
  if (ablation.no_dfi) c.dynamic_feature_iteration = false;
  if (ablation.no_tas) {
    for (const auto& t : d.temporal) {
      NumericalColumn col;
      col.name = t.name;
      col.values.assign(t.values.begin(), t.values.end());
      d.numerical.push_back(std::move(col));
    }
    d.temporal.clear();
    c.temporal.clear();
  }
  return {std::move(d), std::move(c)};
}

std::size_t env_thread_cap() {
  const char* v = std::getenv("FXAM_THREADS");
  if (v == nullptr) return 1;
  std::size_t n = 0;
  const std::string s(v);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || n == 0) return 1;
  return n;
}

namespace {

struct PreparedExperiment {
  Dataset data;
  TrainConfig train;
  std::vector<std::vector<std::size_t>> folds;
  EvalReport report;
};

PreparedExperiment prepare_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  dataset.validate();
  auto [data, train] = apply_ablation(dataset, config.train, config.ablation);
  train.validate(data);
  PreparedExperiment p{std::move(data), std::move(train), {}, {}};
  p.folds = kfold_split(p.data.size(), config.folds, config.seed);
  p.report.seed = config.seed;
  p.report.folds.resize(p.folds.size());
  json echo = json::parse(train_config_to_json(p.train));
  echo["folds"] = config.folds;
  echo["cv_seed"] = config.seed;
  echo["no_sampling"] = config.ablation.no_sampling;
  echo["no_dfi"] = config.ablation.no_dfi;
  echo["no_tas"] = config.ablation.no_tas;
  p.report.config_echo = echo.dump();
  return p;
}

void run_fold(PreparedExperiment& p, std::size_t f) {
  std::vector<std::size_t> train_rows;
  for (std::size_t g = 0; g < p.folds.size(); ++g) {
    if (g != f) train_rows.insert(train_rows.end(), p.folds[g].begin(), p.folds[g].end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  const Dataset train_set = p.data.subset(train_rows);
  const Dataset test_set = p.data.subset(p.folds[f]);

  const auto start = std::chrono::steady_clock::now();
  const auto model = tsi_train(train_set, p.train);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto& r = p.report.folds[f];
  r.fold = f;
  r.rmse = rmse(model.predict(test_set), test_set.response);
  r.train_seconds = seconds;
  r.cycles = model.diagnostics.cycles;
  r.converged = model.diagnostics.converged;
  r.sample_size = model.diagnostics.sample_size;
}

void finish_report(EvalReport& report) {
  report.mean_rmse = 0.0;
  report.mean_train_seconds = 0.0;
  for (const auto& r : report.folds) {
    report.mean_rmse += r.rmse;
    report.mean_train_seconds += r.train_seconds;
  }
  report.mean_rmse /= static_cast<double>(report.folds.size());
  report.mean_train_seconds /= static_cast<double>(report.folds.size());
}

}  // namespace

EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  PreparedExperiment p = prepare_experiment(dataset, config);
  const std::size_t n_folds = p.folds.size();
  const std::size_t threads =
      std::min(n_folds, config.threads > 0 ? config.threads : env_thread_cap());
  if (threads <= 1) {
    for (std::size_t f = 0; f < n_folds; ++f) run_fold(p, f);
  } else {
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t f = 0;
          {
            std::lock_guard lock(error_mutex);
            if (next >= n_folds || error) return;
            f = next++;
          }
          try {
            run_fold(p, f);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  finish_report(p.report);
  return std::move(p.report);
}

std::vector<EvalReport> run_paired_experiments(const Dataset& dataset,
                                               std::span<const ExperimentConfig> configs) {
  if (configs.empty()) return {};
  for (const auto& c : configs) {
    if (c.folds != configs.front().folds || c.seed != configs.front().seed) {
      throw ConfigError("paired experiments need the same folds and cv seed");
    }
  }
  std::vector<PreparedExperiment> prepared;
  for (const auto& c : configs) prepared.push_back(prepare_experiment(dataset, c));
  for (std::size_t f = 0; f < prepared.front().folds.size(); ++f) {
    for (auto& p : prepared) run_fold(p, f);
  }
  std::vector<EvalReport> reports;
  for (auto& p : prepared) {
    finish_report(p.report);
    reports.push_back(std::move(p.report));
  }
  return reports;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "fold,rmse,train_seconds\n";
  for (const auto& r : report.folds) {
    out += std::to_string(r.fold) + ',' + format_double(r.rmse) + ',' +
           format_double(r.train_seconds) + '\n';
  }
  return out;
}

std::string report_summary(const EvalReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << "folds: " << report.folds.size() << "  seed: " << report.seed << '\n';
  for (const auto& r : report.folds) {
    out << "  fold " << r.fold << ": rmse " << r.rmse << "  train " << r.train_seconds << " s  cycles "
        << r.cycles << (r.converged ? "" : " (not converged)") << '\n';
  }
  out << "mean rmse: " << report.mean_rmse << '\n';
  out << "mean train seconds: " << report.mean_train_seconds << '\n';
  out << "config: " << report.config_echo << '\n';
  return out.str();
}

SmootherKind parse_backend(const std::string& text) {
  if (text == "kernel") return SmootherKind::FastKernel;
  if (text == "penalized") return SmootherKind::Penalized;
  throw ConfigError("unknown backend '" + text + "' (expected kernel or penalized)");
}

const char* backend_name(SmootherKind kind) {
  return kind == SmootherKind::FastKernel ? "kernel" : "penalized";
}

Difficulty parse_difficulty(const std::string& text) {
  if (text == "easy") return Difficulty::Easy;
  if (text == "hard") return Difficulty::Hard;
  throw ConfigError("unknown difficulty '" + text + "' (expected easy or hard)");
}

namespace {

template <typename T>
void take(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

void overlay_train(const json& doc, TrainConfig& c, const std::unordered_set<std::string>& extra) {
  static const std::unordered_set<std::string> known = {
      "backend", "lambda", "lambda_z", "lambda_t", "lambda_s", "bandwidth_factor",
      "trend_bandwidth_factor", "seasonal_bandwidth_factor", "temporal", "stage_tolerance",
      "stage1_max_passes", "outer_tolerance", "max_cycles", "temporal_tolerance",
      "temporal_max_iterations", "nga_tolerance", "nga_max_iterations", "sampling",
      "dynamic_feature_iteration", "seed"};
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key) && !extra.contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (doc.contains("backend")) c.backend = parse_backend(doc.at("backend").get<std::string>());
  take(doc, "lambda", c.lambda);
  take(doc, "lambda_z", c.lambda_z);
  take(doc, "lambda_t", c.lambda_t);
  take(doc, "lambda_s", c.lambda_s);
  take(doc, "bandwidth_factor", c.bandwidth_factor);
  take(doc, "trend_bandwidth_factor", c.trend_bandwidth_factor);
  take(doc, "seasonal_bandwidth_factor", c.seasonal_bandwidth_factor);
  if (doc.contains("temporal")) {
    c.temporal.clear();
    for (const auto& t : doc.at("temporal")) {
      c.temporal.push_back({t.at("tau").get<std::int64_t>(), t.at("period").get<std::int64_t>()});
    }
  }
  take(doc, "stage_tolerance", c.stage_tolerance);
  take(doc, "stage1_max_passes", c.stage1_max_passes);
  take(doc, "outer_tolerance", c.outer_tolerance);
  take(doc, "max_cycles", c.max_cycles);
  take(doc, "temporal_tolerance", c.temporal_tolerance);
  take(doc, "temporal_max_iterations", c.temporal_max_iterations);
  take(doc, "nga_tolerance", c.nga_tolerance);
  take(doc, "nga_max_iterations", c.nga_max_iterations);
  if (doc.contains("sampling")) {
    const auto& s = doc.at("sampling");
    take(s, "enabled", c.sampling.enabled);
    take(s, "gamma", c.sampling.gamma);
    take(s, "pilot_size", c.sampling.pilot_size);
    take(s, "activation_threshold", c.sampling.activation_threshold);
  }
  take(doc, "dynamic_feature_iteration", c.dynamic_feature_iteration);
  take(doc, "seed", c.seed);
}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text, TrainConfig base) {
  try {
    overlay_train(parse_config(text), base, {});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return base;
}

ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig base) {
  try {
    const auto doc = parse_config(text);
    overlay_train(doc, base.train,
                  {"folds", "cv_seed", "threads", "no_sampling", "no_dfi", "no_tas"});
    take(doc, "folds", base.folds);
    take(doc, "cv_seed", base.seed);
    take(doc, "threads", base.threads);
    take(doc, "no_sampling", base.ablation.no_sampling);
    take(doc, "no_dfi", base.ablation.no_dfi);
    take(doc, "no_tas", base.ablation.no_tas);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return base;
}

std::string train_config_to_json(const TrainConfig& c) {
  json temporal = json::array();
  for (const auto& t : c.temporal) temporal.push_back({{"tau", t.tau}, {"period", t.period}});
  const json doc = {{"backend", backend_name(c.backend)},
                    {"lambda", c.lambda},
                    {"lambda_z", c.lambda_z},
                    {"lambda_t", c.lambda_t},
                    {"lambda_s", c.lambda_s},
                    {"bandwidth_factor", c.bandwidth_factor},
                    {"trend_bandwidth_factor", c.trend_bandwidth_factor},
                    {"seasonal_bandwidth_factor", c.seasonal_bandwidth_factor},
                    {"temporal", temporal},
                    {"stage_tolerance", c.stage_tolerance},
                    {"stage1_max_passes", c.stage1_max_passes},
                    {"outer_tolerance", c.outer_tolerance},
                    {"max_cycles", c.max_cycles},
                    {"temporal_tolerance", c.temporal_tolerance},
                    {"temporal_max_iterations", c.temporal_max_iterations},
                    {"nga_tolerance", c.nga_tolerance},
                    {"nga_max_iterations", c.nga_max_iterations},
                    {"sampling",
                     {{"enabled", c.sampling.enabled},
                      {"gamma", c.sampling.gamma},
                      {"pilot_size", c.sampling.pilot_size},
                      {"activation_threshold", c.sampling.activation_threshold}}},
                    {"dynamic_feature_iteration", c.dynamic_feature_iteration},
                    {"seed", c.seed}};
  return doc.dump(1) + "\n";
}

}  // namespace fxam
