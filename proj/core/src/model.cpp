#include "fxam/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "fxam/interpolation.hpp"

namespace fxam {

using nlohmann::json;

void ShapeCurve::validate() const {
  if (knots.empty()) throw DataError("shape curve is empty");
  if (knots.size() != values.size()) throw DataError("shape curve knots/values differ in length");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (!std::isfinite(knots[k]) || !std::isfinite(values[k])) {
      throw DataError("shape curve holds a non-finite number");
    }
    if (k > 0 && !(knots[k] > knots[k - 1])) throw DataError("shape knots must increase strictly");
  }
}

double evaluate_shape(const ShapeCurve& curve, double x) {
  if (curve.knots.empty()) throw DataError("evaluate_shape: empty curve");
  return interpolate_clamped(curve.knots, curve.values, x);
}

std::pair<double, double> evaluate_temporal_curves(const TemporalCurves& curves, std::int64_t t) {
  if (t % curves.tau != 0) {
    throw DataError("time " + std::to_string(t) + " is not a multiple of tau=" +
                    std::to_string(curves.tau));
  }
  const auto x = static_cast<double>(t);
  const double trend = curves.trend.knots.empty() ? 0.0 : evaluate_shape(curves.trend, x);
  const auto phi = static_cast<std::size_t>(phase_of(t, curves.tau, curves.period));
  if (phi >= curves.seasonal.size() || curves.seasonal[phi].knots.empty()) return {trend, 0.0};
  return {trend, evaluate_shape(curves.seasonal[phi], x)};
}

double FxamModel::beta(const std::string& label) const {
  const auto it = betas.find(label);
  return it == betas.end() ? 0.0 : it->second;
}

double FxamModel::predict(const Record& record) const {
  double out = intercept;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& name = schema.numerical[i];
    const auto it = record.numerical.find(name);
    if (it == record.numerical.end()) throw DataError("record is missing column '" + name + "'");
    if (!std::isfinite(it->second)) throw DataError("non-finite value in column '" + name + "'");
    out += evaluate_shape(shapes[i], it->second);
  }
  for (const auto& name : schema.categorical) {
    const auto it = record.categorical.find(name);
    if (it == record.categorical.end()) throw DataError("record is missing column '" + name + "'");
    out += beta(categorical_label(name, it->second));
  }
  for (const auto& curves : temporals) {
    const auto it = record.temporal.find(curves.name);
    if (it == record.temporal.end()) {
      throw DataError("record is missing column '" + curves.name + "'");
    }
    const auto [trend, seasonal] = evaluate_temporal_curves(curves, it->second);
    out += trend + seasonal;
  }
  return out;
}

namespace {

template <typename Column>
const Column& find_column(const std::vector<Column>& columns, const std::string& name) {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw DataError("dataset is missing column '" + name + "'");
}

std::size_t dataset_rows(const Dataset& d) {
  if (!d.numerical.empty()) return d.numerical.front().values.size();
  if (!d.categorical.empty()) return d.categorical.front().values.size();
  if (!d.temporal.empty()) return d.temporal.front().values.size();
  return d.response.size();
}

}  // namespace

RecordDecomposition decompose_records(const FxamModel& model, const Dataset& dataset) {
  const std::size_t n = dataset_rows(dataset);
  RecordDecomposition out;
  out.intercept = model.intercept;
  out.rows = n;
  for (std::size_t i = 0; i < model.shapes.size(); ++i) {
    const auto& col = find_column(dataset.numerical, model.schema.numerical[i]);
    if (col.values.size() != n) throw DataError("column '" + col.name + "' has wrong length");
    auto& values = out.columns.emplace_back(col.name, std::vector<double>(n)).second;
    for (std::size_t r = 0; r < n; ++r) {
      if (!std::isfinite(col.values[r])) {
        throw DataError("non-finite value in column '" + col.name + "' at row " +
                        std::to_string(r));
      }
      values[r] = evaluate_shape(model.shapes[i], col.values[r]);
    }
  }
  for (const auto& name : model.schema.categorical) {
    const auto& col = find_column(dataset.categorical, name);
    if (col.values.size() != n) throw DataError("column '" + name + "' has wrong length");
    auto& values = out.columns.emplace_back(name, std::vector<double>(n)).second;
    for (std::size_t r = 0; r < n; ++r) values[r] = model.beta(categorical_label(name, col.values[r]));
  }
  for (const auto& curves : model.temporals) {
    const auto& col = find_column(dataset.temporal, curves.name);
    if (col.values.size() != n) throw DataError("column '" + curves.name + "' has wrong length");
    std::vector<double> trend(n), seasonal(n);
    for (std::size_t r = 0; r < n; ++r) {
      std::tie(trend[r], seasonal[r]) = evaluate_temporal_curves(curves, col.values[r]);
    }
    out.columns.emplace_back(curves.name + ":trend", std::move(trend));
    out.columns.emplace_back(curves.name + ":seasonal", std::move(seasonal));
  }
  return out;
}

std::vector<double> FxamModel::predict(const Dataset& dataset) const {
  const auto parts = decompose_records(*this, dataset);
  std::vector<double> out(parts.rows, parts.intercept);
  for (const auto& [name, values] : parts.columns) {
    for (std::size_t r = 0; r < parts.rows; ++r) out[r] += values[r];
  }
  return out;
}

void FxamModel::validate() const {
  if (!std::isfinite(intercept)) throw DataError("model intercept is not finite");
  if (shapes.size() != schema.numerical.size()) {
    throw DataError("model has " + std::to_string(shapes.size()) + " shapes for " +
                    std::to_string(schema.numerical.size()) + " numerical columns");
  }
  for (const auto& s : shapes) s.validate();
  for (const auto& [label, value] : betas) {
    if (!std::isfinite(value)) throw DataError("non-finite weight for '" + label + "'");
  }
  if (temporals.size() != schema.temporal.size()) {
    throw DataError("model temporal curves do not match the schema");
  }
  for (std::size_t k = 0; k < temporals.size(); ++k) {
    const auto& t = temporals[k];
    if (t.name != schema.temporal[k]) throw DataError("temporal curve name mismatch");
    if (t.tau <= 0 || t.period <= 1) throw DataError("bad tau/period for '" + t.name + "'");
    if (t.seasonal.size() != static_cast<std::size_t>(t.period)) {
      throw DataError("'" + t.name + "' needs one seasonal curve per phase");
    }
    t.trend.validate();
    for (const auto& s : t.seasonal) {
      if (!s.knots.empty()) s.validate();
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace {

double parse_double(const json& j) {
  if (!j.is_string()) throw DataError("model file: expected a number encoded as a string");
  const auto& s = j.get_ref<const std::string&>();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("model file: bad number '" + s + "'");
  }
  return v;
}

json encode_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(format_double(x));
  return out;
}

std::vector<double> decode_list(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(parse_double(x));
  return out;
}

json encode_curve(const ShapeCurve& c) {
  return {{"knots", encode_list(c.knots)}, {"values", encode_list(c.values)}};
}

ShapeCurve decode_curve(const json& j) {
  return {decode_list(j.at("knots")), decode_list(j.at("values"))};
}

}  // namespace

std::string serialize(const FxamModel& model) {
  json doc;
  doc["version"] = FxamModel::kFormatVersion;
  doc["schema"] = {{"response", model.schema.response},
                   {"numerical", model.schema.numerical},
                   {"categorical", model.schema.categorical},
                   {"temporal", model.schema.temporal}};
  doc["intercept"] = format_double(model.intercept);

  json shapes = json::array();
  for (std::size_t i = 0; i < model.shapes.size(); ++i) {
    auto c = encode_curve(model.shapes[i]);
    c["feature"] = model.schema.numerical.at(i);
    shapes.push_back(std::move(c));
  }
  doc["shapes"] = std::move(shapes);

  json betas = json::object();
  for (const auto& [label, value] : model.betas) betas[label] = format_double(value);
  doc["betas"] = std::move(betas);

  json temporals = json::array();
  for (const auto& t : model.temporals) {
    json seasonal = json::array();
    for (const auto& s : t.seasonal) seasonal.push_back(encode_curve(s));
    temporals.push_back({{"name", t.name},
                         {"tau", t.tau},
                         {"period", t.period},
                         {"trend", encode_curve(t.trend)},
                         {"seasonal", std::move(seasonal)}});
  }
  doc["temporals"] = std::move(temporals);

  const auto& d = model.diagnostics;
  doc["diagnostics"] = {{"cycles", d.cycles},
                        {"converged", d.converged},
                        {"objective_is_rss", d.objective_is_rss},
                        {"objective_history", encode_list(d.objective_history)},
                        {"sample_size", d.sample_size},
                        {"timing",
                         {{"init_seconds", format_double(d.timing.init_seconds)},
                          {"stage1_seconds", format_double(d.timing.stage1_seconds)},
                          {"stage2_seconds", format_double(d.timing.stage2_seconds)},
                          {"stage3_seconds", format_double(d.timing.stage3_seconds)}}}};
  return doc.dump(1);
}

FxamModel deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != FxamModel::kFormatVersion) {
      throw DataError("model format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(FxamModel::kFormatVersion) + ")");
    }
    FxamModel m;
    const auto& s = doc.at("schema");
    m.schema.response = s.at("response").get<std::string>();
    m.schema.numerical = s.at("numerical").get<std::vector<std::string>>();
    m.schema.categorical = s.at("categorical").get<std::vector<std::string>>();
    m.schema.temporal = s.at("temporal").get<std::vector<std::string>>();
    m.intercept = parse_double(doc.at("intercept"));
    for (const auto& c : doc.at("shapes")) m.shapes.push_back(decode_curve(c));
    for (const auto& [label, value] : doc.at("betas").items()) m.betas[label] = parse_double(value);
    for (const auto& t : doc.at("temporals")) {
      TemporalCurves tc;
      tc.name = t.at("name").get<std::string>();
      tc.tau = t.at("tau").get<std::int64_t>();
      tc.period = t.at("period").get<std::int64_t>();
      tc.trend = decode_curve(t.at("trend"));
      for (const auto& c : t.at("seasonal")) tc.seasonal.push_back(decode_curve(c));
      m.temporals.push_back(std::move(tc));
    }
    const auto& d = doc.at("diagnostics");
    m.diagnostics.cycles = d.at("cycles").get<int>();
    m.diagnostics.converged = d.at("converged").get<bool>();
    m.diagnostics.objective_is_rss = d.at("objective_is_rss").get<bool>();
    m.diagnostics.objective_history = decode_list(d.at("objective_history"));
    m.diagnostics.sample_size = d.at("sample_size").get<std::size_t>();
    const auto& tm = d.at("timing");
    m.diagnostics.timing.init_seconds = parse_double(tm.at("init_seconds"));
    m.diagnostics.timing.stage1_seconds = parse_double(tm.at("stage1_seconds"));
    m.diagnostics.timing.stage2_seconds = parse_double(tm.at("stage2_seconds"));
    m.diagnostics.timing.stage3_seconds = parse_double(tm.at("stage3_seconds"));
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const FxamModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << serialize(model) << '\n';
  if (!out) throw DataError("failed writing model file '" + path + "'");
}

FxamModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

std::vector<ContributionRow> export_contributions(const FxamModel& model) {
  std::vector<ContributionRow> rows;
  for (std::size_t i = 0; i < model.shapes.size(); ++i) {
    const auto& c = model.shapes[i];
    for (std::size_t k = 0; k < c.knots.size(); ++k) {
      rows.push_back({"numerical", model.schema.numerical[i], -1, format_double(c.knots[k]),
                      c.values[k]});
    }
  }
  for (const auto& [label, value] : model.betas) {
    const auto eq = label.find('=');
    rows.push_back({"categorical", label.substr(0, eq), -1, label, value});
  }
  for (const auto& t : model.temporals) {
    for (std::size_t k = 0; k < t.trend.knots.size(); ++k) {
      rows.push_back({"trend", t.name, -1, format_double(t.trend.knots[k]), t.trend.values[k]});
    }
    for (std::size_t phi = 0; phi < t.seasonal.size(); ++phi) {
      const auto& c = t.seasonal[phi];
      for (std::size_t k = 0; k < c.knots.size(); ++k) {
        rows.push_back({"seasonal", t.name, static_cast<int>(phi), format_double(c.knots[k]),
                        c.values[k]});
      }
    }
  }
  return rows;
}

namespace {

// Labels may hold commas or quotes; quote those per RFC 4180.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string contributions_csv(const std::vector<ContributionRow>& rows) {
  std::string out = "component,feature,phase,key,value\n";
  for (const auto& r : rows) {
    out += r.component + ',' + csv_field(r.feature) + ',' +
           (r.phase >= 0 ? std::to_string(r.phase) : std::string()) + ',' + csv_field(r.key) +
           ',' + format_double(r.value) + '\n';
  }
  return out;
}

}  // namespace fxam
