#include "propscore/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "propscore/error.hpp"

namespace propscore {

namespace {

using json = nlohmann::json;

std::string at_line(std::size_t line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r") == std::string_view::npos; }

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

VectorX<double> number_array(const json& obj, const char* key, std::size_t line) {
  if (!obj.contains(key)) throw Error(ErrorKind::ParseError, at_line(line, std::string("missing '") + key + "'"));
  const auto& arr = obj.at(key);
  if (!arr.is_array()) throw Error(ErrorKind::ParseError, at_line(line, std::string("'") + key + "' is not an array"));
  VectorX<double> v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw Error(ErrorKind::ParseError, at_line(line, std::string("'") + key + "' holds a non-number"));
    }
    v(static_cast<Index>(i)) = arr[i].get<double>();
  }
  return v;
}

constexpr const char* kFormKeys[] = {"type", "edges", "probs", "levels", "values"};

bool has_form_keys(const json& obj) {
  for (const char* k : kFormKeys) {
    if (obj.contains(k)) return true;
  }
  return false;
}

RawForecast parse_form(const json& obj, std::string type, std::size_t line) {
  if (!obj.is_object()) throw Error(ErrorKind::ParseError, at_line(line, "forecast is not an object"));
  const bool hist_keys = obj.contains("edges") || obj.contains("probs");
  const bool quant_keys = obj.contains("levels");
  const bool value_keys = obj.contains("values");
  if (obj.contains("type")) {
    if (!obj.at("type").is_string()) throw Error(ErrorKind::ParseError, at_line(line, "'type' is not a string"));
    const auto declared = obj.at("type").get<std::string>();
    if (!type.empty() && declared != type) {
      throw Error(ErrorKind::AmbiguousForm, at_line(line, "form '" + type + "' declares type '" + declared + "'"));
    }
    type = declared;
  }
  if (type.empty()) {
    const int forms = int(hist_keys) + int(quant_keys) + int(value_keys && !quant_keys);
    if (forms > 1) throw Error(ErrorKind::AmbiguousForm, at_line(line, "record carries more than one forecast form"));
    if (hist_keys) type = "histogram";
    else if (quant_keys) type = "quantiles";
    else if (value_keys) type = "samples";
    else throw Error(ErrorKind::UnknownForm, at_line(line, "record carries no forecast"));
  }

  try {
    if (type == "histogram") {
      if (quant_keys || value_keys) throw Error(ErrorKind::AmbiguousForm, at_line(line, "histogram record also carries quantile or sample fields"));
      return HistogramForecastd(number_array(obj, "edges", line), number_array(obj, "probs", line));
    }
    if (type == "quantiles") {
      if (hist_keys) throw Error(ErrorKind::AmbiguousForm, at_line(line, "quantile record also carries histogram fields"));
      return QuantileForecastd(number_array(obj, "levels", line), number_array(obj, "values", line));
    }
    if (type == "samples") {
      if (hist_keys || quant_keys) throw Error(ErrorKind::AmbiguousForm, at_line(line, "sample record also carries histogram or quantile fields"));
      return SampleForecastd(number_array(obj, "values", line));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidForecast) throw Error(e.kind(), at_line(line, e.what()));
    throw;
  }
  throw Error(ErrorKind::UnknownForm, at_line(line, "unknown forecast type '" + type + "'"));
}

json form_to_json(const RawForecast& f) {
  json j;
  const auto arr = [](const VectorX<double>& v) { return std::vector<double>(v.begin(), v.end()); };
  std::visit(
      [&](const auto& fc) {
        using T = std::decay_t<decltype(fc)>;
        if constexpr (std::is_same_v<T, HistogramForecastd>) {
          j["type"] = "histogram";
          j["edges"] = arr(fc.edges());
          j["probs"] = arr(fc.probs());
        } else if constexpr (std::is_same_v<T, QuantileForecastd>) {
          j["type"] = "quantiles";
          j["levels"] = arr(fc.levels());
          j["values"] = arr(fc.values());
        } else {
          j["type"] = "samples";
          j["values"] = arr(fc.values());
        }
      },
      f);
  return j;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

constexpr std::string_view kRunHeader = "model,dataset,fold,metric,value";

struct RunLine {
  std::optional<RunRecord> record;
  std::optional<Violation> problem;
  std::optional<ErrorKind> kind;
};

RunLine parse_run_line(const std::string& text, std::size_t line) {
  RunLine out;
  const auto fail = [&](ErrorKind kind, const std::string& msg) {
    out.kind = kind;
    out.problem = Violation{line, msg};
    return out;
  };
  const auto fields = split_csv(text);
  if (fields.size() != 5) return fail(ErrorKind::ParseError, "expected 5 fields, found " + std::to_string(fields.size()));
  RunRecord r;
  r.model = fields[0];
  r.dataset = fields[1];
  r.metric = fields[3];
  if (r.model.empty() || r.dataset.empty() || r.metric.empty()) {
    return fail(ErrorKind::ParseError, "empty model, dataset or metric");
  }
  {
    const auto& s = fields[2];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), r.fold);
    if (ec != std::errc() || ptr != s.data() + s.size() || r.fold < 0) {
      return fail(ErrorKind::ParseError, "fold '" + s + "' is not a nonnegative integer");
    }
  }
  {
    const auto& s = fields[4];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), r.value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      // from_chars reports out-of-range for overflow; treat like non-finite.
      if (ec == std::errc::result_out_of_range) return fail(ErrorKind::InvalidValue, "value '" + s + "' is not finite");
      return fail(ErrorKind::ParseError, "value '" + s + "' is not a number");
    }
    if (!std::isfinite(r.value)) return fail(ErrorKind::InvalidValue, "value '" + s + "' is not finite");
  }
  out.record = std::move(r);
  return out;
}

using RunKey = std::tuple<std::string, std::string, int, std::string>;

RunKey key_of(const RunRecord& r) { return {r.model, r.dataset, r.fold, r.metric}; }

std::string describe(const RunKey& k) {
  return "(" + std::get<0>(k) + ", " + std::get<1>(k) + ", " + std::to_string(std::get<2>(k)) + ", " +
         std::get<3>(k) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// Forecast records

ForecastRecord parse_forecast_record(std::string_view text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, at_line(line, e.what()));
  }
  if (!obj.is_object()) throw Error(ErrorKind::ParseError, at_line(line, "record is not a JSON object"));

  std::string id;
  if (obj.contains("id")) {
    const auto& id_field = obj.at("id");
    id = id_field.is_string() ? id_field.get<std::string>() : id_field.dump();
  } else {
    id = std::to_string(line);
  }
  if (!obj.contains("y") || !obj.at("y").is_number()) {
    throw Error(ErrorKind::ParseError, at_line(line, "missing numeric target 'y'"));
  }
  const double target = obj.at("y").get<double>();
  if (!std::isfinite(target)) throw Error(ErrorKind::InvalidValue, at_line(line, "target is not finite"));

  std::vector<std::pair<std::string, const json*>> forms;
  if (obj.contains("forecast")) forms.emplace_back("", &obj.at("forecast"));
  for (const char* name : {"histogram", "quantiles", "samples"}) {
    if (obj.contains(name)) forms.emplace_back(name, &obj.at(name));
  }
  if (has_form_keys(obj)) forms.emplace_back("", &obj);
  if (forms.empty()) throw Error(ErrorKind::UnknownForm, at_line(line, "record carries no forecast"));
  if (forms.size() > 1) throw Error(ErrorKind::AmbiguousForm, at_line(line, "record carries more than one forecast form"));
  return ForecastRecord{std::move(id), target, parse_form(*forms.front().second, forms.front().first, line), line};
}

std::vector<ForecastRecord> read_forecasts(std::istream& in) {
  std::vector<ForecastRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    out.push_back(parse_forecast_record(text, line));
  }
  return out;
}

std::vector<ForecastRecord> read_forecasts(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_forecasts(in);
}

std::string format_forecast_record(const ForecastRecord& record) {
  json j = form_to_json(record.forecast);
  j["id"] = record.id;
  j["y"] = record.target;
  return j.dump();
}

void write_forecasts(std::ostream& out, std::span<const ForecastRecord> records) {
  for (const auto& r : records) out << format_forecast_record(r) << '\n';
}

void write_forecasts(const std::filesystem::path& path, std::span<const ForecastRecord> records) {
  auto out = open_out(path);
  write_forecasts(out, records);
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Run records

std::vector<RunRecord> read_runs(std::istream& in) {
  std::string text;
  if (!std::getline(in, text)) throw Error(ErrorKind::ParseError, "run table is empty; expected header");
  strip_cr(text);
  if (text != kRunHeader) {
    throw Error(ErrorKind::ParseError, at_line(1, "expected header '" + std::string(kRunHeader) + "'"));
  }
  std::vector<RunRecord> out;
  std::map<RunKey, std::size_t> seen;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    strip_cr(text);
    if (blank(text)) continue;
    auto parsed = parse_run_line(text, line);
    if (parsed.problem) throw Error(*parsed.kind, at_line(line, parsed.problem->message));
    auto [it, inserted] = seen.emplace(key_of(*parsed.record), line);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateKey, at_line(line, "run " + describe(it->first) + " already given on line " +
                                                             std::to_string(it->second)));
    }
    out.push_back(std::move(*parsed.record));
  }
  return out;
}

std::vector<RunRecord> read_runs(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_runs(in);
}

void write_runs(std::ostream& out, std::span<const RunRecord> records) {
  out << kRunHeader << '\n';
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << r.model << ',' << r.dataset << ',' << r.fold << ',' << r.metric << ',' << buf << '\n';
  }
}

void write_runs(const std::filesystem::path& path, std::span<const RunRecord> records) {
  auto out = open_out(path);
  write_runs(out, records);
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Leaderboards

std::string format_fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

void write_leaderboard(std::ostream& out, std::span<const LeaderboardRow> rows, bool wide) {
  out << "Rank,Model,p-value,Observed,AverageRank";
  if (wide) out << ",p-value_full,Observed_full,AverageRank_full";
  out << '\n';
  char buf[64];
  for (const auto& r : rows) {
    out << r.rank << ',' << r.model << ',' << format_fixed3(r.p_value) << ',' << format_fixed3(r.observed) << ','
        << format_fixed3(r.average_rank);
    if (wide) {
      for (double v : {r.p_value, r.observed, r.average_rank}) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

void write_leaderboard(const std::filesystem::path& path, std::span<const LeaderboardRow> rows, bool wide) {
  auto out = open_out(path);
  write_leaderboard(out, rows, wide);
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_forecasts(std::istream& in) {
  ValidationReport report;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    ++report.records;
    try {
      const auto rec = parse_forecast_record(text, line);
      std::visit(
          [&](const auto& fc) {
            using T = std::decay_t<decltype(fc)>;
            if constexpr (std::is_same_v<T, HistogramForecastd>) {
              if (std::abs(fc.raw_mass() - 1.0) > kMassTolerance) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.9g", fc.raw_mass());
                report.violations.push_back({line, std::string("histogram mass sums to ") + buf});
              }
            } else if constexpr (std::is_same_v<T, QuantileForecastd>) {
              if (fc.crossings() > 0) {
                report.repaired_crossings += static_cast<std::size_t>(fc.crossings());
                report.violations.push_back(
                    {line, std::to_string(fc.crossings()) + " crossing quantile pair(s) repaired by sorting"});
              }
            }
          },
          rec.forecast);
    } catch (const Error& e) {
      report.violations.push_back({line, e.what()});
    }
  }
  return report;
}

ValidationReport validate_runs(std::istream& in) {
  ValidationReport report;
  std::string text;
  if (!std::getline(in, text)) {
    report.violations.push_back({0, "run table is empty; expected header"});
    return report;
  }
  strip_cr(text);
  if (text != kRunHeader) {
    report.violations.push_back({1, "expected header '" + std::string(kRunHeader) + "'"});
  }
  std::map<RunKey, std::size_t> seen;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    strip_cr(text);
    if (blank(text)) continue;
    ++report.records;
    auto parsed = parse_run_line(text, line);
    if (parsed.problem) {
      report.violations.push_back(*parsed.problem);
      continue;
    }
    auto [it, inserted] = seen.emplace(key_of(*parsed.record), line);
    if (!inserted) {
      report.violations.push_back(
          {line, "duplicate run " + describe(it->first) + " (first on line " + std::to_string(it->second) + ")"});
    }
  }
  return report;
}

}  // namespace propscore
