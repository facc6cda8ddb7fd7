#pragma once

// Text formats:
//   forecast records  one JSON object per line:
//                     {"id": "a", "y": 1.5, "type": "histogram", "edges": [...], "probs": [...]}
//                     {"id": "b", "y": 0.2, "type": "quantiles", "levels": [...], "values": [...]}
//                     {"id": "c", "y": 3.0, "type": "samples", "values": [...]}
//                     The form may also be nested under "forecast", or keyed by
//                     its type name ({"histogram": {"edges": ..., "probs": ...}}).
//   run records       CSV with header model,dataset,fold,metric,value
//   leaderboards      CSV with header Rank,Model,p-value,Observed,AverageRank

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "propscore/forecast.hpp"
#include "propscore/ranking.hpp"

namespace propscore {

using RawForecast = std::variant<HistogramForecastd, QuantileForecastd, SampleForecastd>;

struct ForecastRecord {
  std::string id;
  double target = 0.0;
  RawForecast forecast;
  /// 1-based source line, 0 when built in memory.
  std::size_t line = 0;
};

/// Parses one record. Errors carry the line number.
ForecastRecord parse_forecast_record(std::string_view text, std::size_t line);

/// Reads every non-blank line as a record.
std::vector<ForecastRecord> read_forecasts(std::istream& in);
std::vector<ForecastRecord> read_forecasts(const std::filesystem::path& path);

std::string format_forecast_record(const ForecastRecord& record);
void write_forecasts(std::ostream& out, std::span<const ForecastRecord> records);
void write_forecasts(const std::filesystem::path& path, std::span<const ForecastRecord> records);

/// Reads a run table. Throws DuplicateKey on a repeated
/// (model, dataset, fold, metric) and InvalidValue on non-finite values.
std::vector<RunRecord> read_runs(std::istream& in);
std::vector<RunRecord> read_runs(const std::filesystem::path& path);

/// Values are printed with 17 significant digits so they read back exactly.
void write_runs(std::ostream& out, std::span<const RunRecord> records);
void write_runs(const std::filesystem::path& path, std::span<const RunRecord> records);

/// Fixed three-decimal rendering used in leaderboards ("%.3f", so exact
/// binary ties round to even).
std::string format_fixed3(double value);

/// Writes the leaderboard table. With `wide`, three more columns carry the
/// p-value, observed mean and average rank at full precision.
void write_leaderboard(std::ostream& out, std::span<const LeaderboardRow> rows, bool wide = false);
void write_leaderboard(const std::filesystem::path& path, std::span<const LeaderboardRow> rows, bool wide = false);

struct Violation {
  std::size_t line = 0;
  std::string message;
};

struct ValidationReport {
  std::size_t records = 0;
  std::size_t repaired_crossings = 0;
  std::vector<Violation> violations;

  bool clean() const { return violations.empty(); }
};

/// Probability masses further than this from one are reported by validation.
inline constexpr double kMassTolerance = 1e-6;

/// Collects every problem instead of stopping at the first one.
ValidationReport validate_forecasts(std::istream& in);
ValidationReport validate_runs(std::istream& in);

}  // namespace propscore
