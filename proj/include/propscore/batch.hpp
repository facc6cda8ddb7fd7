#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propscore/io.hpp"
#include "propscore/metric.hpp"

namespace propscore {

/// Point functional used for the point metrics.
enum class PointFunctional { median, mean };

struct BatchOptions {
  PointFunctional absolute_functional = PointFunctional::median;
  PointFunctional squared_functional = PointFunctional::mean;
};

struct ScoreResult {
  std::string metric;
  /// Absent where the metric is undefined for a record (e.g. log score of a
  /// sample forecast) or only exists at batch level.
  std::vector<std::optional<double>> per_instance;
  /// Mean of the present per-instance values, or the batch-level value.
  std::optional<double> value;
};

struct BatchScores {
  std::vector<std::string> ids;
  std::vector<double> targets;
  std::vector<ScoreResult> results;
  std::vector<std::string> warnings;
};

/// Scores every record with every metric. Quantile and sample forecasts are
/// converted to point masses; histogram-only metrics use the quantile to
/// histogram conversion for quantile records and stay absent for samples.
/// Brier values for observations outside the histogram are left absent
/// with a warning. Throws EmptyBatch on no records.
BatchScores score_batch(std::span<const ForecastRecord> records, std::span<const MetricSpec> specs,
                        const BatchOptions& options = {});

/// CSV with columns id,y,<metric...>; a final row with id "mean" carries the
/// batch values. Absent cells are empty.
void write_score_table(std::ostream& out, const BatchScores& scores);

}  // namespace propscore
