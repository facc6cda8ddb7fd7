#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace propscore {

enum class Orientation { lower_better, higher_better };

enum class MetricKind {
  mae,
  rmse,
  r2,
  crps,
  crls,
  log_score,
  brier_score,
  energy_score,
  wcrps,
  interval_score,
  sharpness,
  dispersion,
  coverage,
};

/// Weight functions for the weighted CRPS, applied to z = (x - location) / scale:
/// left = 1 - Phi(z), right = Phi(z), center = phi(z), unit = 1.
enum class WeightKind { left, right, center, unit };

struct MetricSpec {
  std::string name;
  MetricKind kind = MetricKind::crps;
  Orientation orientation = Orientation::lower_better;
  /// Mass outside the central interval (interval_score, coverage).
  double alpha = 0.1;
  /// Energy-score exponent, in (0, 2].
  double beta = 1.0;
  WeightKind weight = WeightKind::unit;
  /// wCRPS reference location and scale; the batch scorer falls back to the
  /// target mean and standard deviation when unset.
  std::optional<double> weight_location;
  std::optional<double> weight_scale;

  /// Whether the batch value is the mean of per-instance values. rmse, r2
  /// and dispersion only exist at batch level.
  bool per_instance() const;
  /// log_score and brier_score are defined on histograms only.
  bool needs_histogram() const;
};

/// Parses a metric identifier such as "crps", "energy_score_beta_0.5",
/// "wcrps_left" or "interval_score_90". The bare names "interval_score" and
/// "coverage" take their level from default_alpha, "energy_score" its
/// exponent from default_beta. Throws UnknownMetric.
MetricSpec parse_metric(std::string_view id, double default_alpha = 0.1, double default_beta = 1.0);

/// The canonical identifiers listed in help and error messages.
const std::vector<std::string>& metric_identifiers();

/// Orientation of a known identifier; unknown names are treated as losses.
Orientation orientation_of(std::string_view id);

}  // namespace propscore
