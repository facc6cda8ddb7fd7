#include "propscore/batch.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "propscore/diagnostics.hpp"
#include "propscore/error.hpp"
#include "propscore/scoring.hpp"

namespace propscore {

namespace {

struct Prepared {
  std::vector<DiscreteForecastd> discrete;
  std::vector<std::optional<HistogramForecastd>> histogram;
  std::vector<double> targets;
  std::size_t from_quantiles = 0;
  std::size_t without_histogram = 0;
  std::size_t repaired_crossings = 0;
};

Prepared prepare(std::span<const ForecastRecord> records) {
  Prepared p;
  for (const auto& r : records) {
    p.targets.push_back(r.target);
    std::visit(
        [&](const auto& fc) {
          using T = std::decay_t<decltype(fc)>;
          if constexpr (std::is_same_v<T, HistogramForecastd>) {
            p.discrete.push_back(histogram_to_discrete(fc));
            p.histogram.emplace_back(fc);
          } else if constexpr (std::is_same_v<T, QuantileForecastd>) {
            p.repaired_crossings += static_cast<std::size_t>(fc.crossings());
            p.discrete.push_back(quantiles_to_discrete(fc));
            if (fc.size() >= 2) {
              p.histogram.emplace_back(quantiles_to_histogram(fc));
              ++p.from_quantiles;
            } else {
              p.histogram.emplace_back(std::nullopt);
              ++p.without_histogram;
            }
          } else {
            p.discrete.push_back(samples_to_discrete(fc));
            p.histogram.emplace_back(std::nullopt);
            ++p.without_histogram;
          }
        },
        r.forecast);
  }
  return p;
}

double point_prediction(const DiscreteForecastd& f, PointFunctional functional) {
  return functional == PointFunctional::median ? quantile(f, 0.5) : mean(f);
}

std::optional<double> mean_present(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string with_record(std::size_t index, const ForecastRecord& r, const std::string& message) {
  std::string where = "record " + std::to_string(index);
  if (r.line > 0) where += " (line " + std::to_string(r.line) + ")";
  return where + ": " + message;
}

}  // namespace

BatchScores score_batch(std::span<const ForecastRecord> records, std::span<const MetricSpec> specs,
                        const BatchOptions& options) {
  if (records.empty()) throw Error(ErrorKind::EmptyBatch, "no forecast records to score");
  const auto prepared = prepare(records);
  const auto n = records.size();
  const std::span<const DiscreteForecastd> forecasts(prepared.discrete);
  const std::span<const double> targets(prepared.targets);

  BatchScores out;
  for (const auto& r : records) out.ids.push_back(r.id);
  out.targets = prepared.targets;
  if (prepared.repaired_crossings > 0) {
    out.warnings.push_back(std::to_string(prepared.repaired_crossings) +
                           " crossing quantile pair(s) repaired by sorting");
  }

  bool uses_histogram = false;
  for (const auto& s : specs) uses_histogram = uses_histogram || s.needs_histogram();
  if (uses_histogram && prepared.from_quantiles > 0) {
    out.warnings.push_back("log_score/brier_score for " + std::to_string(prepared.from_quantiles) +
                           " quantile record(s) use the quantile-to-histogram conversion");
  }
  if (uses_histogram && prepared.without_histogram > 0) {
    out.warnings.push_back("log_score/brier_score undefined for " +
                           std::to_string(prepared.without_histogram) + " record(s) without a histogram");
  }

  // Reference for wCRPS weights: batch target mean and population std.
  const double y_mean = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Index>(n)).mean();
  double y_var = 0.0;
  for (double y : targets) y_var += (y - y_mean) * (y - y_mean);
  const double y_std = std::sqrt(y_var / static_cast<double>(n));

  std::vector<double> abs_preds(n);
  std::vector<double> sq_preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    abs_preds[i] = point_prediction(forecasts[i], options.absolute_functional);
    sq_preds[i] = point_prediction(forecasts[i], options.squared_functional);
  }

  for (const auto& spec : specs) {
    ScoreResult res;
    res.metric = spec.name;
    res.per_instance.assign(n, std::nullopt);
    std::size_t outside = 0;
    const double loc = spec.weight_location.value_or(y_mean);
    const double scale = spec.weight_scale.value_or(y_std);
    if (spec.kind == MetricKind::wcrps && !(scale > 0.0)) {
      throw Error(ErrorKind::InvalidScale,
                  "wCRPS reference scale is zero (constant targets); pass an explicit weight reference");
    }

    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = forecasts[i];
      const double y = targets[i];
      auto& cell = res.per_instance[i];
      try {
        switch (spec.kind) {
          case MetricKind::mae: cell = std::abs(y - abs_preds[i]); break;
          case MetricKind::crps: cell = crps(f, y); break;
          case MetricKind::crls: cell = crls(f, y); break;
          case MetricKind::energy_score: cell = energy_score(f, y, spec.beta); break;
          case MetricKind::wcrps: cell = wcrps(f, y, spec.weight, loc, scale); break;
          case MetricKind::interval_score: cell = interval_score(f, y, spec.alpha); break;
          case MetricKind::sharpness: cell = stddev(f); break;
          case MetricKind::coverage: cell = covers(f, y, 1.0 - spec.alpha) ? 1.0 : 0.0; break;
          case MetricKind::log_score:
            if (prepared.histogram[i]) cell = log_score(*prepared.histogram[i], y);
            break;
          case MetricKind::brier_score:
            if (prepared.histogram[i]) {
              if (prepared.histogram[i]->bin_of(y) < 0) {
                ++outside;
              } else {
                cell = brier(*prepared.histogram[i], y);
              }
            }
            break;
          case MetricKind::rmse:
          case MetricKind::r2:
          case MetricKind::dispersion:
            break;
        }
      } catch (const Error& e) {
        throw Error(e.kind(), with_record(i, records[i], e.what()));
      }
    }

    switch (spec.kind) {
      case MetricKind::rmse:
      case MetricKind::r2: {
        const auto pm = point_metrics<double>(abs_preds, sq_preds, targets);
        if (spec.kind == MetricKind::rmse) {
          res.value = pm.rmse;
        } else {
          res.value = pm.r2;
          if (!pm.r2) out.warnings.push_back("r2 undefined: targets have zero variance");
        }
        break;
      }
      case MetricKind::dispersion:
        res.value = dispersion(forecasts);
        break;
      default:
        res.value = mean_present(res.per_instance);
        break;
    }
    if (outside > 0) {
      out.warnings.push_back(spec.name + ": " + std::to_string(outside) +
                             " observation(s) outside the histogram support left unscored");
    }
    out.results.push_back(std::move(res));
  }
  return out;
}

void write_score_table(std::ostream& out, const BatchScores& scores) {
  char buf[64];
  const auto cell = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "";
    std::snprintf(buf, sizeof buf, "%.17g", *v + 0.0);  // no "-0"
    return buf;
  };
  out << "id,y";
  for (const auto& r : scores.results) out << ',' << r.metric;
  out << '\n';
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    out << scores.ids[i] << ',' << cell(scores.targets[i]);
    for (const auto& r : scores.results) out << ',' << cell(r.per_instance[i]);
    out << '\n';
  }
  out << "mean,";
  for (const auto& r : scores.results) out << ',' << cell(r.value);
  out << '\n';
}

}  // namespace propscore
