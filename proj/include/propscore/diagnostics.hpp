#pragma once

// Batch-level calibration and concentration diagnostics.

#include <cmath>
#include <map>
#include <span>

#include "propscore/error.hpp"
#include "propscore/forecast.hpp"
#include "propscore/scoring.hpp"

namespace propscore {

template <typename Scalar>
VectorX<Scalar> predictive_stddevs(std::span<const DiscreteForecast<Scalar>> batch) {
  VectorX<Scalar> s(static_cast<Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) s(static_cast<Index>(i)) = stddev(batch[i]);
  return s;
}

/// Mean predictive standard deviation.
template <typename Scalar>
Scalar sharpness(std::span<const DiscreteForecast<Scalar>> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "sharpness of an empty batch");
  return predictive_stddevs(batch).mean();
}

/// Population standard deviation (1/N) of the predictive standard deviations.
template <typename Scalar>
Scalar dispersion(std::span<const DiscreteForecast<Scalar>> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "dispersion of an empty batch");
  const auto s = predictive_stddevs(batch);
  const Scalar centered = (s.array() - s.mean()).square().mean();
  return std::sqrt(std::max(centered, Scalar(0)));
}

/// Whether l <= y <= u for the central interval at the given nominal level.
template <typename Scalar>
bool covers(const DiscreteForecast<Scalar>& f, Scalar y, Scalar level) {
  if (!(level > Scalar(0) && level < Scalar(1))) {
    throw Error(ErrorKind::InvalidLevel, "coverage level must lie in (0, 1)");
  }
  const auto [l, u] = central_interval(f, Scalar(1) - level);
  return l <= y && y <= u;
}

/// Fraction of observations inside their forecast's central interval,
/// boundaries included.
template <typename Scalar>
Scalar coverage(std::span<const DiscreteForecast<Scalar>> forecasts, std::span<const Scalar> targets,
                Scalar level) {
  if (forecasts.empty()) throw Error(ErrorKind::EmptyBatch, "coverage of an empty batch");
  if (forecasts.size() != targets.size()) {
    throw Error(ErrorKind::InvalidValue, "forecast and target batches differ in length");
  }
  std::size_t inside = 0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) inside += covers(forecasts[i], targets[i], level) ? 1 : 0;
  return Scalar(inside) / Scalar(forecasts.size());
}

template <typename Scalar>
struct CalibrationReport {
  Scalar sharpness{};
  Scalar dispersion{};
  std::map<Scalar, Scalar> coverage;
};

template <typename Scalar>
CalibrationReport<Scalar> calibration_report(std::span<const DiscreteForecast<Scalar>> forecasts,
                                             std::span<const Scalar> targets, std::span<const Scalar> levels) {
  CalibrationReport<Scalar> r;
  r.sharpness = sharpness(forecasts);
  r.dispersion = dispersion(forecasts);
  for (auto level : levels) r.coverage[level] = coverage(forecasts, targets, level);
  return r;
}

}  // namespace propscore
