#pragma once

// Proper scoring rules and point metrics for a single (forecast, observation)
// pair. All rules are negatively oriented: lower is better.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "propscore/error.hpp"
#include "propscore/forecast.hpp"
#include "propscore/metric.hpp"

namespace propscore {

/// Floor applied to |F(x) + 1{y <= x} - 1| inside the CRLS integrand.
inline constexpr double kCrlsFloor = 1e-12;
/// Floor applied to the bin probability inside the log score.
inline constexpr double kLogScoreFloor = 1e-12;

namespace detail {

/// Walks the pieces of the real line on which both the step CDF of f and
/// the indicator 1{x >= y} are constant, restricted to the hull of the
/// support and y (outside it the two agree). Calls
/// fn(a, b, lower, upper, above) for each piece [a, b), where lower = F(x),
/// upper = 1 - F(x) (as a tail sum, exact zero past the last atom) and
/// above = (x >= y).
template <typename Scalar, typename Fn>
void for_each_piece(const DiscreteForecast<Scalar>& f, Scalar y, Fn&& fn) {
  const auto& x = f.points();
  const auto& p = f.probs();
  const Index n = f.size();

  std::vector<Scalar> tail(static_cast<std::size_t>(n) + 1, Scalar(0));
  for (Index j = n - 1; j >= 0; --j) tail[j] = tail[j + 1] + p(j);

  Index j = 0;
  bool y_done = false;
  Scalar lower(0);
  Scalar pos;
  // Position the walk at the leftmost breakpoint.
  if (y < x(0)) {
    pos = y;
    y_done = true;
  } else {
    pos = x(0);
  }
  while (true) {
    while (j < n && x(j) <= pos) lower += p(j++);
    if (!y_done && y <= pos) y_done = true;
    Scalar next;
    if (j < n && !y_done) next = std::min(x(j), y);
    else if (j < n) next = x(j);
    else if (!y_done) next = y;
    else break;
    fn(pos, next, lower, tail[j], y <= pos);
    pos = next;
  }
}

template <typename Scalar>
Scalar std_normal_cdf(Scalar z) {
  return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
Scalar std_normal_pdf(Scalar z) {
  return std::exp(Scalar(-0.5) * z * z) * std::numbers::inv_sqrtpi_v<Scalar> / std::numbers::sqrt2_v<Scalar>;
}

/// Antiderivative in z of the weight function, so that
/// int_a^b w((x - loc) / scale) dx = scale * (G(z_b) - G(z_a)).
template <typename Scalar>
Scalar weight_antiderivative(WeightKind kind, Scalar z) {
  switch (kind) {
    case WeightKind::unit:
      return z;
    case WeightKind::right:
      return z * std_normal_cdf(z) + std_normal_pdf(z);
    case WeightKind::left:
      return z * std_normal_cdf(-z) - std_normal_pdf(z);
    case WeightKind::center:
      return std_normal_cdf(z);
  }
  return z;
}

}  // namespace detail

/// Weight value w(z) for the given kind.
template <typename Scalar>
Scalar weight_function(WeightKind kind, Scalar z) {
  switch (kind) {
    case WeightKind::unit: return Scalar(1);
    case WeightKind::right: return detail::std_normal_cdf(z);
    case WeightKind::left: return detail::std_normal_cdf(-z);
    case WeightKind::center: return detail::std_normal_pdf(z);
  }
  return Scalar(1);
}

/// CRPS: integral of (F(x) - 1{x >= y})^2, exact for a step CDF.
template <typename Scalar>
Scalar crps(const DiscreteForecast<Scalar>& f, Scalar y) {
  Scalar total(0);
  detail::for_each_piece(f, y, [&](Scalar a, Scalar b, Scalar lower, Scalar upper, bool above) {
    const Scalar d = above ? upper : lower;
    total += d * d * (b - a);
  });
  return total;
}

/// CRLS: integral of -log|F(x) + 1{y <= x} - 1|, with the absolute value
/// floored at kCrlsFloor so observations outside the predicted support get
/// a large finite penalty.
template <typename Scalar>
Scalar crls(const DiscreteForecast<Scalar>& f, Scalar y) {
  const Scalar floor(kCrlsFloor);
  Scalar total(0);
  detail::for_each_piece(f, y, [&](Scalar a, Scalar b, Scalar lower, Scalar upper, bool above) {
    const Scalar d = above ? lower : upper;
    total -= std::log(std::max(d, floor)) * (b - a);
  });
  return total;
}

/// Weighted CRPS with weight w((x - location) / scale). Each constant piece
/// of the squared term is multiplied by the closed-form integral of w.
template <typename Scalar>
Scalar wcrps(const DiscreteForecast<Scalar>& f, Scalar y, WeightKind kind, Scalar location, Scalar scale) {
  if (!(scale > Scalar(0)) || !std::isfinite(scale)) {
    throw Error(ErrorKind::InvalidScale, "wCRPS reference scale must be positive");
  }
  if (kind == WeightKind::unit) return crps(f, y);
  Scalar total(0);
  detail::for_each_piece(f, y, [&](Scalar a, Scalar b, Scalar lower, Scalar upper, bool above) {
    const Scalar d = above ? upper : lower;
    if (d == Scalar(0)) return;
    const Scalar za = (a - location) / scale;
    const Scalar zb = (b - location) / scale;
    const Scalar mass =
        scale * (detail::weight_antiderivative(kind, zb) - detail::weight_antiderivative(kind, za));
    total += d * d * std::max(mass, Scalar(0));
  });
  return total;
}

/// Energy score E|X - y|^beta - E|X - X'|^beta / 2 by the exact double sum.
template <typename Scalar>
Scalar energy_score(const DiscreteForecast<Scalar>& f, Scalar y, Scalar beta) {
  if (!(beta > Scalar(0) && beta <= Scalar(2))) {
    throw Error(ErrorKind::InvalidBeta, "energy score exponent must lie in (0, 2]");
  }
  const auto power = [beta](Scalar d) {
    if (beta == Scalar(1)) return d;
    if (beta == Scalar(2)) return d * d;
    return std::pow(d, beta);
  };
  const auto& x = f.points();
  const auto& p = f.probs();
  const Index n = f.size();
  Scalar to_obs(0);
  Scalar spread(0);
  for (Index j = 0; j < n; ++j) {
    to_obs += p(j) * power(std::abs(x(j) - y));
    Scalar row(0);
    for (Index k = j + 1; k < n; ++k) row += p(k) * power(x(k) - x(j));
    spread += p(j) * row;
  }
  // Off-diagonal pairs appear twice in the full double sum; the half cancels.
  return to_obs - spread;
}

/// Central (1 - alpha) interval [l, u] from the generalized inverse.
template <typename Scalar>
std::pair<Scalar, Scalar> central_interval(const DiscreteForecast<Scalar>& f, Scalar alpha) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw Error(ErrorKind::InvalidLevel, "interval alpha must lie in (0, 1)");
  }
  return {quantile(f, alpha / Scalar(2)), quantile(f, Scalar(1) - alpha / Scalar(2))};
}

template <typename Scalar>
Scalar interval_score(Scalar lower, Scalar upper, Scalar y, Scalar alpha) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw Error(ErrorKind::InvalidLevel, "interval alpha must lie in (0, 1)");
  }
  Scalar s = upper - lower;
  if (y < lower) s += Scalar(2) / alpha * (lower - y);
  if (y > upper) s += Scalar(2) / alpha * (y - upper);
  return s;
}

template <typename Scalar>
Scalar interval_score(const DiscreteForecast<Scalar>& f, Scalar y, Scalar alpha) {
  const auto [l, u] = central_interval(f, alpha);
  return interval_score(l, u, y, alpha);
}

/// Negative log density of a histogram at y. Observations outside the
/// histogram use the floor probability over the nearest bin's width.
template <typename Scalar>
Scalar log_score(const HistogramForecast<Scalar>& h, Scalar y) {
  const Scalar floor(kLogScoreFloor);
  Index k = h.bin_of(y);
  Scalar p = floor;
  if (k >= 0) {
    p = std::max(h.probs()(k), floor);
  } else {
    k = y < h.lower() ? 0 : h.bins() - 1;
  }
  return -std::log(p / h.width(k));
}

/// Sum over bins of (p_k - 1{k = bin of y})^2. Throws OutsideSupport when y
/// falls outside every bin.
template <typename Scalar>
Scalar brier(const HistogramForecast<Scalar>& h, Scalar y) {
  const Index hit = h.bin_of(y);
  if (hit < 0) {
    throw Error(ErrorKind::OutsideSupport, "Brier score needs the observation inside the histogram");
  }
  Scalar s = h.probs().squaredNorm();
  const Scalar p = h.probs()(hit);
  return s - p * p + (Scalar(1) - p) * (Scalar(1) - p);
}

template <typename Scalar>
struct PointMetrics {
  Scalar mae{};
  Scalar rmse{};
  /// Absent when the targets have zero variance.
  std::optional<Scalar> r2;
};

/// MAE of `absolute_preds`, RMSE and R^2 of `squared_preds` (by default the
/// forecast median and mean, the Bayes actions of each loss).
template <typename Scalar>
PointMetrics<Scalar> point_metrics(std::span<const Scalar> absolute_preds, std::span<const Scalar> squared_preds,
                                   std::span<const Scalar> targets) {
  const auto n = targets.size();
  if (n == 0) throw Error(ErrorKind::EmptyBatch, "point metrics need at least one target");
  if (absolute_preds.size() != n || squared_preds.size() != n) {
    throw Error(ErrorKind::InvalidValue, "prediction and target batches differ in length");
  }
  Scalar abs_sum(0);
  Scalar sq_sum(0);
  Scalar y_mean(0);
  for (std::size_t i = 0; i < n; ++i) {
    abs_sum += std::abs(targets[i] - absolute_preds[i]);
    const Scalar e = targets[i] - squared_preds[i];
    sq_sum += e * e;
    y_mean += targets[i];
  }
  y_mean /= Scalar(n);
  Scalar total(0);
  for (auto y : targets) total += (y - y_mean) * (y - y_mean);

  PointMetrics<Scalar> out;
  out.mae = abs_sum / Scalar(n);
  out.rmse = std::sqrt(sq_sum / Scalar(n));
  if (total > Scalar(0)) out.r2 = Scalar(1) - sq_sum / total;
  return out;
}

}  // namespace propscore
