#pragma once

// Predictive distributions in the three shapes models emit (histogram PMF,
// quantile set, samples) and the point-mass form every scoring rule runs on.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "propscore/error.hpp"

namespace propscore {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

namespace detail {

template <typename Scalar>
bool all_finite(const VectorX<Scalar>& v) {
  return std::all_of(v.begin(), v.end(), [](Scalar x) { return std::isfinite(x); });
}

template <typename Scalar>
bool strictly_ascending(const VectorX<Scalar>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](Scalar a, Scalar b) { return !(a < b); }) ==
         v.end();
}

template <typename Scalar>
VectorX<Scalar> to_vector(std::span<const Scalar> xs) {
  VectorX<Scalar> v(static_cast<Index>(xs.size()));
  std::copy(xs.begin(), xs.end(), v.begin());
  return v;
}

/// Divides by the total unless it is already one up to summation rounding,
/// so normalized input passes through bit-for-bit.
template <typename Scalar>
void normalize(VectorX<Scalar>& probs, Scalar total) {
  const Scalar slack = Scalar(probs.size()) * std::numeric_limits<Scalar>::epsilon();
  if (std::abs(total - Scalar(1)) > slack) probs /= total;
}

}  // namespace detail

/// Point masses on an ascending support. This is the canonical form for
/// CRPS, CRLS, energy, wCRPS, interval scores and moments.
template <typename Scalar>
class DiscreteForecast {
 public:
  using Vector = VectorX<Scalar>;

  /// Points must be strictly ascending and probabilities positive; the
  /// probabilities are rescaled to sum to one.
  DiscreteForecast(Vector points, Vector probs) : points_(std::move(points)), probs_(std::move(probs)) {
    if (points_.size() == 0 || points_.size() != probs_.size()) {
      throw Error(ErrorKind::InvalidForecast, "discrete forecast needs matching, nonempty points and probs");
    }
    if (!detail::all_finite(points_) || !detail::strictly_ascending(points_)) {
      throw Error(ErrorKind::InvalidForecast, "discrete forecast points must be finite and strictly ascending");
    }
    if (!detail::all_finite(probs_) || (probs_.array() <= Scalar(0)).any()) {
      throw Error(ErrorKind::InvalidForecast, "discrete forecast probabilities must be positive");
    }
    detail::normalize(probs_, probs_.sum());
  }

  static DiscreteForecast point_mass(Scalar x) {
    return DiscreteForecast(Vector::Constant(1, x), Vector::Ones(1));
  }

  /// Builds a forecast from unordered atoms: sorts, merges equal points and
  /// drops zero-mass atoms.
  static DiscreteForecast from_atoms(std::span<const Scalar> points, std::span<const Scalar> probs) {
    if (points.size() != probs.size()) {
      throw Error(ErrorKind::InvalidForecast, "atom points and probs differ in length");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return points[a] < points[b]; });
    std::vector<Scalar> xs;
    std::vector<Scalar> ps;
    for (auto i : order) {
      if (probs[i] < Scalar(0) || !std::isfinite(probs[i])) {
        throw Error(ErrorKind::InvalidForecast, "atom probability must be finite and nonnegative");
      }
      if (probs[i] == Scalar(0)) continue;
      if (!xs.empty() && xs.back() == points[i]) {
        ps.back() += probs[i];
      } else {
        xs.push_back(points[i]);
        ps.push_back(probs[i]);
      }
    }
    return DiscreteForecast(detail::to_vector<Scalar>(xs), detail::to_vector<Scalar>(ps));
  }

  const Vector& points() const noexcept { return points_; }
  const Vector& probs() const noexcept { return probs_; }
  Index size() const noexcept { return points_.size(); }
  Scalar min() const { return points_(0); }
  Scalar max() const { return points_(points_.size() - 1); }

 private:
  Vector points_;
  Vector probs_;
};

/// Bin edges plus bin probabilities. Needed by the log score (density
/// p_k / w_k) and the Brier score (one-hot over bins).
template <typename Scalar>
class HistogramForecast {
 public:
  using Vector = VectorX<Scalar>;

  HistogramForecast(Vector edges, Vector probs) : edges_(std::move(edges)), probs_(std::move(probs)) {
    if (probs_.size() == 0 || edges_.size() != probs_.size() + 1) {
      throw Error(ErrorKind::InvalidForecast, "histogram needs K >= 1 probs and K+1 edges");
    }
    if (!detail::all_finite(edges_) || !detail::strictly_ascending(edges_)) {
      throw Error(ErrorKind::InvalidForecast, "histogram edges must be finite and strictly ascending");
    }
    if (!detail::all_finite(probs_) || (probs_.array() < Scalar(0)).any()) {
      throw Error(ErrorKind::InvalidForecast, "histogram probabilities must be finite and nonnegative");
    }
    raw_mass_ = probs_.sum();
    if (!(raw_mass_ > Scalar(0))) {
      throw Error(ErrorKind::InvalidForecast, "histogram carries no probability mass");
    }
    detail::normalize(probs_, raw_mass_);
  }

  const Vector& edges() const noexcept { return edges_; }
  const Vector& probs() const noexcept { return probs_; }
  Index bins() const noexcept { return probs_.size(); }
  Scalar width(Index k) const { return edges_(k + 1) - edges_(k); }
  Scalar lower() const { return edges_(0); }
  Scalar upper() const { return edges_(edges_.size() - 1); }

  /// Probability mass before normalization.
  Scalar raw_mass() const noexcept { return raw_mass_; }

  /// Bin containing y: bins are [e_k, e_{k+1}) except the last, which is
  /// closed. Returns -1 outside [lower(), upper()].
  Index bin_of(Scalar y) const {
    if (!(y >= lower()) || !(y <= upper())) return -1;
    if (y == upper()) return bins() - 1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
    return static_cast<Index>(it - edges_.begin()) - 1;
  }

 private:
  Vector edges_;
  Vector probs_;
  Scalar raw_mass_{};
};

/// Quantile levels with their values. Crossing values are repaired by
/// sorting on construction; crossings() reports how many adjacent pairs
/// were out of order.
template <typename Scalar>
class QuantileForecast {
 public:
  using Vector = VectorX<Scalar>;

  QuantileForecast(Vector levels, Vector values) : levels_(std::move(levels)), values_(std::move(values)) {
    if (levels_.size() == 0 || levels_.size() != values_.size()) {
      throw Error(ErrorKind::InvalidForecast, "quantile forecast needs matching, nonempty levels and values");
    }
    if (!detail::all_finite(levels_) || !detail::strictly_ascending(levels_) || !(levels_(0) > Scalar(0)) ||
        !(levels_(levels_.size() - 1) < Scalar(1))) {
      throw Error(ErrorKind::InvalidForecast, "quantile levels must be strictly ascending inside (0, 1)");
    }
    if (!detail::all_finite(values_)) {
      throw Error(ErrorKind::InvalidForecast, "quantile values must be finite");
    }
    for (Index j = 1; j < values_.size(); ++j) {
      if (values_(j) < values_(j - 1)) ++crossings_;
    }
    if (crossings_ > 0) std::sort(values_.begin(), values_.end());
  }

  const Vector& levels() const noexcept { return levels_; }
  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return levels_.size(); }
  Index crossings() const noexcept { return crossings_; }

 private:
  Vector levels_;
  Vector values_;
  Index crossings_ = 0;
};

template <typename Scalar>
class SampleForecast {
 public:
  using Vector = VectorX<Scalar>;

  explicit SampleForecast(Vector values) : values_(std::move(values)) {
    if (values_.size() == 0 || !detail::all_finite(values_)) {
      throw Error(ErrorKind::InvalidForecast, "sample forecast needs at least one finite value");
    }
  }

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }

 private:
  Vector values_;
};

using DiscreteForecastd = DiscreteForecast<double>;
using HistogramForecastd = HistogramForecast<double>;
using QuantileForecastd = QuantileForecast<double>;
using SampleForecastd = SampleForecast<double>;

// ---------------------------------------------------------------------------
// Conversions

/// One atom per nonempty bin, at the bin center.
template <typename Scalar>
DiscreteForecast<Scalar> histogram_to_discrete(const HistogramForecast<Scalar>& h) {
  const auto& e = h.edges();
  std::vector<Scalar> xs;
  std::vector<Scalar> ps;
  for (Index k = 0; k < h.bins(); ++k) {
    if (h.probs()(k) > Scalar(0)) {
      xs.push_back((e(k) + e(k + 1)) / Scalar(2));
      ps.push_back(h.probs()(k));
    }
  }
  return DiscreteForecast<Scalar>(detail::to_vector<Scalar>(xs), detail::to_vector<Scalar>(ps));
}

/// Each quantile value becomes an atom carrying the slice of (0, 1) closest
/// to its level (midpoint partition of the level axis).
template <typename Scalar>
DiscreteForecast<Scalar> quantiles_to_discrete(const QuantileForecast<Scalar>& q) {
  const auto& lv = q.levels();
  const auto& v = q.values();
  const Index m = q.size();
  if (m == 1) return DiscreteForecast<Scalar>::point_mass(v(0));

  std::vector<Scalar> xs;
  std::vector<Scalar> ps;
  for (Index j = 0; j < m; ++j) {
    Scalar p;
    if (j == 0) {
      p = (lv(0) + lv(1)) / Scalar(2);
    } else if (j == m - 1) {
      p = Scalar(1) - (lv(m - 2) + lv(m - 1)) / Scalar(2);
    } else {
      p = (lv(j + 1) - lv(j - 1)) / Scalar(2);
    }
    if (!xs.empty() && xs.back() == v(j)) {
      ps.back() += p;
    } else {
      xs.push_back(v(j));
      ps.push_back(p);
    }
  }
  return DiscreteForecast<Scalar>(detail::to_vector<Scalar>(xs), detail::to_vector<Scalar>(ps));
}

/// Half-width used to open up a zero-width bin around a repeated quantile
/// value.
template <typename Scalar>
Scalar zero_width_epsilon(Scalar value) {
  return std::max(Scalar(1e-9), Scalar(1e-9) * std::abs(value));
}

/// Quantile values become bin edges and level gaps become bin masses. The
/// mass below the first and above the last level is dropped and the rest
/// renormalized. Runs of equal values collapse into one bin of half-width
/// zero_width_epsilon() centered on the value.
template <typename Scalar>
HistogramForecast<Scalar> quantiles_to_histogram(const QuantileForecast<Scalar>& q) {
  const Index m = q.size();
  if (m < 2) {
    throw Error(ErrorKind::NotConvertible, "a histogram needs at least two quantiles");
  }
  const auto& lv = q.levels();
  const auto& v = q.values();

  // Distinct values, the mass of each gap between them, and the mass of the
  // zero-width bins that sit on each distinct value.
  std::vector<Scalar> distinct{v(0)};
  std::vector<Scalar> atom_mass{Scalar(0)};
  std::vector<Scalar> gap_mass;
  for (Index k = 0; k + 1 < m; ++k) {
    const Scalar mass = lv(k + 1) - lv(k);
    if (v(k + 1) == v(k)) {
      atom_mass.back() += mass;
    } else {
      gap_mass.push_back(mass);
      distinct.push_back(v(k + 1));
      atom_mass.push_back(Scalar(0));
    }
  }

  const auto g_count = distinct.size();
  std::vector<Scalar> edges;
  std::vector<Scalar> probs;
  for (std::size_t g = 0; g < g_count; ++g) {
    const Scalar u = distinct[g];
    if (g > 0) probs.push_back(gap_mass[g - 1]);
    if (atom_mass[g] > Scalar(0)) {
      Scalar eps = zero_width_epsilon(u);
      if (g > 0) eps = std::min(eps, (u - distinct[g - 1]) / Scalar(4));
      if (g + 1 < g_count) eps = std::min(eps, (distinct[g + 1] - u) / Scalar(4));
      edges.push_back(u - eps);
      edges.push_back(u + eps);
      probs.push_back(atom_mass[g]);
    } else {
      edges.push_back(u);
    }
  }
  return HistogramForecast<Scalar>(detail::to_vector<Scalar>(edges), detail::to_vector<Scalar>(probs));
}

/// Empirical distribution of the samples.
template <typename Scalar>
DiscreteForecast<Scalar> samples_to_discrete(const SampleForecast<Scalar>& s) {
  std::vector<Scalar> sorted(s.values().begin(), s.values().end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Scalar> xs;
  std::vector<Scalar> counts;
  for (Scalar x : sorted) {
    if (!xs.empty() && xs.back() == x) {
      counts.back() += Scalar(1);
    } else {
      xs.push_back(x);
      counts.push_back(Scalar(1));
    }
  }
  return DiscreteForecast<Scalar>(detail::to_vector<Scalar>(xs), detail::to_vector<Scalar>(counts));
}

// ---------------------------------------------------------------------------
// Queries

/// P(X <= x), right-continuous.
template <typename Scalar>
Scalar cdf(const DiscreteForecast<Scalar>& f, Scalar x) {
  const auto& pts = f.points();
  const auto n = std::upper_bound(pts.begin(), pts.end(), x) - pts.begin();
  return f.probs().head(n).sum();
}

/// Generalized inverse: the smallest atom whose cdf reaches tau.
template <typename Scalar>
Scalar quantile(const DiscreteForecast<Scalar>& f, Scalar tau) {
  if (!(tau > Scalar(0) && tau < Scalar(1))) {
    throw Error(ErrorKind::InvalidLevel, "quantile level must lie in (0, 1)");
  }
  Scalar acc(0);
  for (Index j = 0; j < f.size(); ++j) {
    acc += f.probs()(j);
    if (acc >= tau) return f.points()(j);
  }
  return f.max();
}

template <typename Scalar>
Scalar mean(const DiscreteForecast<Scalar>& f) {
  return f.points().dot(f.probs());
}

/// E[(X - mean)^2], computed about the mean and clamped at zero.
template <typename Scalar>
Scalar variance(const DiscreteForecast<Scalar>& f) {
  const Scalar mu = mean(f);
  const Scalar v = ((f.points().array() - mu).square() * f.probs().array()).sum();
  return std::max(v, Scalar(0));
}

template <typename Scalar>
Scalar stddev(const DiscreteForecast<Scalar>& f) {
  return std::sqrt(variance(f));
}

}  // namespace propscore
