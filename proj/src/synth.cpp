#include "propscore/synth.hpp"

#include <algorithm>
#include <cmath>

#include "propscore/error.hpp"
#include "propscore/metric.hpp"

namespace propscore {

namespace {

std::string padded(const char* prefix, int i, int count) {
  std::size_t width = std::to_string(std::max(count - 1, 0)).size();
  auto digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return std::string(prefix) + "_" + digits;
}

// Streams: one per (dataset, model * folds + fold) cell so values do not
// depend on generation order.
constexpr std::uint64_t kScaleStream = 0xffffffffULL;

}  // namespace

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "dominant") return ScenarioKind::dominant;
  if (name == "intransitive_triple" || name == "intransitive") return ScenarioKind::intransitive_triple;
  if (name == "iid_null") return ScenarioKind::iid_null;
  if (name == "self_calibrated") return ScenarioKind::self_calibrated;
  throw Error(ErrorKind::InvalidSpec, "unknown scenario '" + std::string(name) +
                                          "'; expected dominant, intransitive_triple, iid_null or self_calibrated");
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::dominant: return "dominant";
    case ScenarioKind::intransitive_triple: return "intransitive_triple";
    case ScenarioKind::iid_null: return "iid_null";
    case ScenarioKind::self_calibrated: return "self_calibrated";
  }
  return "unknown";
}

void validate(const ScenarioSpec& spec) {
  if (spec.models < 1 || spec.datasets < 1 || spec.folds < 1) {
    throw Error(ErrorKind::InvalidSpec, "models, datasets and folds must all be at least 1");
  }
  if (spec.kind == ScenarioKind::intransitive_triple && (spec.models != 3 || spec.datasets % 3 != 0)) {
    throw Error(ErrorKind::InvalidSpec, "intransitive_triple needs exactly 3 models and a multiple of 3 datasets");
  }
  if (spec.metrics.empty()) throw Error(ErrorKind::InvalidSpec, "at least one metric is required");
}

std::vector<RunRecord> generate_runs(const ScenarioSpec& spec) {
  validate(spec);
  if (spec.kind == ScenarioKind::self_calibrated) {
    throw Error(ErrorKind::InvalidSpec, "self_calibrated produces forecast records, not runs");
  }
  std::vector<RunRecord> out;
  out.reserve(spec.metrics.size() * static_cast<std::size_t>(spec.models * spec.datasets * spec.folds));
  for (std::size_t mi = 0; mi < spec.metrics.size(); ++mi) {
    const auto& metric = spec.metrics[mi];
    const double sign = orientation_of(metric) == Orientation::higher_better ? -1.0 : 1.0;
    const std::uint64_t metric_seed = spec.seed + 0x9e3779b97f4a7c15ULL * mi;
    for (int d = 0; d < spec.datasets; ++d) {
      CounterRng scale_rng(metric_seed, static_cast<std::uint64_t>(d), kScaleStream);
      // Incommensurable per-dataset scales.
      const double scale = std::exp(scale_rng.uniform(0.0, 5.0));
      for (int m = 0; m < spec.models; ++m) {
        for (int f = 0; f < spec.folds; ++f) {
          CounterRng rng(metric_seed, static_cast<std::uint64_t>(d),
                         static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(spec.folds) +
                             static_cast<std::uint64_t>(f));
          double level = 0.0;
          switch (spec.kind) {
            case ScenarioKind::dominant:
              level = 1.0 + m + rng.uniform(-0.25, 0.25);
              break;
            case ScenarioKind::intransitive_triple: {
              const int position = ((m - d % 3) % 3 + 3) % 3;
              level = 1.0 + position + rng.uniform(-0.25, 0.25);
              break;
            }
            case ScenarioKind::iid_null:
              level = 1.0 + rng.uniform();
              break;
            case ScenarioKind::self_calibrated:
              break;
          }
          out.push_back(RunRecord{padded("model", m, spec.models), padded("dataset", d, spec.datasets), f, metric,
                                  sign * scale * level});
        }
      }
    }
  }
  return out;
}

DiscreteForecastd random_discrete(CounterRng& rng, int max_atoms) {
  const auto atoms = static_cast<Index>(1 + rng.below(static_cast<std::uint64_t>(max_atoms)));
  VectorX<double> points(atoms);
  VectorX<double> probs(atoms);
  double x = rng.uniform(-5.0, 5.0);
  for (Index j = 0; j < atoms; ++j) {
    points(j) = x;
    x += rng.uniform(0.2, 2.0);
    probs(j) = rng.uniform(0.05, 1.0);
  }
  return DiscreteForecastd(std::move(points), std::move(probs));
}

std::vector<CalibratedInstance> generate_self_calibrated_batch(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "batch size must be at least 1");
  std::vector<CalibratedInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    auto f = random_discrete(rng, 8);
    // Inverse-CDF draw from the truth.
    const double u = rng.uniform();
    double acc = 0.0;
    double y = f.max();
    for (Index j = 0; j < f.size(); ++j) {
      acc += f.probs()(j);
      if (u < acc) {
        y = f.points()(j);
        break;
      }
    }
    out.push_back({std::move(f), y});
  }
  return out;
}

ForecastRecord to_histogram_record(const CalibratedInstance& instance, std::string id) {
  const auto& pts = instance.forecast.points();
  const auto& ps = instance.forecast.probs();
  double half = 0.25;
  for (Index j = 1; j < pts.size(); ++j) half = std::min(half, (pts(j) - pts(j - 1)) / 4.0);
  std::vector<double> edges;
  std::vector<double> probs;
  for (Index j = 0; j < pts.size(); ++j) {
    if (j > 0) probs.push_back(0.0);
    edges.push_back(pts(j) - half);
    edges.push_back(pts(j) + half);
    probs.push_back(ps(j));
  }
  ForecastRecord rec{std::move(id), instance.target,
                     HistogramForecastd(detail::to_vector<double>(edges), detail::to_vector<double>(probs))};
  return rec;
}

}  // namespace propscore
