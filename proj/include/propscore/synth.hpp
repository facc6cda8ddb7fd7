#pragma once

// Seeded scenarios with known ground truth.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "propscore/forecast.hpp"
#include "propscore/io.hpp"
#include "propscore/random.hpp"
#include "propscore/ranking.hpp"

namespace propscore {

enum class ScenarioKind { dominant, intransitive_triple, iid_null, self_calibrated };

ScenarioKind parse_scenario_kind(std::string_view name);
std::string_view to_string(ScenarioKind kind);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::dominant;
  int models = 2;
  int datasets = 1;
  int folds = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics = {"crps"};
};

/// Throws InvalidSpec when counts are below one, or for an intransitive
/// triple without exactly three models and a dataset count divisible by 3.
void validate(const ScenarioSpec& spec);

/// Model names are "model_<i>", dataset names "dataset_<j>" (zero-padded).
///   dominant             model i scores scale_d * (1 + i + noise), |noise| <= 0.25,
///                        so model 0 is best on every fold of every dataset.
///   intransitive_triple  dataset 3b + r orders the models (r, r+1, r+2) mod 3
///                        best to worst: each model holds ranks 1, 2, 3 once per
///                        block and the pairwise wins cycle.
///   iid_null             every (model, dataset, fold) value drawn independently.
/// Values are flipped for higher-better metrics so the intended order holds
/// under each metric's orientation.
std::vector<RunRecord> generate_runs(const ScenarioSpec& spec);

struct CalibratedInstance {
  DiscreteForecastd forecast;
  double target;
};

/// Each instance draws a random discrete truth with 1 to 8 atoms and an
/// observation from it; the forecast is the truth itself.
std::vector<CalibratedInstance> generate_self_calibrated_batch(std::size_t n, std::uint64_t seed);

/// Random discrete distribution with up to max_atoms distinct atoms.
DiscreteForecastd random_discrete(CounterRng& rng, int max_atoms);

/// Histogram record whose bin centers reproduce the atoms (up to rounding):
/// a narrow bin around each atom with empty bins between them.
ForecastRecord to_histogram_record(const CalibratedInstance& instance, std::string id);

}  // namespace propscore
