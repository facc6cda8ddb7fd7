#pragma once

// Permutation-test leaderboard across datasets.
//
// Pipeline: fold averaging (one value per model and dataset), removal of
// datasets on which all models tie, within-dataset ranks, observed average
// rank per model, a null distribution of average ranks obtained by shuffling
// each dataset's rank vector independently, and one-sided empirical p-values
// p = (#{null <= observed} + 1) / (nsim + 1). Rows are ordered by p, then by
// the raw observed mean.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "propscore/metric.hpp"

namespace propscore {

struct RunRecord {
  std::string model;
  std::string dataset;
  int fold = 0;
  std::string metric;
  double value = 0.0;
};

/// Fold-averaged scores, models in rows and datasets in columns.
struct ScoreMatrix {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  Eigen::MatrixXd cells;
  Orientation orientation = Orientation::lower_better;
};

struct LeaderboardRow {
  int rank = 0;
  std::string model;
  double p_value = 1.0;
  double observed = 0.0;
  double average_rank = 0.0;
};

/// Stage notes worth surfacing to the user (dropped datasets and the like).
struct RankingDiagnostics {
  std::vector<std::string> incomplete_datasets;
  std::vector<std::string> zero_variance_datasets;
};

/// Averages each (model, dataset) over its folds. Models and datasets are
/// listed in lexicographic order. Datasets missing any model are dropped and
/// reported. Throws NotComparable when fewer than two models remain.
ScoreMatrix aggregate_folds(std::span<const RunRecord> records, std::string_view metric, Orientation orientation,
                            RankingDiagnostics* diagnostics = nullptr);

/// Removes datasets whose column is exactly constant. Throws
/// NoInformativeDatasets if none remain.
ScoreMatrix drop_zero_variance(const ScoreMatrix& m, RankingDiagnostics* diagnostics = nullptr);

/// Within each dataset, rank 1 is best under the orientation; ties share
/// the average of the ranks they span.
Eigen::MatrixXd rank_transform(const ScoreMatrix& m);

struct ObservedStatistics {
  Eigen::VectorXd average_rank;
  Eigen::VectorXd observed;
};

ObservedStatistics observed_statistics(const Eigen::MatrixXd& ranks, const ScoreMatrix& m);

/// Null means of each model's average rank: an nsim x models matrix. Each
/// (simulation, dataset) pair shuffles with its own CounterRng substream, so
/// the result depends only on (ranks, nsim, seed). workers <= 0 picks the
/// count from PROPSCORE_WORKERS, or 1.
Eigen::MatrixXd permutation_null(const Eigen::MatrixXd& ranks, int nsim, std::uint64_t seed, int workers = 0);

/// Number of null means at or below the observed mean.
std::int64_t extreme_count(double observed_mean, std::span<const double> null_means);

/// (counts + 1) / (nsim + 1).
double empirical_p(std::int64_t counts, std::int64_t nsim);
double empirical_p(double observed_mean, std::span<const double> null_means);

struct LeaderboardOptions {
  int nsim = 20000;
  std::uint64_t seed = 0;
  int workers = 0;
};

std::vector<LeaderboardRow> build_leaderboard(std::span<const RunRecord> records, std::string_view metric,
                                              Orientation orientation, const LeaderboardOptions& options,
                                              RankingDiagnostics* diagnostics = nullptr);

/// Orders rows by p ascending then observed (better first) then model name,
/// and assigns ranks 1..M.
void sort_leaderboard(std::vector<LeaderboardRow>& rows, Orientation orientation);

}  // namespace propscore
