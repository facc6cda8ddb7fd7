#include "propscore/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <thread>

#include "propscore/error.hpp"
#include "propscore/random.hpp"

namespace propscore {

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("PROPSCORE_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

ScoreMatrix aggregate_folds(std::span<const RunRecord> records, std::string_view metric, Orientation orientation,
                            RankingDiagnostics* diagnostics) {
  struct Cell {
    double sum = 0.0;
    int folds = 0;
  };
  std::map<std::string, std::map<std::string, Cell>> by_dataset;
  std::map<std::string, int> model_index;
  for (const auto& r : records) {
    if (r.metric != metric) continue;
    auto& cell = by_dataset[r.dataset][r.model];
    cell.sum += r.value;
    ++cell.folds;
    model_index.emplace(r.model, 0);
  }
  if (model_index.empty()) {
    throw Error(ErrorKind::NotComparable, "no runs recorded for metric '" + std::string(metric) + "'");
  }

  ScoreMatrix m;
  m.orientation = orientation;
  for (auto& [name, idx] : model_index) {
    idx = static_cast<int>(m.models.size());
    m.models.push_back(name);
  }
  std::vector<std::string> kept;
  for (const auto& [dataset, cells] : by_dataset) {
    if (cells.size() == model_index.size()) {
      kept.push_back(dataset);
    } else if (diagnostics) {
      diagnostics->incomplete_datasets.push_back(dataset);
    }
  }
  if (m.models.size() < 2) {
    throw Error(ErrorKind::NotComparable, "at least two models are needed to build a leaderboard");
  }
  if (kept.empty()) {
    throw Error(ErrorKind::NotComparable, "no dataset has runs for every model");
  }

  m.cells.resize(static_cast<Eigen::Index>(m.models.size()), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t d = 0; d < kept.size(); ++d) {
    for (const auto& [model, cell] : by_dataset.at(kept[d])) {
      m.cells(model_index.at(model), static_cast<Eigen::Index>(d)) = cell.sum / cell.folds;
    }
  }
  m.datasets = std::move(kept);
  return m;
}

ScoreMatrix drop_zero_variance(const ScoreMatrix& m, RankingDiagnostics* diagnostics) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index d = 0; d < m.cells.cols(); ++d) {
    const auto col = m.cells.col(d);
    if ((col.array() != col(0)).any()) {
      keep.push_back(d);
    } else if (diagnostics) {
      diagnostics->zero_variance_datasets.push_back(m.datasets[static_cast<std::size_t>(d)]);
    }
  }
  if (keep.empty()) {
    throw Error(ErrorKind::NoInformativeDatasets, "every dataset has identical scores for all models");
  }
  ScoreMatrix out;
  out.models = m.models;
  out.orientation = m.orientation;
  out.cells.resize(m.cells.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.cells.col(static_cast<Eigen::Index>(i)) = m.cells.col(keep[i]);
    out.datasets.push_back(m.datasets[static_cast<std::size_t>(keep[i])]);
  }
  return out;
}

Eigen::MatrixXd rank_transform(const ScoreMatrix& m) {
  const auto models = m.cells.rows();
  Eigen::MatrixXd ranks(models, m.cells.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(models));
  for (Eigen::Index d = 0; d < m.cells.cols(); ++d) {
    const auto col = m.cells.col(d);
    const auto better = [&](Eigen::Index a, Eigen::Index b) {
      return m.orientation == Orientation::lower_better ? col(a) < col(b) : col(a) > col(b);
    };
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), better);
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i + 1;
      while (j < order.size() && col(order[j]) == col(order[i])) ++j;
      // Positions i..j-1 (0-based) share the mean of ranks i+1..j.
      const double shared = 0.5 * static_cast<double>(i + 1 + j);
      for (std::size_t k = i; k < j; ++k) ranks(order[k], d) = shared;
      i = j;
    }
  }
  return ranks;
}

ObservedStatistics observed_statistics(const Eigen::MatrixXd& ranks, const ScoreMatrix& m) {
  return {ranks.rowwise().mean(), m.cells.rowwise().mean()};
}

Eigen::MatrixXd permutation_null(const Eigen::MatrixXd& ranks, int nsim, std::uint64_t seed, int workers) {
  if (nsim < 1) throw Error(ErrorKind::InvalidSpec, "nsim must be positive");
  const auto models = ranks.rows();
  const auto datasets = ranks.cols();
  Eigen::MatrixXd null_means(nsim, models);

  const auto run = [&](int first, int last) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(models));
    Eigen::VectorXd sums(models);
    for (int s = first; s < last; ++s) {
      sums.setZero();
      for (Eigen::Index d = 0; d < datasets; ++d) {
        CounterRng rng(seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(d));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        rng.shuffle(perm.begin(), perm.end());
        for (Eigen::Index i = 0; i < models; ++i) sums(i) += ranks(perm[static_cast<std::size_t>(i)], d);
      }
      null_means.row(s) = (sums / static_cast<double>(datasets)).transpose();
    }
  };

  const int n_workers = std::min(resolve_workers(workers), nsim);
  if (n_workers <= 1) {
    run(0, nsim);
    return null_means;
  }
  std::vector<std::thread> pool;
  const int chunk = (nsim + n_workers - 1) / n_workers;
  for (int w = 0; w < n_workers; ++w) {
    const int first = w * chunk;
    const int last = std::min(nsim, first + chunk);
    if (first < last) pool.emplace_back(run, first, last);
  }
  for (auto& t : pool) t.join();
  return null_means;
}

std::int64_t extreme_count(double observed_mean, std::span<const double> null_means) {
  return std::count_if(null_means.begin(), null_means.end(), [&](double v) { return v <= observed_mean; });
}

double empirical_p(std::int64_t counts, std::int64_t nsim) {
  return static_cast<double>(counts + 1) / static_cast<double>(nsim + 1);
}

double empirical_p(double observed_mean, std::span<const double> null_means) {
  if (null_means.empty()) throw Error(ErrorKind::InvalidSpec, "empty null sample");
  return empirical_p(extreme_count(observed_mean, null_means), static_cast<std::int64_t>(null_means.size()));
}

void sort_leaderboard(std::vector<LeaderboardRow>& rows, Orientation orientation) {
  std::sort(rows.begin(), rows.end(), [orientation](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    if (a.observed != b.observed) {
      return orientation == Orientation::lower_better ? a.observed < b.observed : a.observed > b.observed;
    }
    return a.model < b.model;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
}

std::vector<LeaderboardRow> build_leaderboard(std::span<const RunRecord> records, std::string_view metric,
                                              Orientation orientation, const LeaderboardOptions& options,
                                              RankingDiagnostics* diagnostics) {
  const auto matrix = drop_zero_variance(aggregate_folds(records, metric, orientation, diagnostics), diagnostics);
  const auto ranks = rank_transform(matrix);
  const auto stats = observed_statistics(ranks, matrix);
  const auto null_means = permutation_null(ranks, options.nsim, options.seed, options.workers);

  std::vector<LeaderboardRow> rows;
  for (Eigen::Index i = 0; i < ranks.rows(); ++i) {
    const auto col = null_means.col(i);
    LeaderboardRow row;
    row.model = matrix.models[static_cast<std::size_t>(i)];
    row.p_value = empirical_p(stats.average_rank(i), std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    row.observed = stats.observed(i);
    row.average_rank = stats.average_rank(i);
    rows.push_back(std::move(row));
  }
  sort_leaderboard(rows, orientation);
  return rows;
}

}  // namespace propscore
