#include "propscore/ranking.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "propscore/error.hpp"
#include "propscore/io.hpp"
#include "propscore/synth.hpp"

namespace propscore {
namespace {

ScoreMatrix matrix(std::initializer_list<std::initializer_list<double>> rows,
                   Orientation o = Orientation::lower_better) {
  ScoreMatrix m;
  m.orientation = o;
  const auto n_rows = rows.size();
  const auto n_cols = rows.begin()->size();
  m.cells.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    m.models.push_back("m" + std::to_string(i));
    Eigen::Index j = 0;
    for (double v : r) m.cells(i, j++) = v;
    ++i;
  }
  for (std::size_t j = 0; j < n_cols; ++j) m.datasets.push_back("d" + std::to_string(j));
  return m;
}

template <typename Fn>
void expect_error(ErrorKind kind, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

std::string board_text(const std::vector<LeaderboardRow>& rows) {
  std::ostringstream os;
  write_leaderboard(os, rows);
  return os.str();
}

// --- aggregate_folds ----------------------------------------------------------

TEST(AggregateFolds, MeanOverFolds) {
  std::vector<RunRecord> runs;
  for (int f = 1; f <= 5; ++f) {
    runs.push_back({"a", "d", f, "crps", 2.0});
    runs.push_back({"b", "d", f, "crps", 3.0});
  }
  runs.push_back({"a", "e", 0, "crps", 0.0});
  runs.push_back({"a", "e", 1, "crps", 1.0});
  runs.push_back({"b", "e", 0, "crps", 1.0});
  runs.push_back({"b", "e", 0, "other", 9.0});
  const auto m = aggregate_folds(runs, "crps", Orientation::lower_better);
  ASSERT_EQ(m.models, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(m.datasets, (std::vector<std::string>{"d", "e"}));
  EXPECT_EQ(m.cells(0, 0), 2.0);
  EXPECT_EQ(m.cells(0, 1), 0.5);
  EXPECT_EQ(m.cells(1, 1), 1.0);
}

TEST(AggregateFolds, IncompleteDatasetDroppedWithNote) {
  const std::vector<RunRecord> runs = {
      {"a", "full", 0, "crps", 1.0}, {"b", "full", 0, "crps", 2.0}, {"a", "partial", 0, "crps", 1.0}};
  RankingDiagnostics diag;
  const auto m = aggregate_folds(runs, "crps", Orientation::lower_better, &diag);
  EXPECT_EQ(m.datasets, std::vector<std::string>{"full"});
  EXPECT_EQ(diag.incomplete_datasets, std::vector<std::string>{"partial"});
}

TEST(AggregateFolds, SingleModelIsNotComparable) {
  const std::vector<RunRecord> runs = {{"a", "d", 0, "crps", 1.0}};
  expect_error(ErrorKind::NotComparable, [&] { (void)aggregate_folds(runs, "crps", Orientation::lower_better); });
  expect_error(ErrorKind::NotComparable, [&] { (void)aggregate_folds(runs, "rmse", Orientation::lower_better); });
}

// --- drop_zero_variance -------------------------------------------------------

TEST(DropZeroVariance, ConstantColumnDropped) {
  RankingDiagnostics diag;
  const auto m = drop_zero_variance(matrix({{2, 1}, {2, 3}, {2, 2}}), &diag);
  EXPECT_EQ(m.datasets, std::vector<std::string>{"d1"});
  EXPECT_EQ(diag.zero_variance_datasets, std::vector<std::string>{"d0"});
}

TEST(DropZeroVariance, NearlyConstantKept) {
  EXPECT_EQ(drop_zero_variance(matrix({{2}, {2.0000001}, {2}})).datasets.size(), 1u);
}

TEST(DropZeroVariance, AllConstantIsNoInformativeDatasets) {
  expect_error(ErrorKind::NoInformativeDatasets, [] { (void)drop_zero_variance(matrix({{1, 4}, {1, 4}})); });
}

// --- rank_transform -----------------------------------------------------------

TEST(RankTransform, Examples) {
  const auto lower = rank_transform(matrix({{3}, {1}, {2}}));
  EXPECT_EQ(lower.col(0), Eigen::Vector3d(3, 1, 2));
  const auto higher = rank_transform(matrix({{3}, {1}, {2}}, Orientation::higher_better));
  EXPECT_EQ(higher.col(0), Eigen::Vector3d(1, 3, 2));
  const auto ties = rank_transform(matrix({{1}, {1}, {2}}));
  EXPECT_EQ(ties.col(0), Eigen::Vector3d(1.5, 1.5, 3));
  const auto all_tie = rank_transform(matrix({{5}, {5}, {5}, {1}}));
  EXPECT_EQ(all_tie.col(0), Eigen::Vector4d(3, 3, 3, 1));
}

// --- observed_statistics ------------------------------------------------------

TEST(ObservedStatistics, Examples) {
  const auto one = matrix({{0.1}, {0.5}});
  const auto s1 = observed_statistics(rank_transform(one), one);
  EXPECT_EQ(s1.average_rank(0), 1.0);
  EXPECT_EQ(s1.average_rank(1), 2.0);

  const auto three = matrix({{1, 5, 9}, {2, 4, 8}, {3, 6, 7}});
  const auto s3 = observed_statistics(rank_transform(three), three);
  EXPECT_EQ(s3.average_rank(0), 2.0);  // ranks 1, 2, 3
  EXPECT_DOUBLE_EQ(s3.observed(0), 5.0);
}

// --- permutation_null ---------------------------------------------------------

TEST(PermutationNull, SingleModelNullEqualsObserved) {
  Eigen::MatrixXd ranks = Eigen::MatrixXd::Ones(1, 4);
  const auto null = permutation_null(ranks, 100, 1);
  EXPECT_TRUE((null.array() == 1.0).all());
}

TEST(PermutationNull, TwoModelsOneDatasetSplitsEvenly) {
  Eigen::MatrixXd ranks(2, 1);
  ranks << 1, 2;
  const auto null = permutation_null(ranks, 20000, 9);
  const double ones = (null.col(0).array() == 1.0).cast<double>().mean();
  EXPECT_TRUE(((null.col(0).array() == 1.0) || (null.col(0).array() == 2.0)).all());
  // Binomial(20000, 1/2): sd ~ 0.0035.
  EXPECT_NEAR(ones, 0.5, 0.02);
}

TEST(PermutationNull, TwoModelsThreeDatasetsMatchesEnumeration) {
  Eigen::MatrixXd ranks(2, 3);
  ranks << 1, 1, 1, 2, 2, 2;
  // Enumeration of the 2^3 joint shuffles: only one gives model 0 rank 1 everywhere.
  const std::vector<std::vector<double>> cols = {{1, 2}, {1, 2}, {1, 2}};
  EXPECT_DOUBLE_EQ(oracle::exact_permutation_p(cols, 0), 0.125);
  const auto null = permutation_null(ranks, 20000, 4);
  const double frac = (null.col(0).array() == 1.0).cast<double>().mean();
  EXPECT_NEAR(frac, 0.125, 0.015);
}

TEST(PermutationNull, RowsStayPermutations) {
  Eigen::MatrixXd ranks(4, 6);
  for (int d = 0; d < 6; ++d) ranks.col(d) << 1, 2, 3, 4;
  const auto null = permutation_null(ranks, 500, 2);
  for (int s = 0; s < 500; ++s) EXPECT_DOUBLE_EQ(null.row(s).sum(), 10.0);
}

TEST(PermutationNull, IndependentOfWorkerCount) {
  Eigen::MatrixXd ranks(3, 7);
  for (int d = 0; d < 7; ++d) ranks.col(d) << 1, 2.5, 2.5;
  const auto one = permutation_null(ranks, 1001, 77, 1);
  for (int w : {2, 3, 8}) EXPECT_EQ(permutation_null(ranks, 1001, 77, w), one) << w;
}

TEST(PermutationNull, MonteCarloPMatchesExactEnumeration) {
  const ScoreMatrix m = matrix({{1, 2, 1, 3, 1}, {2, 1, 3, 1, 2}, {3, 3, 2, 2, 3}});
  const auto ranks = rank_transform(m);
  std::vector<std::vector<double>> cols;
  for (int d = 0; d < ranks.cols(); ++d) cols.push_back({ranks(0, d), ranks(1, d), ranks(2, d)});
  const auto stats = observed_statistics(ranks, m);
  const auto null = permutation_null(ranks, 20000, 5);
  for (int i = 0; i < 3; ++i) {
    const auto col = null.col(i);
    const double mc = static_cast<double>(extreme_count(stats.average_rank(i), {col.data(), 20000})) / 20000.0;
    EXPECT_NEAR(mc, oracle::exact_permutation_p(cols, static_cast<std::size_t>(i)), 0.015) << i;
  }
}

// --- empirical_p --------------------------------------------------------------

TEST(EmpiricalP, Examples) {
  EXPECT_DOUBLE_EQ(empirical_p(0, 20000), 1.0 / 20001.0);
  EXPECT_NEAR(empirical_p(0, 20000), 4.99975e-5, 1e-10);
  EXPECT_EQ(empirical_p(20000, 20000), 1.0);
  const std::vector<double> null = {1.0, 1.5, 2.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(empirical_p(2.0, null), 5.0 / 6.0);  // ties count as extreme
  EXPECT_DOUBLE_EQ(empirical_p(0.5, null), 1.0 / 6.0);
}

TEST(EmpiricalP, SymmetricNullGivesAboutHalf) {
  Eigen::MatrixXd ranks(2, 40);
  for (int d = 0; d < 40; ++d) ranks.col(d) << (d % 2 ? 1 : 2), (d % 2 ? 2 : 1);
  // Observed mean sits on the null center; P(Bin(40, 1/2) <= 20) ~ 0.56.
  const auto null = permutation_null(ranks, 20000, 6);
  const double obs = ranks.row(0).mean();
  const auto col = null.col(0);
  EXPECT_NEAR(empirical_p(obs, {col.data(), 20000}), 0.5, 0.08);
}

// --- build_leaderboard --------------------------------------------------------

LeaderboardOptions opts(int nsim = 20000, std::uint64_t seed = 1, int workers = 1) { return {nsim, seed, workers}; }

TEST(BuildLeaderboard, DominantModelIsSignificant) {
  const auto runs = generate_runs({ScenarioKind::dominant, 2, 20, 5, 3, {"crps"}});
  const auto rows = build_leaderboard(runs, "crps", Orientation::lower_better, opts());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].model, "model_0");
  EXPECT_LE(rows[0].p_value, 1e-3);
  EXPECT_EQ(rows[1].p_value, 1.0);
  EXPECT_EQ(rows[0].average_rank, 1.0);
  EXPECT_EQ(rows[0].rank, 1);
  EXPECT_EQ(rows[1].rank, 2);
}

TEST(BuildLeaderboard, IdenticalModelsHaveNoInformativeDatasets) {
  std::vector<RunRecord> runs;
  for (int d = 0; d < 4; ++d) {
    for (const char* m : {"a", "b", "c"}) runs.push_back({m, "d" + std::to_string(d), 0, "crps", 1.0 + d});
  }
  expect_error(ErrorKind::NoInformativeDatasets,
               [&] { (void)build_leaderboard(runs, "crps", Orientation::lower_better, opts(100)); });
}

TEST(BuildLeaderboard, RockPaperScissorsHasNoWinner) {
  const auto runs = generate_runs({ScenarioKind::intransitive_triple, 3, 30, 5, 8, {"crps"}});
  const auto rows = build_leaderboard(runs, "crps", Orientation::lower_better, opts());
  for (const auto& r : rows) {
    EXPECT_EQ(r.average_rank, 2.0);
    EXPECT_GE(r.p_value, 0.05);
  }
}

TEST(BuildLeaderboard, HigherBetterOrientation) {
  const auto runs = generate_runs({ScenarioKind::dominant, 3, 10, 2, 3, {"r2"}});
  const auto rows = build_leaderboard(runs, "r2", Orientation::higher_better, opts(2000));
  EXPECT_EQ(rows[0].model, "model_0");
  EXPECT_GT(rows[0].observed, rows[2].observed);
}

TEST(SortLeaderboard, TiesBrokenByObservedUnderOrientation) {
  std::vector<LeaderboardRow> rows = {{0, "x", 0.5, 3.0, 2}, {0, "y", 0.5, 1.0, 2}, {0, "z", 0.1, 9.0, 1}};
  sort_leaderboard(rows, Orientation::lower_better);
  EXPECT_EQ(rows[0].model, "z");
  EXPECT_EQ(rows[1].model, "y");
  sort_leaderboard(rows, Orientation::higher_better);
  EXPECT_EQ(rows[1].model, "x");
  EXPECT_EQ(rows[2].rank, 3);
}

// --- properties ---------------------------------------------------------------

TEST(RankingProperty, FoldDuplicationLeavesBoardUnchanged) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto runs = generate_runs({ScenarioKind::iid_null, 4, 12, 3, seed, {"crps"}});
    std::vector<RunRecord> dup;
    for (const auto& r : runs) {
      for (int k = 0; k < 4; ++k) {
        auto c = r;
        c.fold = r.fold * 4 + k;
        dup.push_back(c);
      }
    }
    EXPECT_EQ(board_text(build_leaderboard(runs, "crps", Orientation::lower_better, opts(3000, seed))),
              board_text(build_leaderboard(dup, "crps", Orientation::lower_better, opts(3000, seed))));
  }
}

TEST(RankingProperty, MonotoneTransformPerDatasetLeavesRanksAndP) {
  auto runs = generate_runs({ScenarioKind::iid_null, 5, 15, 1, 42, {"crps"}});
  const auto base = build_leaderboard(runs, "crps", Orientation::lower_better, opts(3000));
  for (auto& r : runs) {
    const int d = std::stoi(r.dataset.substr(8));
    r.value = d % 2 ? std::exp(r.value / 10.0) * (d + 1) : r.value * r.value * r.value - 7.0;
  }
  const auto moved = build_leaderboard(runs, "crps", Orientation::lower_better, opts(3000));
  std::map<std::string, LeaderboardRow> by_model;
  for (const auto& r : moved) by_model[r.model] = r;
  for (const auto& r : base) {
    EXPECT_EQ(by_model[r.model].average_rank, r.average_rank);
    EXPECT_EQ(by_model[r.model].p_value, r.p_value);
  }
}

TEST(RankingProperty, PBoundsAndMeanAverageRank) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int models = 2 + static_cast<int>(seed % 5);
    const auto runs = generate_runs({ScenarioKind::iid_null, models, 7, 2, seed, {"crps"}});
    const int nsim = 999;
    const auto rows = build_leaderboard(runs, "crps", Orientation::lower_better, opts(nsim, seed));
    double sum = 0.0;
    for (const auto& r : rows) {
      EXPECT_GE(r.p_value, 1.0 / (nsim + 1));
      EXPECT_LE(r.p_value, 1.0);
      sum += r.average_rank;
    }
    EXPECT_DOUBLE_EQ(sum / models, (models + 1) / 2.0);
  }
}

TEST(RankingProperty, DeterministicAcrossRunsAndWorkers) {
  const auto runs = generate_runs({ScenarioKind::iid_null, 6, 25, 5, 3, {"crps"}});
  const auto a = board_text(build_leaderboard(runs, "crps", Orientation::lower_better, opts(5000, 10, 1)));
  EXPECT_EQ(a, board_text(build_leaderboard(runs, "crps", Orientation::lower_better, opts(5000, 10, 1))));
  EXPECT_EQ(a, board_text(build_leaderboard(runs, "crps", Orientation::lower_better, opts(5000, 10, 4))));
  EXPECT_NE(a, board_text(build_leaderboard(runs, "crps", Orientation::lower_better, opts(5000, 11, 1))));
}

}  // namespace
}  // namespace propscore
