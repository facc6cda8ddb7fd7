// propscore: score probabilistic forecasts and build permutation-test
// leaderboards.
//
//   propscore score       --forecasts f.jsonl --metrics crps,log_score --out scores.csv
//   propscore leaderboard --runs runs.csv --metric crps --seed 1 --out board.csv
//   propscore synth       --scenario dominant --models 2 --datasets 20 --folds 5 --seed 1 --out runs.csv
//   propscore validate    --forecasts f.jsonl | --runs runs.csv
//
// Exit status: 0 success, 1 input error, 2 computation error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "propscore/batch.hpp"
#include "propscore/error.hpp"
#include "propscore/io.hpp"
#include "propscore/metric.hpp"
#include "propscore/ranking.hpp"
#include "propscore/synth.hpp"

namespace {

using namespace propscore;

constexpr int kInputError = 1;
constexpr int kComputeError = 2;

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

/// Runs `write` against the file at `path`, or stdout for "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

PointFunctional parse_functional(const std::string& s) {
  if (s == "median") return PointFunctional::median;
  if (s == "mean") return PointFunctional::mean;
  throw Error(ErrorKind::InvalidSpec, "point functional must be 'median' or 'mean'");
}

struct ScoreArgs {
  std::string forecasts;
  std::vector<std::string> metrics;
  std::string out = "-";
  double alpha = 0.1;
  double beta = 1.0;
  std::vector<double> weight_ref;
  std::string mae_functional = "median";
  std::string sq_functional = "mean";
};

int run_score(const ScoreArgs& a) {
  auto ids = split_list(a.metrics);
  if (ids.empty()) ids = metric_identifiers();
  std::vector<MetricSpec> specs;
  for (const auto& id : ids) {
    auto spec = parse_metric(id, a.alpha, a.beta);
    if (a.weight_ref.size() == 2) {
      spec.weight_location = a.weight_ref[0];
      spec.weight_scale = a.weight_ref[1];
    }
    specs.push_back(std::move(spec));
  }
  BatchOptions options;
  options.absolute_functional = parse_functional(a.mae_functional);
  options.squared_functional = parse_functional(a.sq_functional);

  const auto records = read_forecasts(std::filesystem::path(a.forecasts));
  const auto scores = score_batch(records, specs, options);
  for (const auto& w : scores.warnings) std::cerr << "warning: " << w << '\n';
  emit(a.out, [&](std::ostream& os) { write_score_table(os, scores); });
  return 0;
}

struct LeaderboardArgs {
  std::string runs;
  std::string metric;
  int nsim = 20000;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string orientation;
  bool wide = false;
  int workers = 0;
};

int run_leaderboard(const LeaderboardArgs& a) {
  const auto records = read_runs(std::filesystem::path(a.runs));
  Orientation orientation = orientation_of(a.metric);
  if (a.orientation == "lower") orientation = Orientation::lower_better;
  if (a.orientation == "higher") orientation = Orientation::higher_better;

  RankingDiagnostics diag;
  LeaderboardOptions options;
  options.nsim = a.nsim;
  options.seed = a.seed;
  options.workers = a.workers;
  const auto rows = build_leaderboard(records, a.metric, orientation, options, &diag);
  for (const auto& d : diag.incomplete_datasets) {
    std::cerr << "dropped dataset " << d << ": missing runs for some models\n";
  }
  for (const auto& d : diag.zero_variance_datasets) {
    std::cerr << "dropped dataset " << d << ": all models tie\n";
  }
  std::cerr << "datasets dropped: " << diag.incomplete_datasets.size() << " incomplete, "
            << diag.zero_variance_datasets.size() << " zero-variance\n";
  emit(a.out, [&](std::ostream& os) { write_leaderboard(os, rows, a.wide); });
  return 0;
}

struct SynthArgs {
  std::string scenario;
  ScenarioSpec spec;
  std::vector<std::string> metrics;
  std::size_t instances = 1000;
  std::string out = "-";
};

int run_synth(SynthArgs a) {
  a.spec.kind = parse_scenario_kind(a.scenario);
  if (auto m = split_list(a.metrics); !m.empty()) a.spec.metrics = m;
  if (a.spec.kind == ScenarioKind::self_calibrated) {
    const auto batch = generate_self_calibrated_batch(a.instances, a.spec.seed);
    std::vector<ForecastRecord> records;
    records.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) records.push_back(to_histogram_record(batch[i], std::to_string(i)));
    emit(a.out, [&](std::ostream& os) { write_forecasts(os, records); });
    return 0;
  }
  const auto runs = generate_runs(a.spec);
  emit(a.out, [&](std::ostream& os) { write_runs(os, runs); });
  return 0;
}

struct ValidateArgs {
  std::string forecasts;
  std::string runs;
};

int run_validate(const ValidateArgs& a) {
  const bool forecasts = !a.forecasts.empty();
  const auto& path = forecasts ? a.forecasts : a.runs;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  const auto report = forecasts ? validate_forecasts(in) : validate_runs(in);
  for (const auto& v : report.violations) std::cout << path << ":" << v.line << ": " << v.message << '\n';
  std::cout << report.records << " records, " << report.violations.size() << " violations";
  if (forecasts) std::cout << ", " << report.repaired_crossings << " repaired quantile crossings";
  std::cout << '\n';
  return report.clean() ? 0 : kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proper scoring rules and permutation-test leaderboards for probabilistic regression"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* cmd_score = app.add_subcommand("score", "Score a forecast record file");
  cmd_score->add_option("--forecasts", score.forecasts, "Newline-delimited JSON forecast records")->required();
  cmd_score->add_option("--metrics", score.metrics, "Metric identifiers (comma separated); default: all");
  cmd_score->add_option("--out", score.out, "Output CSV path, '-' for stdout");
  cmd_score->add_option("--alpha", score.alpha, "Level for bare interval_score / coverage");
  cmd_score->add_option("--beta", score.beta, "Exponent for bare energy_score");
  cmd_score->add_option("--weight-ref", score.weight_ref, "wCRPS reference location and scale")->expected(2);
  cmd_score->add_option("--mae-functional", score.mae_functional, "Point prediction for MAE (median|mean)");
  cmd_score->add_option("--sq-functional", score.sq_functional, "Point prediction for RMSE and R2 (median|mean)");

  LeaderboardArgs board;
  auto* cmd_board = app.add_subcommand("leaderboard", "Permutation-test leaderboard for one metric");
  cmd_board->add_option("--runs", board.runs, "Run table (model,dataset,fold,metric,value)")->required();
  cmd_board->add_option("--metric", board.metric, "Metric to rank")->required();
  cmd_board->add_option("--nsim", board.nsim, "Permutation simulations")->check(CLI::PositiveNumber);
  cmd_board->add_option("--seed", board.seed, "Random seed (required for reproducibility)")->required();
  cmd_board->add_option("--out", board.out, "Output CSV path, '-' for stdout");
  cmd_board->add_option("--orientation", board.orientation, "Override metric orientation")
      ->check(CLI::IsMember({"lower", "higher"}));
  cmd_board->add_flag("--wide", board.wide, "Append full-precision columns");
  cmd_board->add_option("--workers", board.workers, "Worker threads (default: PROPSCORE_WORKERS or 1)");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  cmd_synth->add_option("--scenario", synth.scenario, "dominant | intransitive_triple | iid_null | self_calibrated")
      ->required();
  cmd_synth->add_option("--models", synth.spec.models, "Model count");
  cmd_synth->add_option("--datasets", synth.spec.datasets, "Dataset count");
  cmd_synth->add_option("--folds", synth.spec.folds, "Folds per dataset");
  cmd_synth->add_option("--seed", synth.spec.seed, "Random seed")->required();
  cmd_synth->add_option("--metric", synth.metrics, "Metric name(s) to emit; default crps");
  cmd_synth->add_option("--instances", synth.instances, "Instances for self_calibrated");
  cmd_synth->add_option("--out", synth.out, "Output path, '-' for stdout");

  ValidateArgs validate_args;
  auto* cmd_validate = app.add_subcommand("validate", "Check a forecast or run file for violations");
  auto* vf = cmd_validate->add_option("--forecasts", validate_args.forecasts, "Forecast record file");
  auto* vr = cmd_validate->add_option("--runs", validate_args.runs, "Run table");
  vf->excludes(vr);
  cmd_validate->require_option(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*cmd_score) return run_score(score);
    if (*cmd_board) return run_leaderboard(board);
    if (*cmd_synth) return run_synth(synth);
    if (*cmd_validate) return run_validate(validate_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kInputError : kComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kComputeError;
  }
  return 0;
}
