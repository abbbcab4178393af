#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aceformer/metrics.hpp"
#include "aceformer/series.hpp"

using namespace aceformer;

namespace {

TrendOutcome make_outcome(std::vector<bool> predicted, std::vector<bool> actual) {
  TrendOutcome outcome;
  outcome.predicted_up = std::move(predicted);
  outcome.actual_up = std::move(actual);
  return outcome;
}

// Outcome with the given confusion-matrix counts, TP first then TN, FP, FN.
TrendOutcome counted_outcome(int tp, int tn, int fp, int fn) {
  TrendOutcome outcome;
  for (int i = 0; i < tp; ++i) { outcome.predicted_up.push_back(true);  outcome.actual_up.push_back(true); }
  for (int i = 0; i < tn; ++i) { outcome.predicted_up.push_back(false); outcome.actual_up.push_back(false); }
  for (int i = 0; i < fp; ++i) { outcome.predicted_up.push_back(true);  outcome.actual_up.push_back(false); }
  for (int i = 0; i < fn; ++i) { outcome.predicted_up.push_back(false); outcome.actual_up.push_back(true); }
  return outcome;
}

ReturnSeries make_returns(std::vector<double> values, double risk_free = 0.0) {
  ReturnSeries series;
  series.daily_returns = std::move(values);
  series.risk_free = risk_free;
  return series;
}

double mcc_via_pearson(const TrendOutcome& outcome) {
  std::vector<double> p(outcome.size()), a(outcome.size());
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    p[i] = outcome.predicted_up[i] ? 1.0 : 0.0;
    a[i] = outcome.actual_up[i] ? 1.0 : 0.0;
  }
  return pearson(p, a);
}

}  // namespace

TEST_CASE("trend calls compare each close with the prior close") {
  // Rising throughout: every call and every outcome is up.
  const TrendOutcome rising =
      trend_from_predictions({11, 12, 13}, {10.5, 11.5, 12.5}, {10, 11, 12});
  for (std::size_t i = 0; i < rising.size(); ++i) {
    CHECK(rising.predicted_up[i]);
    CHECK(rising.actual_up[i]);
  }

  // An exact tie with the prior close is not an up move on either side.
  const TrendOutcome tie = trend_from_predictions({10.0}, {10.0}, {10.0});
  CHECK_FALSE(tie.predicted_up[0]);
  CHECK_FALSE(tie.actual_up[0]);

  // Six days, two calls on the wrong side.
  const TrendOutcome mixed = trend_from_predictions(
      {11, 9, 12, 8, 13, 14},     // predicted
      {11, 9, 8, 12, 13, 14},     // actual: days 2 and 3 disagree
      {10, 10, 10, 10, 10, 10});  // prior
  CHECK(accuracy(mixed) == doctest::Approx(100.0 * 4.0 / 6.0).epsilon(1e-12));

  CHECK_THROWS_AS(trend_from_predictions({1, 2}, {1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(trend_from_predictions({}, {}, {}), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(trend_from_predictions({nan}, {1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("accuracy counts matching direction calls") {
  CHECK(accuracy(make_outcome({true, false, true}, {true, false, true})) == 100.0);
  CHECK(accuracy(make_outcome({true, true}, {false, false})) == 0.0);
  CHECK(accuracy(counted_outcome(2, 2, 1, 1)) ==
        doctest::Approx(100.0 * 4.0 / 6.0).epsilon(1e-12));
  CHECK_THROWS_AS(accuracy(make_outcome({}, {})), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(make_outcome({true}, {true, false})), std::invalid_argument);
}

TEST_CASE("mcc hand values and degenerate margins") {
  CHECK(mcc(counted_outcome(3, 3, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mcc(counted_outcome(0, 0, 2, 2)) == doctest::Approx(-1.0).epsilon(1e-12));

  // TP=3 TN=4 FP=1 FN=2: (12 - 2) / sqrt(4 * 5 * 5 * 6) = 10 / sqrt(600).
  const double expected = 10.0 / std::sqrt(600.0);
  CHECK(expected == doctest::Approx(0.40825).epsilon(1e-4));
  CHECK(mcc(counted_outcome(3, 4, 1, 2)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::fabs(mcc(counted_outcome(3, 4, 1, 2)) - 0.40825) < 1e-5);

  // Any empty margin collapses to zero rather than dividing by it.
  CHECK(mcc(counted_outcome(5, 0, 0, 0)) == 0.0);   // never predicted or saw down
  CHECK(mcc(counted_outcome(0, 5, 0, 0)) == 0.0);
  CHECK(mcc(counted_outcome(3, 0, 2, 0)) == 0.0);   // all actual days were down
  CHECK(mcc(counted_outcome(3, 0, 0, 2)) == 0.0);   // always predicted up
}

TEST_CASE("mcc equals the correlation of the binary encodings") {
  std::mt19937_64 rng(404);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> length(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = length(rng);
    TrendOutcome outcome;
    outcome.predicted_up.resize(n);
    outcome.actual_up.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      outcome.predicted_up[i] = coin(rng);
      outcome.actual_up[i] = coin(rng);
    }
    CAPTURE(trial);
    CHECK(std::fabs(mcc(outcome) - mcc_via_pearson(outcome)) < 1e-12);
  }
}

TEST_CASE("trading rule is long on up calls and flat otherwise") {
  const std::vector<double> actual = {0.02, -0.01, 0.03, -0.02};

  const ReturnSeries flat =
      trading_returns(make_outcome({false, false, false, false}, {true, true, true, true}), actual);
  for (double r : flat.daily_returns) CHECK(r == 0.0);

  const ReturnSeries all_in =
      trading_returns(make_outcome({true, true, true, true}, {true, true, true, true}), actual);
  CHECK(all_in.daily_returns == actual);

  const ReturnSeries alternating =
      trading_returns(make_outcome({true, false, true, false}, {true, true, true, true}), actual);
  CHECK(alternating.daily_returns == std::vector<double>{0.02, 0.0, 0.03, 0.0});

  // A day that more than doubles still books at most +100%.
  const ReturnSeries clamped =
      trading_returns(make_outcome({true}, {true}), {1.5});
  CHECK(clamped.daily_returns[0] == 1.0);

  CHECK_THROWS_AS(trading_returns(make_outcome({true}, {true}), {0.1, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(trading_returns(make_outcome({true}, {true}), {std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("irr adds daily returns on top of one") {
  CHECK(irr(make_returns({0.0, 0.0, 0.0})) == 1.0);

  // The worked example lands exactly on 1.02 in double arithmetic.
  CHECK(irr(make_returns({0.01, -0.02, 0.03})) == 1.02);
  CHECK(irr_sum_pct(make_returns({0.01, -0.02, 0.03})) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // Concatenating two periods adds their sums.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(-0.05, 0.05);
  std::vector<double> first(13), second(9);
  for (double& r : first) r = unit(rng);
  for (double& r : second) r = unit(rng);
  std::vector<double> joined = first;
  joined.insert(joined.end(), second.begin(), second.end());
  const double lhs = irr(make_returns(joined));
  const double rhs = irr(make_returns(first)) + irr(make_returns(second)) - 1.0;
  CHECK(std::fabs(lhs - rhs) < 1e-12);

  CHECK_THROWS_AS(irr(make_returns({1.5})), std::invalid_argument);
  CHECK_THROWS_AS(irr(make_returns({std::nan("")})), std::invalid_argument);
}

TEST_CASE("sharpe ratio hand values and degenerate cases") {
  // Mean 0.02, sample std 0.01: the ratio is exactly 2 in doubles.
  CHECK(sharpe(make_returns({0.01, 0.02, 0.03})) == 2.0);

  // Symmetric wins and losses net out to a zero mean.
  CHECK(sharpe(make_returns({0.01, -0.01, 0.01, -0.01})) == 0.0);

  // Zero variance: fine when the excess mean is also zero, invalid otherwise.
  CHECK(sharpe(make_returns({0.0, 0.0, 0.0})) == 0.0);
  CHECK(sharpe(make_returns({0.01, 0.01, 0.01}, 0.01)) == 0.0);
  CHECK_THROWS_AS(sharpe(make_returns({0.01, 0.01, 0.01})), DegenerateSharpeError);

  CHECK_THROWS_AS(sharpe(make_returns({0.01})), std::invalid_argument);
  CHECK_THROWS_AS(sharpe(make_returns({})), std::invalid_argument);

  // Scale invariance: doubling every return (risk-free zero) is lossless in
  // binary floating point, so the ratio is bit-identical.
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unit(-0.2, 0.2);
  std::vector<double> base(17), doubled(17), tripled(17);
  for (std::size_t i = 0; i < base.size(); ++i) {
    base[i] = unit(rng);
    doubled[i] = 2.0 * base[i];
    tripled[i] = 3.0 * base[i];
  }
  const double sr = sharpe(make_returns(base));
  CHECK(sharpe(make_returns(doubled)) == sr);
  CHECK(std::fabs(sharpe(make_returns(tripled)) - sr) < 1e-12);
}

TEST_CASE("benchmark is buy and hold") {
  const BenchmarkResult flat = benchmark({0.0, 0.0, 0.0});
  CHECK(flat.irr == 1.0);
  CHECK(flat.irr_sum_pct == 0.0);
  CHECK(flat.sr == 0.0);

  std::vector<double> steady(10, 0.01);
  steady[9] = 0.02;  // one different day so the deviation is nonzero
  const BenchmarkResult up = benchmark(steady);
  CHECK(up.irr == doctest::Approx(1.11).epsilon(1e-12));

  // Holding every day is the same as trading on always-up calls.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(-0.1, 0.1);
  std::vector<double> days(21);
  for (double& r : days) r = unit(rng);
  TrendOutcome always = make_outcome(std::vector<bool>(days.size(), true),
                                     std::vector<bool>(days.size(), true));
  const ReturnSeries held = trading_returns(always, days, 0.001);
  const BenchmarkResult hold = benchmark(days, 0.001);
  CHECK(hold.irr == irr(held));
  CHECK(hold.sr == sharpe(held));

  CHECK_THROWS_AS(benchmark({}), std::invalid_argument);
}

TEST_CASE("accuracy and mcc stay inside their ranges under fuzzing") {
  std::mt19937_64 rng(9090);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> length(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = length(rng);
    TrendOutcome outcome;
    outcome.predicted_up.resize(n);
    outcome.actual_up.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      outcome.predicted_up[i] = coin(rng);
      outcome.actual_up[i] = coin(rng);
    }
    const double acc = accuracy(outcome);
    const double phi = mcc(outcome);
    CAPTURE(trial);
    CHECK(acc >= 0.0);
    CHECK(acc <= 100.0);
    CHECK(phi >= -1.0);
    CHECK(phi <= 1.0);
  }
}

TEST_CASE("backtest report lines are deterministic and complete") {
  const TrendOutcome outcome =
      make_outcome({true, false, true, true, false, false},
                   {true, false, false, true, true, false});
  const std::vector<double> actual = {0.02, -0.01, -0.03, 0.01, 0.02, -0.02};
  const BacktestReport report = backtest_report(outcome, actual, 0.001);

  CHECK(report.acc == accuracy(outcome));
  CHECK(report.mcc == mcc(outcome));
  const ReturnSeries strategy = trading_returns(outcome, actual, 0.001);
  CHECK(report.irr == irr(strategy));
  CHECK(report.sr == sharpe(strategy));
  CHECK(report.benchmark_irr == benchmark(actual, 0.001).irr);

  const std::string text = report_text(report);
  for (const char* key :
       {"acc:", "mcc:", "irr_paper_formula:", "irr_sum_pct:", "sr:",
        "benchmark_irr_paper_formula:", "benchmark_irr_sum_pct:", "benchmark_sr:"}) {
    CAPTURE(key);
    CHECK(text.find(key) != std::string::npos);
  }
  CHECK(text == report_text(backtest_report(outcome, actual, 0.001)));

  const std::string row = report_row(report);
  const std::string header = report_row_header();
  CHECK(std::count(row.begin(), row.end(), '\t') == 7);
  CHECK(std::count(header.begin(), header.end(), '\t') == 7);
  CHECK(row == report_row(backtest_report(outcome, actual, 0.001)));
}

TEST_CASE("best-of-five selection and its tie breaks") {
  const std::vector<RunScore> dominant = {
      {1, 52.0, 0.010}, {2, 58.0, 0.012}, {3, 55.0, 0.008},
      {4, 51.0, 0.011}, {5, 54.0, 0.009}};
  CHECK(select_best_of_five(dominant) == 1);

  // Accuracy tie: the lower validation MSE wins.
  const std::vector<RunScore> acc_tie = {
      {1, 58.0, 0.012}, {2, 58.0, 0.007}, {3, 55.0, 0.001},
      {4, 51.0, 0.011}, {5, 58.0, 0.009}};
  CHECK(select_best_of_five(acc_tie) == 1);

  // Full metric tie: the lower seed wins.
  const std::vector<RunScore> full_tie = {
      {9, 58.0, 0.007}, {4, 58.0, 0.007}, {7, 58.0, 0.007},
      {2, 58.0, 0.007}, {6, 58.0, 0.007}};
  CHECK(select_best_of_five(full_tie) == 3);

  // Permutation invariance: the same run wins from any ordering.
  std::vector<RunScore> runs = dominant;
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(runs.begin(), runs.end(), rng);
    const std::size_t pick = select_best_of_five(runs);
    CHECK(runs[pick].seed == 2);
  }

  CHECK_THROWS_AS(select_best_of_five({{1, 50, 0.1}, {2, 50, 0.1}}), std::invalid_argument);
  const std::vector<RunScore> dup = {
      {1, 52.0, 0.010}, {1, 58.0, 0.012}, {3, 55.0, 0.008},
      {4, 51.0, 0.011}, {5, 54.0, 0.009}};
  CHECK_THROWS_AS(select_best_of_five(dup), std::invalid_argument);
  const std::vector<RunScore> bad = {
      {1, std::nan(""), 0.010}, {2, 58.0, 0.012}, {3, 55.0, 0.008},
      {4, 51.0, 0.011}, {5, 54.0, 0.009}};
  CHECK_THROWS_AS(select_best_of_five(bad), std::invalid_argument);
}
