#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aceformer {

// Per-day direction calls, one entry per evaluation day.
struct TrendOutcome {
  std::vector<bool> predicted_up;
  std::vector<bool> actual_up;

  std::size_t size() const { return predicted_up.size(); }
};

// Daily fractional returns of a strategy, each clamped to [-1, 1], plus the
// constant daily risk-free rate they are measured against.
struct ReturnSeries {
  std::vector<double> daily_returns;
  double risk_free = 0.0;
};

// A strategy with constant nonzero excess return has zero variance; its
// Sharpe ratio is not a number, and callers should treat the run as invalid.
struct DegenerateSharpeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Up-calls against the last close known before each day; an exact tie is
// not-up on both sides.
TrendOutcome trend_from_predictions(const std::vector<double>& predicted_closes,
                                    const std::vector<double>& actual_closes,
                                    const std::vector<double>& prior_closes);

// 100 * matching days / total days.
double accuracy(const TrendOutcome& outcome);

// Matthews correlation of the two boolean arrays; any empty confusion-matrix
// margin makes the denominator zero and the coefficient 0 by convention.
double mcc(const TrendOutcome& outcome);

// Long-or-flat: take the day's actual return when the call was up, else sit
// out. Returns are clamped to [-1, 1].
ReturnSeries trading_returns(const TrendOutcome& outcome,
                             const std::vector<double>& actual_daily_returns,
                             double risk_free = 0.0);

// Additive investment return: sum of daily returns plus one.
double irr(const ReturnSeries& returns);

// The same sum reported as a percentage, the way results tables quote it.
double irr_sum_pct(const ReturnSeries& returns);

// Mean over sample standard deviation of daily excess returns.
double sharpe(const ReturnSeries& returns);

struct BenchmarkResult {
  double irr = 0.0;
  double irr_sum_pct = 0.0;
  double sr = 0.0;
};

// Buy-and-hold every day, same clamping as the trading rule.
BenchmarkResult benchmark(const std::vector<double>& actual_daily_returns,
                          double risk_free = 0.0);

struct BacktestReport {
  double acc = 0.0;
  double mcc = 0.0;
  double irr = 0.0;          // sum of dailies + 1
  double irr_sum_pct = 0.0;  // the same sum as a percentage
  double sr = 0.0;
  double benchmark_irr = 0.0;
  double benchmark_irr_sum_pct = 0.0;
  double benchmark_sr = 0.0;
};

BacktestReport backtest_report(const TrendOutcome& outcome,
                               const std::vector<double>& actual_daily_returns,
                               double risk_free = 0.0);

// One "key: value" line per metric.
std::string report_text(const BacktestReport& report);

// Tab-separated row (and its header) for tabulating several runs.
std::string report_row_header();
std::string report_row(const BacktestReport& report);

// Validation-set scores of one seeded training run.
struct RunScore {
  std::uint64_t seed = 0;
  double val_acc = 0.0;
  double val_mse = 0.0;
};

// Index of the winning run: best validation accuracy, ties broken by lower
// validation MSE, then by lower seed. Requires exactly five distinct seeds.
std::size_t select_best_of_five(const std::vector<RunScore>& runs);

}  // namespace aceformer
