#include "aceformer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace aceformer {

namespace {

void check_outcome(const TrendOutcome& outcome, const char* where) {
  if (outcome.predicted_up.size() != outcome.actual_up.size()) {
    throw std::invalid_argument(std::string(where) +
                                ": predicted and actual arrays differ in length");
  }
  if (outcome.predicted_up.empty()) {
    throw std::invalid_argument(std::string(where) + ": no evaluation days");
  }
}

void check_returns(const ReturnSeries& returns, const char* where) {
  if (!std::isfinite(returns.risk_free)) {
    throw std::invalid_argument(std::string(where) + ": risk-free rate is not finite");
  }
  for (double r : returns.daily_returns) {
    if (!std::isfinite(r) || r < -1.0 || r > 1.0) {
      throw std::invalid_argument(std::string(where) +
                                  ": daily returns must be finite and within [-1, 1]");
    }
  }
}

double clamp_return(double r) { return std::clamp(r, -1.0, 1.0); }

double sum_returns(const ReturnSeries& returns) {
  double sum = 0.0;
  for (double r : returns.daily_returns) sum += r;
  return sum;
}

std::string fmt_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

TrendOutcome trend_from_predictions(const std::vector<double>& predicted_closes,
                                    const std::vector<double>& actual_closes,
                                    const std::vector<double>& prior_closes) {
  const std::size_t n = predicted_closes.size();
  if (actual_closes.size() != n || prior_closes.size() != n) {
    throw std::invalid_argument("trend: the three close arrays differ in length");
  }
  if (n == 0) throw std::invalid_argument("trend: no evaluation days");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(predicted_closes[i]) || !std::isfinite(actual_closes[i]) ||
        !std::isfinite(prior_closes[i])) {
      throw std::invalid_argument("trend: closes must be finite");
    }
  }
  TrendOutcome outcome;
  outcome.predicted_up.resize(n);
  outcome.actual_up.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    outcome.predicted_up[i] = predicted_closes[i] > prior_closes[i];
    outcome.actual_up[i] = actual_closes[i] > prior_closes[i];
  }
  return outcome;
}

double accuracy(const TrendOutcome& outcome) {
  check_outcome(outcome, "accuracy");
  std::size_t match = 0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (outcome.predicted_up[i] == outcome.actual_up[i]) ++match;
  }
  return 100.0 * (double)match / (double)outcome.size();
}

double mcc(const TrendOutcome& outcome) {
  check_outcome(outcome, "mcc");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    const bool p = outcome.predicted_up[i];
    const bool a = outcome.actual_up[i];
    if (p && a) ++tp;
    else if (!p && !a) ++tn;
    else if (p && !a) ++fp;
    else ++fn;
  }
  const double f1 = tp + fp;
  const double f2 = tp + fn;
  const double f3 = tn + fp;
  const double f4 = tn + fn;
  if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(f1 * f2 * f3 * f4);
}

ReturnSeries trading_returns(const TrendOutcome& outcome,
                             const std::vector<double>& actual_daily_returns,
                             double risk_free) {
  check_outcome(outcome, "trading");
  if (actual_daily_returns.size() != outcome.size()) {
    throw std::invalid_argument("trading: returns array does not match the outcome length");
  }
  if (!std::isfinite(risk_free)) {
    throw std::invalid_argument("trading: risk-free rate is not finite");
  }
  ReturnSeries series;
  series.risk_free = risk_free;
  series.daily_returns.resize(outcome.size());
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    const double r = actual_daily_returns[i];
    if (!std::isfinite(r)) {
      throw std::invalid_argument("trading: daily returns must be finite");
    }
    series.daily_returns[i] = outcome.predicted_up[i] ? clamp_return(r) : 0.0;
  }
  return series;
}

double irr(const ReturnSeries& returns) {
  check_returns(returns, "irr");
  return sum_returns(returns) + 1.0;
}

double irr_sum_pct(const ReturnSeries& returns) {
  check_returns(returns, "irr");
  return 100.0 * sum_returns(returns);
}

double sharpe(const ReturnSeries& returns) {
  check_returns(returns, "sharpe");
  const std::size_t n = returns.daily_returns.size();
  if (n < 2) {
    throw std::invalid_argument("sharpe: need at least two days of returns");
  }
  double mean = 0.0;
  for (double r : returns.daily_returns) mean += r - returns.risk_free;
  mean /= (double)n;
  double ss = 0.0;
  for (double r : returns.daily_returns) {
    const double d = (r - returns.risk_free) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (double)(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) return 0.0;
    throw DegenerateSharpeError(
        "sharpe: constant nonzero excess return has no meaningful ratio");
  }
  return mean / sd;
}

BenchmarkResult benchmark(const std::vector<double>& actual_daily_returns,
                          double risk_free) {
  if (actual_daily_returns.empty()) {
    throw std::invalid_argument("benchmark: no evaluation days");
  }
  ReturnSeries series;
  series.risk_free = risk_free;
  series.daily_returns.resize(actual_daily_returns.size());
  for (std::size_t i = 0; i < actual_daily_returns.size(); ++i) {
    const double r = actual_daily_returns[i];
    if (!std::isfinite(r)) {
      throw std::invalid_argument("benchmark: daily returns must be finite");
    }
    series.daily_returns[i] = clamp_return(r);
  }
  BenchmarkResult result;
  result.irr = irr(series);
  result.irr_sum_pct = irr_sum_pct(series);
  result.sr = sharpe(series);
  return result;
}

BacktestReport backtest_report(const TrendOutcome& outcome,
                               const std::vector<double>& actual_daily_returns,
                               double risk_free) {
  BacktestReport report;
  report.acc = accuracy(outcome);
  report.mcc = mcc(outcome);
  const ReturnSeries strategy = trading_returns(outcome, actual_daily_returns, risk_free);
  report.irr = irr(strategy);
  report.irr_sum_pct = irr_sum_pct(strategy);
  report.sr = sharpe(strategy);
  const BenchmarkResult hold = benchmark(actual_daily_returns, risk_free);
  report.benchmark_irr = hold.irr;
  report.benchmark_irr_sum_pct = hold.irr_sum_pct;
  report.benchmark_sr = hold.sr;
  return report;
}

std::string report_text(const BacktestReport& report) {
  std::ostringstream out;
  out << "acc: " << fmt_metric(report.acc) << "\n";
  out << "mcc: " << fmt_metric(report.mcc) << "\n";
  out << "irr_paper_formula: " << fmt_metric(report.irr) << "\n";
  out << "irr_sum_pct: " << fmt_metric(report.irr_sum_pct) << "\n";
  out << "sr: " << fmt_metric(report.sr) << "\n";
  out << "benchmark_irr_paper_formula: " << fmt_metric(report.benchmark_irr) << "\n";
  out << "benchmark_irr_sum_pct: " << fmt_metric(report.benchmark_irr_sum_pct) << "\n";
  out << "benchmark_sr: " << fmt_metric(report.benchmark_sr) << "\n";
  return out.str();
}

std::string report_row_header() {
  return "acc\tmcc\tirr_paper_formula\tirr_sum_pct\tsr\t"
         "benchmark_irr_paper_formula\tbenchmark_irr_sum_pct\tbenchmark_sr";
}

std::string report_row(const BacktestReport& report) {
  std::ostringstream out;
  out << fmt_metric(report.acc) << '\t' << fmt_metric(report.mcc) << '\t'
      << fmt_metric(report.irr) << '\t' << fmt_metric(report.irr_sum_pct) << '\t'
      << fmt_metric(report.sr) << '\t' << fmt_metric(report.benchmark_irr) << '\t'
      << fmt_metric(report.benchmark_irr_sum_pct) << '\t'
      << fmt_metric(report.benchmark_sr);
  return out.str();
}

std::size_t select_best_of_five(const std::vector<RunScore>& runs) {
  if (runs.size() != 5) {
    throw std::invalid_argument("select: expected exactly five runs");
  }
  std::set<std::uint64_t> seeds;
  for (const RunScore& run : runs) {
    if (!std::isfinite(run.val_acc) || !std::isfinite(run.val_mse)) {
      throw std::invalid_argument("select: run scores must be finite");
    }
    if (!seeds.insert(run.seed).second) {
      throw std::invalid_argument("select: runs must use distinct seeds");
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const RunScore& a = runs[i];
    const RunScore& b = runs[best];
    const bool wins = a.val_acc > b.val_acc ||
                      (a.val_acc == b.val_acc &&
                       (a.val_mse < b.val_mse ||
                        (a.val_mse == b.val_mse && a.seed < b.seed)));
    if (wins) best = i;
  }
  return best;
}

}  // namespace aceformer
