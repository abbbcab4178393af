#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aceformer/aceemd.hpp"
#include "aceformer/checkpoint.hpp"
#include "aceformer/config.hpp"
#include "aceformer/data.hpp"
#include "aceformer/io.hpp"
#include "aceformer/metrics.hpp"
#include "aceformer/model.hpp"
#include "aceformer/sifting.hpp"
#include "aceformer/train.hpp"

namespace fs = std::filesystem;
using namespace aceformer;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

RunConfig load_config(const std::string& config_path, const std::optional<std::uint64_t>& seed) {
  RunConfig rc = config_path.empty() ? default_run_config() : load_run_config_file(config_path);
  if (seed) rc.set_seed(*seed);
  return rc;
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + name + "'");
}

// All command outputs are staged in memory and written together, each file
// atomically, so a failing command leaves nothing half-done behind.
struct OutputSet {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string contents) {
    files.emplace_back(name, std::move(contents));
  }

  void write() const {
    fs::create_directories(dir);
    std::string names;
    for (const auto& [name, contents] : files) {
      atomic_write_file((dir / name).string(), contents);
      names += names.empty() ? name : " " + name;
    }
    std::cout << "wrote " << names << " to " << dir.string() << "\n";
  }
};

TimeSeries close_series(const std::string& csv_path) {
  const std::vector<OhlcvRecord> records = load_csv(csv_path);
  TimeSeries series;
  std::vector<Date> dates;
  for (const OhlcvRecord& r : records) {
    series.values.push_back(r.close);
    dates.push_back(r.date);
  }
  series.dates = std::move(dates);
  return series;
}

std::string dated_series_text(const std::vector<Date>& dates, const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += dates[i].to_string() + "\t" + fmt_g(values[i]) + "\n";
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

void cmd_decompose(const std::string& input, const std::string& method,
                   const std::string& out_dir, const std::string& config_path,
                   const std::optional<std::uint64_t>& seed) {
  const RunConfig rc = load_config(config_path, seed);
  const TimeSeries closes = close_series(input);
  const std::vector<Date>& dates = *closes.dates;
  OutputSet out{out_dir, {}};

  std::vector<double> residual(closes.size(), 0.0);
  std::string report = "method: " + method + "\nsamples: " + std::to_string(closes.size()) + "\n";
  if (method == "aceemd") {
    const DenoiseResult result = aceemd_denoise(closes, rc.denoise);
    out.add("imf1.txt", dated_series_text(dates, result.imf1.values));
    out.add("r1.txt", dated_series_text(dates, result.r1.values));
    for (std::size_t i = 0; i < closes.size(); ++i) {
      residual[i] = closes.values[i] - (result.imf1.values[i] + result.r1.values[i]);
    }
    report += "components: 2\n";
  } else {
    const Decomposition d = emd(closes);
    for (std::size_t k = 0; k < d.imfs.size(); ++k) {
      out.add("imf_" + std::to_string(k + 1) + ".txt",
              dated_series_text(dates, d.imfs[k].values));
    }
    out.add("residue.txt", dated_series_text(dates, d.residue.values));
    for (std::size_t i = 0; i < closes.size(); ++i) {
      double sum = d.residue.values[i];
      for (const TimeSeries& imf : d.imfs) sum += imf.values[i];
      residual[i] = closes.values[i] - sum;
    }
    report += "components: " + std::to_string(d.imfs.size() + 1) + "\n";
  }
  report += "max_reconstruction_residual: " + fmt_g(max_abs(residual)) + "\n";
  out.add("report.txt", report);
  out.write();
}

void cmd_denoise(const std::string& input, const std::string& out_dir,
                 const std::string& config_path, const std::optional<std::uint64_t>& seed) {
  const RunConfig rc = load_config(config_path, seed);
  const TimeSeries closes = close_series(input);
  const std::vector<Date>& dates = *closes.dates;
  const DenoiseResult result = aceemd_denoise(closes, rc.denoise);

  std::vector<double> residual(closes.size());
  for (std::size_t i = 0; i < closes.size(); ++i) {
    residual[i] = closes.values[i] - (result.imf1.values[i] + result.r1.values[i]);
  }
  OutputSet out{out_dir, {}};
  out.add("denoised.txt", dated_series_text(dates, result.r1.values));
  out.add("imf1.txt", dated_series_text(dates, result.imf1.values));
  out.add("report.txt", "method: aceemd\nsamples: " + std::to_string(closes.size()) +
                            "\nensemble_size: " + std::to_string(rc.denoise.ensemble_size) +
                            "\nmax_reconstruction_residual: " + fmt_g(max_abs(residual)) + "\n");
  out.write();
}

void cmd_train(const std::string& config_path, const std::string& out_dir,
               const std::optional<std::uint64_t>& seed) {
  const RunConfig rc = load_config(config_path, seed);
  const WindowedDataset dataset = build_dataset(rc);
  const TrainSplit split = make_training_split(dataset);

  AceFormer model(rc.model);
  const TrainResult result = train_model(model, split, rc.train);

  OutputSet out{out_dir, {}};
  out.add("checkpoint.txt", checkpoint_text(model.to_checkpoint()));
  out.add("history.txt", history_text(result));
  out.add("manifest.txt", dataset_manifest(dataset));
  out.write();
}

void cmd_train_five(const std::string& config_path, const std::string& out_dir,
                    const std::optional<std::uint64_t>& seed) {
  const RunConfig rc = load_config(config_path, seed);
  const WindowedDataset dataset = build_dataset(rc);
  const FiveRunResult result = train_five(rc.model, dataset, rc.train);

  OutputSet out{out_dir, {}};
  for (const SeedRun& run : result.runs) {
    const std::string tag = "_seed_" + std::to_string(run.seed) + ".txt";
    out.add("checkpoint" + tag, checkpoint_text(run.checkpoint));
    out.add("history" + tag, history_text(run.training));
  }
  out.add("selection.txt", selection_report(result));
  out.add("manifest.txt", dataset_manifest(dataset));
  out.write();
}

// The checkpoint decides the model; the config must agree on every shape.
void check_shapes(const ModelConfig& expected, const ModelConfig& found) {
  const std::pair<const char*, std::pair<std::size_t, std::size_t>> dims[] = {
      {"input_window", {expected.input_window, found.input_window}},
      {"predict_days", {expected.predict_days, found.predict_days}},
      {"feature_width", {expected.feature_width, found.feature_width}},
      {"d_model", {expected.d_model, found.d_model}},
      {"n_heads", {expected.n_heads, found.n_heads}},
  };
  for (const auto& [name, pair] : dims) {
    if (pair.first != pair.second) {
      throw std::invalid_argument("checkpoint " + std::string(name) + " is " +
                                  std::to_string(pair.second) + ", the config expects " +
                                  std::to_string(pair.first));
    }
  }
}

void cmd_predict(const std::string& config_path, const std::string& checkpoint_path,
                 const std::string& out_dir, const std::string& split_name) {
  const RunConfig rc = load_config(config_path, std::nullopt);
  const WindowedDataset dataset = build_dataset(rc);
  const AceFormer model = AceFormer::from_checkpoint(load_checkpoint(checkpoint_path));
  check_shapes(rc.model, model.config());

  const CloseForecasts closes = forecast_closes(model, dataset, parse_split(split_name));
  std::string text = "date\tpredicted\tactual\tprior\n";
  for (std::size_t i = 0; i < closes.predicted.size(); ++i) {
    text += closes.dates[i].to_string() + "\t" + fmt_g(closes.predicted[i]) + "\t" +
            fmt_g(closes.actual[i]) + "\t" + fmt_g(closes.prior[i]) + "\n";
  }
  OutputSet out{out_dir, {}};
  out.add("predictions.txt", text);
  out.write();
}

void cmd_backtest(const std::string& config_path, const std::string& checkpoint_path,
                  const std::string& out_dir, const std::string& split_name,
                  const std::string& predictor) {
  const RunConfig rc = load_config(config_path, std::nullopt);
  const WindowedDataset dataset = build_dataset(rc);
  const Split split = parse_split(split_name);

  CloseForecasts closes;
  if (predictor == "model") {
    if (checkpoint_path.empty()) {
      throw std::invalid_argument("backtest: --checkpoint is required with the model predictor");
    }
    const AceFormer model = AceFormer::from_checkpoint(load_checkpoint(checkpoint_path));
    check_shapes(rc.model, model.config());
    closes = forecast_closes(model, dataset, split);
  } else {
    closes = oracle_forecasts(dataset, split);
    if (predictor == "always-up") {
      for (std::size_t i = 0; i < closes.predicted.size(); ++i) {
        closes.predicted[i] = closes.prior[i] + 1.0;
      }
    }
  }

  const BacktestReport report = report_from_forecasts(closes, rc.risk_free);
  const std::vector<double> returns = actual_returns_of(closes);
  const TrendOutcome outcome =
      trend_from_predictions(closes.predicted, closes.actual, closes.prior);
  const ReturnSeries strategy = trading_returns(outcome, returns, rc.risk_free);
  std::vector<double> held(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) held[i] = std::clamp(returns[i], -1.0, 1.0);

  OutputSet out{out_dir, {}};
  out.add("report.txt", report_text(report));
  out.add("table.txt", report_row_header() + "\n" + report_row(report) + "\n");
  out.add("predicted.txt", dated_series_text(closes.dates, closes.predicted));
  out.add("actual.txt", dated_series_text(closes.dates, closes.actual));
  out.add("strategy_returns.txt", dated_series_text(closes.dates, strategy.daily_returns));
  out.add("benchmark_returns.txt", dated_series_text(closes.dates, held));
  out.write();
}

// A plot input is either one value per line or "label<TAB>value" rows.
struct PlotColumn {
  std::vector<std::string> index;   // empty when the file has one column
  std::vector<std::string> values;  // copied verbatim, never reformatted
};

PlotColumn read_plot_column(const std::string& path) {
  const std::string text = read_file(path);
  PlotColumn col;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (line.empty()) {
      throw std::runtime_error("plot-data: " + path + " contains a blank line");
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      col.values.push_back(line);
    } else {
      if (line.find('\t', tab + 1) != std::string::npos) {
        throw std::runtime_error("plot-data: " + path + " has more than two columns");
      }
      col.index.push_back(line.substr(0, tab));
      col.values.push_back(line.substr(tab + 1));
    }
  }
  if (col.values.empty()) throw std::runtime_error("plot-data: " + path + " is empty");
  if (!col.index.empty() && col.index.size() != col.values.size()) {
    throw std::runtime_error("plot-data: " + path + " mixes one- and two-column rows");
  }
  return col;
}

void cmd_plot_data(const std::vector<std::string>& inputs, const std::string& out_file) {
  std::vector<PlotColumn> columns;
  for (const std::string& path : inputs) columns.push_back(read_plot_column(path));

  const std::size_t rows = columns.front().values.size();
  const bool dated = !columns.front().index.empty();
  for (std::size_t c = 1; c < columns.size(); ++c) {
    if (columns[c].values.size() != rows) {
      throw std::runtime_error("plot-data: " + inputs[c] + " has " +
                               std::to_string(columns[c].values.size()) + " rows, expected " +
                               std::to_string(rows));
    }
    if (columns[c].index.empty() != !dated) {
      throw std::runtime_error("plot-data: " + inputs[c] +
                               (dated ? " lacks the label column the other inputs have"
                                      : " has a label column the other inputs lack"));
    }
    if (dated && columns[c].index != columns.front().index) {
      throw std::runtime_error("plot-data: " + inputs[c] + " labels do not match " + inputs[0]);
    }
  }

  std::string text;
  for (std::size_t r = 0; r < rows; ++r) {
    text += dated ? columns.front().index[r] : std::to_string(r + 1);
    for (const PlotColumn& col : columns) text += "\t" + col.values[r];
    text += "\n";
  }
  const fs::path out(out_file);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  atomic_write_file(out_file, text);
  std::cout << "wrote " << out_file << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stock-series decomposition, denoising, training, and backtesting"};
  app.require_subcommand(1);

  std::string config_path, input, out_dir, out_file, method = "aceemd";
  std::string checkpoint_path, split_name = "test", predictor = "model";
  std::vector<std::string> plot_inputs;
  std::optional<std::uint64_t> seed;

  auto* decompose = app.add_subcommand("decompose", "split a close series into components");
  decompose->add_option("--input", input, "OHLCV csv")->required();
  decompose->add_option("--method", method, "emd or aceemd")
      ->check(CLI::IsMember({"emd", "aceemd"}));
  decompose->add_option("--out", out_dir, "output directory")->required();
  decompose->add_option("--config", config_path, "config file");
  decompose->add_option("--seed", seed, "master seed override");
  decompose->callback([&] { cmd_decompose(input, method, out_dir, config_path, seed); });

  auto* denoise = app.add_subcommand("denoise", "remove the fastest component of a close series");
  denoise->add_option("--input", input, "OHLCV csv")->required();
  denoise->add_option("--out", out_dir, "output directory")->required();
  denoise->add_option("--config", config_path, "config file");
  denoise->add_option("--seed", seed, "master seed override");
  denoise->callback([&] { cmd_denoise(input, out_dir, config_path, seed); });

  auto* train = app.add_subcommand("train", "train one model");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed, "master seed override");
  train->callback([&] { cmd_train(config_path, out_dir, seed); });

  auto* train_five_cmd = app.add_subcommand("train-five", "five seeded runs plus selection");
  train_five_cmd->add_option("--config", config_path, "config file")->required();
  train_five_cmd->add_option("--out", out_dir, "output directory")->required();
  train_five_cmd->add_option("--seed", seed, "master seed override");
  train_five_cmd->callback([&] { cmd_train_five(config_path, out_dir, seed); });

  auto* predict = app.add_subcommand("predict", "per-day close forecasts for one split");
  predict->add_option("--config", config_path, "config file")->required();
  predict->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  predict->add_option("--out", out_dir, "output directory")->required();
  predict->add_option("--split", split_name, "train, val, or test")
      ->check(CLI::IsMember({"train", "val", "test"}));
  predict->callback([&] { cmd_predict(config_path, checkpoint_path, out_dir, split_name); });

  auto* backtest = app.add_subcommand("backtest", "metrics and plot series for one split");
  backtest->add_option("--config", config_path, "config file")->required();
  backtest->add_option("--checkpoint", checkpoint_path, "model checkpoint");
  backtest->add_option("--out", out_dir, "output directory")->required();
  backtest->add_option("--split", split_name, "train, val, or test")
      ->check(CLI::IsMember({"train", "val", "test"}));
  backtest->add_option("--predictor", predictor, "model, oracle, or always-up")
      ->check(CLI::IsMember({"model", "oracle", "always-up"}));
  backtest->callback(
      [&] { cmd_backtest(config_path, checkpoint_path, out_dir, split_name, predictor); });

  auto* plot = app.add_subcommand("plot-data", "align series files into one table");
  plot->add_option("inputs", plot_inputs, "series files")->required();
  plot->add_option("--out", out_file, "output file")->required();
  plot->callback([&] { cmd_plot_data(plot_inputs, out_file); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
