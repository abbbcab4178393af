#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aceformer/checkpoint.hpp"
#include "aceformer/config.hpp"
#include "aceformer/data.hpp"
#include "aceformer/io.hpp"
#include "aceformer/model.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace aceformer;

namespace {

const fs::path kRoot = "/tmp/aceformer_cli_tests";

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const std::string& args) {
  fs::create_directories(kRoot);
  const fs::path out_file = kRoot / "stdout.txt";
  const fs::path err_file = kRoot / "stderr.txt";
  const std::string cmd = std::string(ACEFORMER_BIN) + " " + args + " > " + out_file.string() +
                          " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_file.string());
  result.err = read_file(err_file.string());
  return result;
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Full OHLCV file for the primary source; index sources get flat OHLC rows
// built from their close series.
void write_panel_csvs(const AlignedPanel& panel, const fs::path& dir) {
  std::string primary = "date,open,high,low,close,volume\n";
  std::string index_a = "date,open,high,low,close,volume\n";
  std::string index_b = "date,open,high,low,close,volume\n";
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const OhlcvRecord& r = panel.primary[i];
    primary += r.date.to_string() + "," + csv_number(r.open) + "," + csv_number(r.high) + "," +
               csv_number(r.low) + "," + csv_number(r.close) + "," + csv_number(r.volume) + "\n";
    const std::string a = csv_number(panel.index_a_close[i]);
    const std::string b = csv_number(panel.index_b_close[i]);
    index_a += r.date.to_string() + "," + a + "," + a + "," + a + "," + a + ",0\n";
    index_b += r.date.to_string() + "," + b + "," + b + "," + b + "," + b + ",0\n";
  }
  atomic_write_file((dir / "primary.csv").string(), primary);
  atomic_write_file((dir / "index_a.csv").string(), index_a);
  atomic_write_file((dir / "index_b.csv").string(), index_b);
}

// Shared scenario: 64-day panel, window 10, p = 2, small model. Built once;
// individual tests write their outputs into their own subdirectories.
struct Scenario {
  fs::path dir = kRoot / "scenario";
  AlignedPanel panel;
  std::string config_path;

  Scenario() {
    static bool built = false;
    panel = testsupport::synthetic_panel(64, 2024);
    config_path = (dir / "run.cfg").string();
    if (built) return;
    fs::create_directories(dir);
    write_panel_csvs(panel, dir);
    atomic_write_file(config_path, config_text());
    built = true;
  }

  std::string config_text(const std::string& extra_train = "", std::uint64_t seed = 11) const {
    return "[data]\n"
           "primary = " + (dir / "primary.csv").string() + "\n"
           "index_a = " + (dir / "index_a.csv").string() + "\n"
           "index_b = " + (dir / "index_b.csv").string() + "\n"
           "val_start = " + panel.dates[40].to_string() + "\n"
           "test_start = " + panel.dates[52].to_string() + "\n"
           "\n[model]\n"
           "input_window = 10\n"
           "predict_days = 2\n"
           "d_model = 8\n"
           "n_heads = 2\n"
           "denoise = false\n"
           "\n[train]\n"
           "lr = 0.001\n"
           "batch_size = 16\n"
           "max_epochs = 2\n" +
           extra_train +
           "\n[run]\n"
           "seed = " + std::to_string(seed) + "\n";
  }
};

std::vector<std::pair<std::string, double>> read_dated_series(const fs::path& path) {
  const std::string text = read_file(path.string());
  std::vector<std::pair<std::string, double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const std::size_t tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    rows.emplace_back(line.substr(0, tab), std::strtod(line.c_str() + tab + 1, nullptr));
  }
  return rows;
}

std::map<std::string, std::string> read_report(const fs::path& path) {
  const std::string text = read_file(path.string());
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const std::size_t colon = line.find(": ");
    if (colon != std::string::npos) kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return kv;
}

std::size_t count_files(const fs::path& dir, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("decompose writes components that rebuild the close series") {
  const Scenario sc;
  const fs::path out = kRoot / "decompose_aceemd";
  fs::remove_all(out);

  const CmdResult r = run_cli("decompose --input " + (sc.dir / "primary.csv").string() +
                              " --method aceemd --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  const auto imf1 = read_dated_series(out / "imf1.txt");
  const auto r1 = read_dated_series(out / "r1.txt");
  REQUIRE(imf1.size() == sc.panel.size());
  REQUIRE(r1.size() == imf1.size());
  for (std::size_t i = 0; i < imf1.size(); ++i) {
    CHECK(imf1[i].first == sc.panel.dates[i].to_string());
    // The written values carry 12 significant digits; the exact residual is
    // asserted from the report below.
    CHECK(std::fabs(imf1[i].second + r1[i].second - sc.panel.primary[i].close) < 1e-8);
  }
  const auto report = read_report(out / "report.txt");
  CHECK(report.at("method") == "aceemd");
  CHECK(report.at("samples") == "64");
  CHECK(std::strtod(report.at("max_reconstruction_residual").c_str(), nullptr) < 1e-12);

  // Rerunning the command overwrites every file with identical bytes.
  const std::string first = read_file((out / "imf1.txt").string());
  const CmdResult again = run_cli("decompose --input " + (sc.dir / "primary.csv").string() +
                                  " --method aceemd --out " + out.string());
  REQUIRE(again.exit_code == 0);
  CHECK(read_file((out / "imf1.txt").string()) == first);
}

TEST_CASE("decompose emd writes one file per component") {
  const Scenario sc;
  const fs::path out = kRoot / "decompose_emd";
  fs::remove_all(out);

  const CmdResult r = run_cli("decompose --input " + (sc.dir / "primary.csv").string() +
                              " --method emd --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(out / "residue.txt"));

  const auto report = read_report(out / "report.txt");
  const std::size_t components = std::strtoull(report.at("components").c_str(), nullptr, 10);
  CHECK(count_files(out, "imf_") == components - 1);
  CHECK(std::strtod(report.at("max_reconstruction_residual").c_str(), nullptr) < 1e-12);
}

TEST_CASE("missing input exits nonzero and writes nothing") {
  const fs::path out = kRoot / "decompose_missing";
  fs::remove_all(out);
  const CmdResult r =
      run_cli("decompose --input /nonexistent.csv --method aceemd --out " + out.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error:", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("denoise emits the residue series under its own name") {
  const Scenario sc;
  const fs::path out = kRoot / "denoise";
  fs::remove_all(out);
  const CmdResult r = run_cli("denoise --input " + (sc.dir / "primary.csv").string() +
                              " --out " + out.string() + " --seed 5");
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(read_dated_series(out / "denoised.txt").size() == sc.panel.size());
  CHECK(read_dated_series(out / "imf1.txt").size() == sc.panel.size());
  const auto report = read_report(out / "report.txt");
  CHECK(report.at("ensemble_size") == "5");
  CHECK(std::strtod(report.at("max_reconstruction_residual").c_str(), nullptr) < 1e-12);
}

TEST_CASE("zero learning rate trains to the initialization checkpoint") {
  const Scenario sc;
  const fs::path out = kRoot / "train_lr0";
  fs::remove_all(out);
  const std::string cfg = (kRoot / "lr0.cfg").string();
  atomic_write_file(cfg, sc.config_text("", 11) + "\n");

  // First with the scenario's lr = 0.001 so there is a moving run to compare.
  const CmdResult r = run_cli("train --config " + cfg + " --out " + out.string() + " --seed 11");
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  std::string lr0_text = sc.config_text("", 11);
  lr0_text.replace(lr0_text.find("lr = 0.001"), 10, "lr = 0");
  atomic_write_file(cfg, lr0_text);
  const fs::path out0 = kRoot / "train_lr0_really";
  fs::remove_all(out0);
  const CmdResult r0 = run_cli("train --config " + cfg + " --out " + out0.string());
  CAPTURE(r0.err);
  REQUIRE(r0.exit_code == 0);

  RunConfig rc = load_run_config_file(cfg);
  const AceFormer untouched(rc.model);
  CHECK(read_file((out0 / "checkpoint.txt").string()) ==
        checkpoint_text(untouched.to_checkpoint()));
  // The lr > 0 run must have moved away from the initialization.
  CHECK(read_file((out / "checkpoint.txt").string()) !=
        checkpoint_text(untouched.to_checkpoint()));
}

TEST_CASE("same seed reruns reproduce the history byte for byte") {
  const Scenario sc;
  const fs::path out1 = kRoot / "train_rep1";
  const fs::path out2 = kRoot / "train_rep2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  const CmdResult r1 =
      run_cli("train --config " + sc.config_path + " --out " + out1.string() + " --seed 3");
  const CmdResult r2 =
      run_cli("train --config " + sc.config_path + " --out " + out2.string() + " --seed 3");
  CAPTURE(r1.err);
  CAPTURE(r2.err);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(read_file((out1 / "history.txt").string()) == read_file((out2 / "history.txt").string()));
  CHECK(read_file((out1 / "checkpoint.txt").string()) ==
        read_file((out2 / "checkpoint.txt").string()));
  CHECK(read_file((out1 / "manifest.txt").string()) ==
        read_file((out2 / "manifest.txt").string()));

  const CmdResult other =
      run_cli("train --config " + sc.config_path + " --out " + out2.string() + " --seed 4");
  REQUIRE(other.exit_code == 0);
  CHECK(read_file((out1 / "history.txt").string()) != read_file((out2 / "history.txt").string()));
}

TEST_CASE("train-five writes five checkpoints and names the chosen seed") {
  const Scenario sc;
  const fs::path out = kRoot / "five";
  fs::remove_all(out);
  const CmdResult r =
      run_cli("train-five --config " + sc.config_path + " --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  CHECK(count_files(out, "checkpoint_seed_") == 5);
  CHECK(count_files(out, "history_seed_") == 5);
  for (std::uint64_t seed = 11; seed < 16; ++seed) {
    CAPTURE(seed);
    CHECK(fs::exists(out / ("checkpoint_seed_" + std::to_string(seed) + ".txt")));
  }
  const std::string selection = read_file((out / "selection.txt").string());
  CHECK(selection.rfind("seed\tval_acc\tval_mse\n", 0) == 0);
  CHECK(selection.find("chosen_seed: ") != std::string::npos);

  const fs::path out2 = kRoot / "five_again";
  fs::remove_all(out2);
  REQUIRE(run_cli("train-five --config " + sc.config_path + " --out " + out2.string())
              .exit_code == 0);
  CHECK(read_file((out2 / "selection.txt").string()) == selection);
}

TEST_CASE("oracle and always-up predictors hit their closed forms") {
  const Scenario sc;
  const fs::path oracle = kRoot / "backtest_oracle";
  fs::remove_all(oracle);
  const CmdResult r = run_cli("backtest --config " + sc.config_path +
                              " --predictor oracle --out " + oracle.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  auto report = read_report(oracle / "report.txt");
  CHECK(report.at("acc") == "100");
  CHECK(report.at("mcc") == "1");

  const fs::path up = kRoot / "backtest_up";
  fs::remove_all(up);
  REQUIRE(run_cli("backtest --config " + sc.config_path + " --predictor always-up --out " +
                  up.string())
              .exit_code == 0);
  report = read_report(up / "report.txt");
  CHECK(report.at("irr_paper_formula") == report.at("benchmark_irr_paper_formula"));
  CHECK(report.at("sr") == report.at("benchmark_sr"));
  CHECK(read_file((up / "strategy_returns.txt").string()) ==
        read_file((up / "benchmark_returns.txt").string()));
}

TEST_CASE("model backtest stays inside the metric ranges") {
  const Scenario sc;
  const fs::path train_out = kRoot / "backtest_train";
  const fs::path bt = kRoot / "backtest_model";
  fs::remove_all(train_out);
  fs::remove_all(bt);
  REQUIRE(run_cli("train --config " + sc.config_path + " --out " + train_out.string())
              .exit_code == 0);
  const CmdResult r =
      run_cli("backtest --config " + sc.config_path + " --checkpoint " +
              (train_out / "checkpoint.txt").string() + " --out " + bt.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  const auto report = read_report(bt / "report.txt");
  const double acc = std::strtod(report.at("acc").c_str(), nullptr);
  const double mcc_v = std::strtod(report.at("mcc").c_str(), nullptr);
  CHECK(acc >= 0.0);
  CHECK(acc <= 100.0);
  CHECK(mcc_v >= -1.0);
  CHECK(mcc_v <= 1.0);
  const std::string table = read_file((bt / "table.txt").string());
  CHECK(table.rfind("acc\tmcc\t", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);

  // Predict against the same checkpoint: header plus one row per test day.
  const fs::path pred = kRoot / "predict";
  fs::remove_all(pred);
  REQUIRE(run_cli("predict --config " + sc.config_path + " --checkpoint " +
                  (train_out / "checkpoint.txt").string() + " --out " + pred.string())
              .exit_code == 0);
  const std::string predictions = read_file((pred / "predictions.txt").string());
  CHECK(predictions.rfind("date\tpredicted\tactual\tprior\n", 0) == 0);
  CHECK((std::size_t)std::count(predictions.begin(), predictions.end(), '\n') ==
        read_dated_series(bt / "actual.txt").size() + 1);
}

TEST_CASE("mismatched checkpoint shapes name the offending field") {
  const Scenario sc;
  const fs::path train_out = kRoot / "shape_train";
  fs::remove_all(train_out);

  // A checkpoint trained with a different window must be refused.
  const std::string cfg12 = (kRoot / "window12.cfg").string();
  std::string text = sc.config_text();
  text.replace(text.find("input_window = 10"), 17, "input_window = 12");
  atomic_write_file(cfg12, text);
  REQUIRE(run_cli("train --config " + cfg12 + " --out " + train_out.string()).exit_code == 0);

  const fs::path bt = kRoot / "shape_backtest";
  fs::remove_all(bt);
  const CmdResult r =
      run_cli("backtest --config " + sc.config_path + " --checkpoint " +
              (train_out / "checkpoint.txt").string() + " --out " + bt.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("input_window") != std::string::npos);
  CHECK(r.err.find("12") != std::string::npos);
  CHECK(r.err.find("10") != std::string::npos);
  CHECK_FALSE(fs::exists(bt));
}

TEST_CASE("invalid configuration stops a run before any training") {
  const Scenario sc;
  const std::string bad_cfg = (kRoot / "bad.cfg").string();
  std::string text = sc.config_text();
  text.replace(text.find("d_model = 8"), 11, "d_model = 7");
  atomic_write_file(bad_cfg, text);

  const fs::path out = kRoot / "bad_train";
  fs::remove_all(out);
  const CmdResult r = run_cli("train --config " + bad_cfg + " --out " + out.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error:", 0) == 0);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("plot-data overlays series and keeps the bytes") {
  const Scenario sc;
  const fs::path dir = kRoot / "plot";
  fs::create_directories(dir);

  // Two dated series from a backtest run made earlier in this scenario.
  const fs::path up = kRoot / "backtest_up";
  REQUIRE(fs::exists(up / "predicted.txt"));
  const fs::path merged = dir / "overlay.txt";
  const CmdResult r = run_cli("plot-data " + (up / "predicted.txt").string() + " " +
                              (up / "actual.txt").string() + " --out " + merged.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  const auto predicted = read_file((up / "predicted.txt").string());
  const auto actual = read_file((up / "actual.txt").string());
  std::string expected;
  std::size_t p1 = 0, p2 = 0;
  while (p1 < predicted.size()) {
    const std::string l1 = predicted.substr(p1, predicted.find('\n', p1) - p1);
    const std::string l2 = actual.substr(p2, actual.find('\n', p2) - p2);
    p1 += l1.size() + 1;
    p2 += l2.size() + 1;
    expected += l1 + l2.substr(l2.find('\t')) + "\n";
  }
  CHECK(read_file(merged.string()) == expected);

  // Value-only files get a row-number index: three columns for two inputs.
  atomic_write_file((dir / "a.txt").string(), "1.5\n2.5\n3.5\n");
  atomic_write_file((dir / "b.txt").string(), "x\ny\nz\n");
  const fs::path plain = dir / "plain.txt";
  REQUIRE(run_cli("plot-data " + (dir / "a.txt").string() + " " + (dir / "b.txt").string() +
                  " --out " + plain.string())
              .exit_code == 0);
  CHECK(read_file(plain.string()) == "1\t1.5\tx\n2\t2.5\ty\n3\t3.5\tz\n");

  // Length mismatch is an error.
  atomic_write_file((dir / "short.txt").string(), "1\n2\n");
  const CmdResult bad = run_cli("plot-data " + (dir / "a.txt").string() + " " +
                                (dir / "short.txt").string() + " --out " +
                                (dir / "bad.txt").string());
  CHECK(bad.exit_code != 0);
  CHECK(bad.err.find("rows") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bad.txt"));
}
