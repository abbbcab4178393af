#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "aceformer/checkpoint.hpp"
#include "aceformer/data.hpp"
#include "aceformer/metrics.hpp"
#include "aceformer/model.hpp"

namespace aceformer {

struct TrainExample {
  std::vector<double> window;   // input_window * feature_width values
  std::vector<double> targets;  // predict_days values
};

struct TrainSplit {
  std::vector<TrainExample> train;
  std::vector<TrainExample> val;  // may be empty; training loss then drives early stop
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;  // stop after this many epochs without val improvement
  std::uint64_t shuffle_seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

// Mini-batch Adam on mean squared error with early stopping. Shuffling is
// seeded, so a rerun with the same seeds reproduces the history exactly.
TrainResult train_model(AceFormer& model, const TrainSplit& data, const TrainConfig& config);

// Mean squared error of the model over a set of examples (no gradients kept).
double evaluate_mse(const AceFormer& model, const std::vector<TrainExample>& examples);

// Tab-separated history rows (epoch, train_loss, val_loss) with a header.
std::string history_text(const TrainResult& result);

// Train/val examples lifted out of a windowed dataset; test samples stay out.
TrainSplit make_training_split(const WindowedDataset& dataset);

// Denormalized first-day closes for every sample of one split, in date order:
// what the model called, what actually printed, and the last close it knew.
struct CloseForecasts {
  std::vector<double> predicted;
  std::vector<double> actual;
  std::vector<double> prior;
  std::vector<Date> dates;  // first target day per sample
};

CloseForecasts forecast_closes(const AceFormer& model, const WindowedDataset& dataset,
                               Split split);

// The same bookkeeping without a model: predictions are copied from the
// actual closes, for injected perfect-oracle evaluation.
CloseForecasts oracle_forecasts(const WindowedDataset& dataset, Split split);

// Fractional day returns (actual - prior) / prior; prior closes must be
// positive prices.
std::vector<double> actual_returns_of(const CloseForecasts& closes);

// Full metric sweep over a set of forecasts: trend calls, the long-or-flat
// trading rule, and the buy-and-hold benchmark.
BacktestReport report_from_forecasts(const CloseForecasts& closes, double risk_free = 0.0);

// report_from_forecasts over one split of the dataset, predicted by the model.
BacktestReport evaluate_split(const AceFormer& model, const WindowedDataset& dataset,
                              Split split, double risk_free = 0.0);

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult training;
  Checkpoint checkpoint;
  RunScore score;
};

struct FiveRunResult {
  std::vector<SeedRun> runs;  // seeds base.seed .. base.seed+4, in order
  std::size_t best_index = 0;
};

// Five independent trainings from consecutive seeds; the winner is picked on
// validation accuracy (ties: lower validation MSE, then lower seed).
FiveRunResult train_five(const ModelConfig& base, const WindowedDataset& dataset,
                         const TrainConfig& config);

// Deterministic per-run score table plus the chosen seed.
std::string selection_report(const FiveRunResult& result);

}  // namespace aceformer
