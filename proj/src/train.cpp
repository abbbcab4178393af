#include "aceformer/train.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "aceformer/adam.hpp"

namespace aceformer {

namespace {

void check_examples(const char* which, const std::vector<TrainExample>& examples,
                    const ModelConfig& cfg) {
  const std::size_t window_len = cfg.input_window * cfg.feature_width;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].window.size() != window_len) {
      throw std::invalid_argument("train_model: " + std::string(which) + " example " +
                                  std::to_string(i) + " has window size " +
                                  std::to_string(examples[i].window.size()) + ", expected " +
                                  std::to_string(window_len));
    }
    if (examples[i].targets.size() != cfg.predict_days) {
      throw std::invalid_argument("train_model: " + std::string(which) + " example " +
                                  std::to_string(i) + " has " +
                                  std::to_string(examples[i].targets.size()) +
                                  " targets, expected " + std::to_string(cfg.predict_days));
    }
  }
}

ad::Tensor example_loss(const AceFormer& model, const TrainExample& ex) {
  auto pred = model.forward_window(ex.window);
  auto target = ad::make_leaf({1, ex.targets.size()}, ex.targets);
  return ad::mse_loss(pred, target);
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

double evaluate_mse(const AceFormer& model, const std::vector<TrainExample>& examples) {
  if (examples.empty()) {
    throw std::invalid_argument("evaluate_mse: empty example set");
  }
  double sum = 0.0;
  for (const TrainExample& ex : examples) sum += example_loss(model, ex).scalar();
  return sum / static_cast<double>(examples.size());
}

TrainResult train_model(AceFormer& model, const TrainSplit& data, const TrainConfig& config) {
  if (data.train.empty()) throw std::invalid_argument("train_model: empty training split");
  if (config.batch_size < 1) throw std::invalid_argument("train_model: batch_size must be >= 1");
  if (config.max_epochs < 1) throw std::invalid_argument("train_model: max_epochs must be >= 1");
  if (config.patience < 1) throw std::invalid_argument("train_model: patience must be >= 1");
  if (config.lr < 0.0) throw std::invalid_argument("train_model: lr must be non-negative");
  check_examples("train", data.train, model.config());
  check_examples("val", data.val, model.config());

  ad::AdamOptimizer optimizer(model.parameters(),
                              {config.lr, config.beta1, config.beta2, config.eps});
  std::mt19937_64 rng(config.shuffle_seed);
  const std::size_t n = data.train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const double batch_n = static_cast<double>(stop - start);
      optimizer.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        auto loss = example_loss(model, data.train[order[i]]);
        loss_sum += loss.scalar();
        ad::backward(ad::scale(loss, 1.0 / batch_n));
      }
      optimizer.step();
    }
    const double train_loss = loss_sum / static_cast<double>(n);
    const double val_loss = data.val.empty() ? train_loss : evaluate_mse(model, data.val);
    result.history.push_back({epoch, train_loss, val_loss});

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

std::string history_text(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch\ttrain_loss\tval_loss\n";
  for (const EpochRecord& row : result.history) {
    out << row.epoch << '\t' << fmt_g(row.train_loss) << '\t' << fmt_g(row.val_loss) << '\n';
  }
  return out.str();
}

TrainSplit make_training_split(const WindowedDataset& dataset) {
  TrainSplit split;
  for (const WindowedSample& sample : dataset.samples) {
    if (sample.split == Split::test) continue;
    TrainExample ex{sample.features, sample.targets};
    (sample.split == Split::train ? split.train : split.val).push_back(std::move(ex));
  }
  return split;
}

namespace {

// Shared walk over one split: denormalized actual/prior closes and dates,
// with the predicted close supplied per sample by the caller.
template <typename PredictFirstClose>
CloseForecasts collect_forecasts(const WindowedDataset& dataset, Split split,
                                 PredictFirstClose&& predict_first) {
  CloseForecasts out;
  for (const WindowedSample& sample : dataset.samples) {
    if (sample.split != split) continue;
    const NormRange close_range = sample.norm[kCloseColumn];
    const double last_window_close =
        sample.features[(dataset.input_window - 1) * kFeatureWidth + kCloseColumn];
    out.actual.push_back(denormalize({sample.targets[0]}, close_range)[0]);
    out.prior.push_back(denormalize({last_window_close}, close_range)[0]);
    out.predicted.push_back(predict_first(sample, close_range));
    out.dates.push_back(sample.target_dates[0]);
  }
  if (out.predicted.empty()) {
    throw std::invalid_argument(std::string("forecast: no samples in the ") +
                                split_name(split) + " split");
  }
  return out;
}

}  // namespace

CloseForecasts forecast_closes(const AceFormer& model, const WindowedDataset& dataset,
                               Split split) {
  const ModelConfig& cfg = model.config();
  if (cfg.input_window != dataset.input_window || cfg.predict_days != dataset.predict_days ||
      cfg.feature_width != kFeatureWidth) {
    throw std::invalid_argument("forecast: model and dataset dimensions disagree");
  }
  return collect_forecasts(dataset, split,
                           [&](const WindowedSample& sample, const NormRange& close_range) {
                             const std::vector<double> predicted =
                                 model.predict(sample.features);
                             return denormalize({predicted[0]}, close_range)[0];
                           });
}

CloseForecasts oracle_forecasts(const WindowedDataset& dataset, Split split) {
  return collect_forecasts(dataset, split,
                           [](const WindowedSample& sample, const NormRange& close_range) {
                             return denormalize({sample.targets[0]}, close_range)[0];
                           });
}

std::vector<double> actual_returns_of(const CloseForecasts& closes) {
  std::vector<double> returns(closes.actual.size());
  for (std::size_t i = 0; i < closes.actual.size(); ++i) {
    if (closes.prior[i] <= 0.0) {
      throw std::invalid_argument("evaluate: non-positive prior close on " +
                                  closes.dates[i].to_string());
    }
    returns[i] = (closes.actual[i] - closes.prior[i]) / closes.prior[i];
  }
  return returns;
}

BacktestReport report_from_forecasts(const CloseForecasts& closes, double risk_free) {
  const TrendOutcome outcome =
      trend_from_predictions(closes.predicted, closes.actual, closes.prior);
  return backtest_report(outcome, actual_returns_of(closes), risk_free);
}

BacktestReport evaluate_split(const AceFormer& model, const WindowedDataset& dataset,
                              Split split, double risk_free) {
  return report_from_forecasts(forecast_closes(model, dataset, split), risk_free);
}

FiveRunResult train_five(const ModelConfig& base, const WindowedDataset& dataset,
                         const TrainConfig& config) {
  if (dataset.count(Split::train) == 0) {
    throw std::invalid_argument("train_five: the training split is empty");
  }
  if (dataset.count(Split::val) == 0) {
    throw std::invalid_argument("train_five: the validation split is empty");
  }
  const TrainSplit split = make_training_split(dataset);

  FiveRunResult result;
  std::vector<RunScore> scores;
  for (std::uint64_t k = 0; k < 5; ++k) {
    ModelConfig cfg = base;
    cfg.seed = base.seed + k;
    cfg.denoise_cfg.seed = base.denoise_cfg.seed + k;
    TrainConfig per_run = config;
    per_run.shuffle_seed = config.shuffle_seed + k;

    AceFormer model(cfg);
    SeedRun run;
    run.seed = cfg.seed;
    run.training = train_model(model, split, per_run);
    run.checkpoint = model.to_checkpoint();

    const CloseForecasts closes = forecast_closes(model, dataset, Split::val);
    const TrendOutcome outcome =
        trend_from_predictions(closes.predicted, closes.actual, closes.prior);
    run.score = {cfg.seed, accuracy(outcome), evaluate_mse(model, split.val)};
    scores.push_back(run.score);
    result.runs.push_back(std::move(run));
  }
  result.best_index = select_best_of_five(scores);
  return result;
}

std::string selection_report(const FiveRunResult& result) {
  std::ostringstream out;
  out << "seed\tval_acc\tval_mse\n";
  for (const SeedRun& run : result.runs) {
    out << run.seed << '\t' << fmt_g(run.score.val_acc) << '\t' << fmt_g(run.score.val_mse)
        << '\n';
  }
  out << "chosen_seed: " << result.runs.at(result.best_index).seed << '\n';
  return out.str();
}

}  // namespace aceformer
