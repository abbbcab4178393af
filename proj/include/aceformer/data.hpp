#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aceformer/series.hpp"

namespace aceformer {

struct OhlcvRecord {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

// Comma-separated file with a header naming date,open,high,low,close,volume
// (any order, any case; extra columns are ignored). Returns date-sorted
// records; malformed rows fail with their line number, invariant violations
// (OHLC ordering, negative volume, duplicate dates) with the offending date.
std::vector<OhlcvRecord> load_csv(const std::string& path);

// Three sources on the intersection of their trading days.
struct AlignedPanel {
  std::vector<Date> dates;
  std::vector<OhlcvRecord> primary;
  std::vector<double> index_a_close;
  std::vector<double> index_b_close;

  std::size_t size() const { return dates.size(); }
};

// Keeps exactly the days present in all three sources, in date order.
AlignedPanel align(const std::vector<OhlcvRecord>& primary,
                   const std::vector<OhlcvRecord>& index_a,
                   const std::vector<OhlcvRecord>& index_b);

enum class Split { train, val, test };
const char* split_name(Split split);

// Half-open boundaries on the first target day: before val_start is train,
// before test_start is val, the rest is test.
struct SplitBounds {
  Date val_start;
  Date test_start;
};

struct NormRange {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr std::size_t kFeatureWidth = 7;  // o,h,l,c,v + two index closes
inline constexpr std::size_t kCloseColumn = 3;

struct WindowedSample {
  std::vector<double> features;  // input_window x kFeatureWidth, each in [0,1]
  std::vector<double> targets;   // next predict_days closes, window-normalized
  std::vector<NormRange> norm;   // per-column window statistics
  Split split = Split::train;
  Date window_start;
  Date window_end;
  std::vector<Date> target_dates;
};

struct WindowedDataset {
  std::size_t input_window = 0;
  std::size_t predict_days = 0;
  std::vector<WindowedSample> samples;

  std::size_t count(Split split) const;
};

// Stride-1 sliding windows, min-max normalized per window and column, each
// sample tagged by its first target day. Samples whose target days would
// straddle a split boundary are dropped so the splits stay disjoint.
WindowedDataset make_windows(const AlignedPanel& panel, std::size_t input_window,
                             std::size_t predict_days, const SplitBounds& bounds);

// Inverse of the window normalization; a degenerate (flat) range maps
// every value back to the constant it came from.
std::vector<double> denormalize(const std::vector<double>& values, const NormRange& range);

// Deterministic key-value summary: sample counts per split and the exact
// first-target date ranges covered.
std::string dataset_manifest(const WindowedDataset& dataset);

}  // namespace aceformer
