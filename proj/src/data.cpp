#include "aceformer/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "aceformer/io.hpp"

namespace aceformer {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == text.size()) break;
    start = nl + 1;
  }
  return lines;
}

double parse_number(const std::string& text, const std::string& where) {
  if (text.empty()) throw std::runtime_error(where + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw std::runtime_error(where + ": malformed number '" + text + "'");
  }
  if (!std::isfinite(v)) {
    throw std::runtime_error(where + ": non-finite number '" + text + "'");
  }
  return v;
}

void check_record(const OhlcvRecord& r, const std::string& path) {
  const double body_low = std::min(r.open, r.close);
  const double body_high = std::max(r.open, r.close);
  if (!(r.low <= body_low && body_high <= r.high)) {
    throw std::runtime_error(path + ": OHLC invariant violated on " + r.date.to_string());
  }
  if (r.volume < 0.0) {
    throw std::runtime_error(path + ": negative volume on " + r.date.to_string());
  }
}

Split split_of(const Date& first_target, const SplitBounds& bounds) {
  if (first_target < bounds.val_start) return Split::train;
  if (first_target < bounds.test_start) return Split::val;
  return Split::test;
}

}  // namespace

std::vector<OhlcvRecord> load_csv(const std::string& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.empty() || trim(lines[0]).empty()) {
    throw std::runtime_error(path + ": missing header row");
  }

  const std::vector<std::string> header = split_fields(lines[0]);
  const char* wanted[6] = {"date", "open", "high", "low", "close", "volume"};
  std::size_t column[6];
  for (int i = 0; i < 6; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (lower(header[j]) == wanted[i]) {
        column[i] = j;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error(path + ": header is missing column '" + std::string(wanted[i]) +
                               "'");
    }
  }

  std::vector<OhlcvRecord> records;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    const std::string where = path + ": line " + std::to_string(n + 1);
    const std::vector<std::string> fields = split_fields(lines[n]);
    if (fields.size() != header.size()) {
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    OhlcvRecord r;
    try {
      r.date = Date::parse(fields[column[0]]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    r.open = parse_number(fields[column[1]], where);
    r.high = parse_number(fields[column[2]], where);
    r.low = parse_number(fields[column[3]], where);
    r.close = parse_number(fields[column[4]], where);
    r.volume = parse_number(fields[column[5]], where);
    check_record(r, path);
    records.push_back(r);
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const OhlcvRecord& a, const OhlcvRecord& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].date == records[i - 1].date) {
      throw std::runtime_error(path + ": duplicate date " + records[i].date.to_string());
    }
  }
  return records;
}

AlignedPanel align(const std::vector<OhlcvRecord>& primary,
                   const std::vector<OhlcvRecord>& index_a,
                   const std::vector<OhlcvRecord>& index_b) {
  auto check_sorted = [](const std::vector<OhlcvRecord>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i - 1].date < v[i].date)) {
        throw std::invalid_argument("align: " + std::string(name) +
                                    " is not strictly date-sorted");
      }
    }
  };
  check_sorted(primary, "primary");
  check_sorted(index_a, "index_a");
  check_sorted(index_b, "index_b");

  AlignedPanel panel;
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (const OhlcvRecord& r : primary) {
    while (ia < index_a.size() && index_a[ia].date < r.date) ++ia;
    while (ib < index_b.size() && index_b[ib].date < r.date) ++ib;
    if (ia < index_a.size() && ib < index_b.size() && index_a[ia].date == r.date &&
        index_b[ib].date == r.date) {
      panel.dates.push_back(r.date);
      panel.primary.push_back(r);
      panel.index_a_close.push_back(index_a[ia].close);
      panel.index_b_close.push_back(index_b[ib].close);
    }
  }
  if (panel.dates.empty()) {
    throw std::runtime_error("align: the three sources share no trading days");
  }
  return panel;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::size_t WindowedDataset::count(Split split) const {
  std::size_t n = 0;
  for (const WindowedSample& s : samples) n += s.split == split ? 1 : 0;
  return n;
}

WindowedDataset make_windows(const AlignedPanel& panel, std::size_t input_window,
                             std::size_t predict_days, const SplitBounds& bounds) {
  if (input_window < 1) throw std::invalid_argument("make_windows: input_window must be >= 1");
  if (predict_days < 1) throw std::invalid_argument("make_windows: predict_days must be >= 1");
  if (bounds.test_start < bounds.val_start) {
    throw std::invalid_argument("make_windows: test_start precedes val_start");
  }
  const std::size_t n = panel.size();
  if (panel.primary.size() != n || panel.index_a_close.size() != n ||
      panel.index_b_close.size() != n) {
    throw std::invalid_argument("make_windows: panel arrays disagree on length");
  }
  const std::size_t span = input_window + predict_days;
  if (n < span) {
    throw std::invalid_argument("make_windows: panel has " + std::to_string(n) +
                                " days, needs at least " + std::to_string(span));
  }

  auto feature = [&panel](std::size_t row, std::size_t col) {
    const OhlcvRecord& r = panel.primary[row];
    switch (col) {
      case 0: return r.open;
      case 1: return r.high;
      case 2: return r.low;
      case 3: return r.close;
      case 4: return r.volume;
      case 5: return panel.index_a_close[row];
      default: return panel.index_b_close[row];
    }
  };

  WindowedDataset out;
  out.input_window = input_window;
  out.predict_days = predict_days;
  for (std::size_t start = 0; start + span <= n; ++start) {
    const Date first_target = panel.dates[start + input_window];
    const Date last_target = panel.dates[start + span - 1];
    const Split split = split_of(first_target, bounds);
    if (split_of(last_target, bounds) != split) continue;  // straddles a boundary

    WindowedSample sample;
    sample.split = split;
    sample.window_start = panel.dates[start];
    sample.window_end = panel.dates[start + input_window - 1];
    sample.norm.resize(kFeatureWidth);
    for (std::size_t col = 0; col < kFeatureWidth; ++col) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t row = start; row < start + input_window; ++row) {
        lo = std::min(lo, feature(row, col));
        hi = std::max(hi, feature(row, col));
      }
      sample.norm[col] = {lo, hi};
    }
    sample.features.resize(input_window * kFeatureWidth);
    for (std::size_t row = 0; row < input_window; ++row) {
      for (std::size_t col = 0; col < kFeatureWidth; ++col) {
        const NormRange& r = sample.norm[col];
        const double v = feature(start + row, col);
        sample.features[row * kFeatureWidth + col] =
            r.hi > r.lo ? (v - r.lo) / (r.hi - r.lo) : 0.0;
      }
    }
    const NormRange& close = sample.norm[kCloseColumn];
    for (std::size_t k = 0; k < predict_days; ++k) {
      const std::size_t row = start + input_window + k;
      const double v = panel.primary[row].close;
      sample.targets.push_back(close.hi > close.lo ? (v - close.lo) / (close.hi - close.lo)
                                                   : 0.0);
      sample.target_dates.push_back(panel.dates[row]);
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

std::vector<double> denormalize(const std::vector<double>& values, const NormRange& range) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = range.hi > range.lo ? values[i] * (range.hi - range.lo) + range.lo : range.lo;
  }
  return out;
}

std::string dataset_manifest(const WindowedDataset& dataset) {
  std::string text;
  text += "input_window " + std::to_string(dataset.input_window) + "\n";
  text += "predict_days " + std::to_string(dataset.predict_days) + "\n";
  text += "samples_total " + std::to_string(dataset.samples.size()) + "\n";
  for (Split split : {Split::train, Split::val, Split::test}) {
    const std::string name = split_name(split);
    text += "samples_" + name + " " + std::to_string(dataset.count(split)) + "\n";
    Date first, last;
    bool any = false;
    for (const WindowedSample& s : dataset.samples) {
      if (s.split != split) continue;
      if (!any || s.target_dates.front() < first) first = s.target_dates.front();
      if (!any || last < s.target_dates.back()) last = s.target_dates.back();
      any = true;
    }
    text += "targets_" + name + " " +
            (any ? first.to_string() + " " + last.to_string() : "none") + "\n";
  }
  return text;
}

}  // namespace aceformer
