#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace aceformer {

// Calendar day, comparable and printable as ISO-8601 (YYYY-MM-DD).
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;

  static Date parse(const std::string& iso);
  std::string to_string() const;
};

// Ordered real-valued samples, optionally tagged with trading dates.
// Dates, when present, are aligned 1:1 with values and strictly increasing.
struct TimeSeries {
  std::vector<double> values;
  std::optional<std::vector<Date>> dates;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

TimeSeries make_series(std::vector<double> values);

// Throws std::invalid_argument on a violated TimeSeries invariant:
// empty, non-finite values, or non-increasing dates.
void validate_series(const TimeSeries& series);

// Spline input: strictly increasing sample indices with their ordinates.
struct KnotSet {
  std::vector<std::size_t> indices;
  std::vector<double> values;

  std::size_t size() const { return indices.size(); }
};

void validate_knots(const KnotSet& knots);

// Ordered IMFs (first extracted first) plus the final residue.
// Components all have the input's length and sum back to it.
struct Decomposition {
  std::vector<TimeSeries> imfs;
  TimeSeries residue;
};

double series_mean(const std::vector<double>& v);
double series_stddev(const std::vector<double>& v);  // population
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace aceformer
