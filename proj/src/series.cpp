#include "aceformer/series.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aceformer {

Date Date::parse(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3) {
    throw std::invalid_argument("bad date '" + iso + "': expected YYYY-MM-DD");
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("bad date '" + iso + "': out-of-range field");
  }
  return Date{y, m, d};
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

TimeSeries make_series(std::vector<double> values) {
  TimeSeries s;
  s.values = std::move(values);
  return s;
}

void validate_series(const TimeSeries& series) {
  if (series.values.empty()) {
    throw std::invalid_argument("time series must hold at least one sample");
  }
  for (double v : series.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("time series contains a non-finite value");
    }
  }
  if (series.dates) {
    if (series.dates->size() != series.values.size()) {
      throw std::invalid_argument("time series dates not aligned with values");
    }
    for (std::size_t i = 1; i < series.dates->size(); ++i) {
      if (!((*series.dates)[i - 1] < (*series.dates)[i])) {
        throw std::invalid_argument("time series dates must be strictly increasing");
      }
    }
  }
}

void validate_knots(const KnotSet& knots) {
  if (knots.indices.size() != knots.values.size()) {
    throw std::invalid_argument("knot indices and values differ in length");
  }
  if (knots.size() < 2) {
    throw std::invalid_argument("knot set needs at least two points");
  }
  for (std::size_t i = 1; i < knots.indices.size(); ++i) {
    if (knots.indices[i - 1] >= knots.indices[i]) {
      throw std::invalid_argument("knot indices must be strictly increasing");
    }
  }
}

double series_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double series_stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mu = series_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("pearson: inputs must be equal-length and non-empty");
  }
  const double ma = series_mean(a);
  const double mb = series_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace aceformer
