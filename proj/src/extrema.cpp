#include "aceformer/extrema.hpp"

#include <algorithm>

namespace aceformer {

ExtremaResult find_extrema(const TimeSeries& series) {
  ExtremaResult out;
  const auto& v = series.values;
  const std::size_t n = v.size();
  if (n < 3) return out;

  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;  // run [i, j] of equal values
    if (i > 0 && j < n - 1) {
      const double left = v[i - 1];
      const double right = v[j + 1];
      const std::size_t center = (i + j) / 2;
      if (left < v[i] && right < v[i]) {
        out.maxima.push_back(center);
      } else if (left > v[i] && right > v[i]) {
        out.minima.push_back(center);
      }
    }
    i = j + 1;
  }
  return out;
}

KnotSet find_midpoints(const TimeSeries& series,
                       const std::vector<std::size_t>& maxima,
                       const std::vector<std::size_t>& minima) {
  KnotSet out;
  std::vector<std::size_t> extrema;
  extrema.reserve(maxima.size() + minima.size());
  std::merge(maxima.begin(), maxima.end(), minima.begin(), minima.end(),
             std::back_inserter(extrema));
  if (extrema.size() < 2) return out;

  for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
    const std::size_t mid = (extrema[k] + extrema[k + 1]) / 2;
    if (!out.indices.empty() && out.indices.back() == mid) continue;
    out.indices.push_back(mid);
    out.values.push_back(series.values[mid]);
  }
  return out;
}

int count_zero_crossings(const std::vector<double>& values) {
  int crossings = 0;
  int last_sign = 0;
  for (double v : values) {
    const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++crossings;
    last_sign = sign;
  }
  return crossings;
}

}  // namespace aceformer
