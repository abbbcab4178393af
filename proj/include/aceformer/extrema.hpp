#pragma once

#include "aceformer/series.hpp"

namespace aceformer {

struct ExtremaResult {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;

  std::size_t total() const { return maxima.size() + minima.size(); }
};

// Interior local extrema. A plateau (run of equal values flanked by
// lower/higher values on both sides) reports the run's center index,
// floor of the mean. Endpoints are never extrema.
ExtremaResult find_extrema(const TimeSeries& series);

// Midpoints of the abscissa between adjacent extrema: merge maxima and
// minima into one sorted sequence and emit floor((e_k + e_{k+1}) / 2)
// with the series value at that index. Fewer than two extrema yields an
// empty set.
KnotSet find_midpoints(const TimeSeries& series,
                       const std::vector<std::size_t>& maxima,
                       const std::vector<std::size_t>& minima);

// Sign changes between consecutive samples; exact zeros are skipped so
// [1, 0, -1] counts one crossing.
int count_zero_crossings(const std::vector<double>& values);

}  // namespace aceformer
