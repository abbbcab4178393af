#include "aceformer/sifting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "aceformer/spline.hpp"

namespace aceformer {

namespace {

// Merge sorted index lists into one strictly increasing knot set with the
// series' own values as ordinates.
KnotSet merge_knots(const TimeSeries& series, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  KnotSet out;
  out.indices = std::move(indices);
  out.values.reserve(out.indices.size());
  for (std::size_t i : out.indices) out.values.push_back(series.values[i]);
  return out;
}

std::vector<std::size_t> with_endpoints(const std::vector<std::size_t>& interior,
                                        std::size_t last) {
  std::vector<std::size_t> idx;
  idx.reserve(interior.size() + 2);
  idx.push_back(0);
  idx.insert(idx.end(), interior.begin(), interior.end());
  idx.push_back(last);
  return idx;
}

}  // namespace

EnvelopeKnots anchored_knots(const TimeSeries& series, const ExtremaResult& extrema) {
  const std::size_t last = series.size() - 1;
  EnvelopeKnots k;
  k.upper = merge_knots(series, with_endpoints(extrema.maxima, last));
  k.lower = merge_knots(series, with_endpoints(extrema.minima, last));
  return k;
}

EnvelopeKnots anchored_midpoint_knots(const TimeSeries& series, const ExtremaResult& extrema) {
  const std::size_t last = series.size() - 1;
  const KnotSet midpoints = find_midpoints(series, extrema.maxima, extrema.minima);

  auto build = [&](const std::vector<std::size_t>& extrema_idx) {
    std::vector<std::size_t> idx = with_endpoints(extrema_idx, last);
    idx.insert(idx.end(), midpoints.indices.begin(), midpoints.indices.end());
    return merge_knots(series, std::move(idx));
  };
  EnvelopeKnots k;
  k.upper = build(extrema.maxima);
  k.lower = build(extrema.minima);
  return k;
}

EnvelopeKnots clamped_knots(const TimeSeries& series, const ExtremaResult& extrema) {
  const std::size_t last = series.size() - 1;

  auto build = [&](const std::vector<std::size_t>& extrema_idx) {
    KnotSet k;
    k.indices.push_back(0);
    k.values.push_back(series.values[extrema_idx.front()]);
    for (std::size_t i : extrema_idx) {
      k.indices.push_back(i);
      k.values.push_back(series.values[i]);
    }
    k.indices.push_back(last);
    k.values.push_back(series.values[extrema_idx.back()]);
    return k;
  };
  if (extrema.maxima.empty() || extrema.minima.empty()) {
    throw NotSiftableError("clamped envelope needs at least one maximum and one minimum");
  }
  EnvelopeKnots k;
  k.upper = build(extrema.maxima);
  k.lower = build(extrema.minima);
  return k;
}

Envelopes envelopes(const TimeSeries& series, const KnotSet& upper_knots,
                    const KnotSet& lower_knots) {
  const std::size_t n = series.size();
  const std::size_t last = n - 1;
  for (const KnotSet* k : {&upper_knots, &lower_knots}) {
    validate_knots(*k);
    if (k->indices.front() != 0 || k->indices.back() != last) {
      throw std::invalid_argument("envelope knots must span index 0 to len-1");
    }
  }
  std::vector<std::size_t> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = i;

  Envelopes env;
  env.upper = make_series(cubic_spline_eval(upper_knots, grid));
  env.lower = make_series(cubic_spline_eval(lower_knots, grid));
  env.mean.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    env.mean.values[i] = 0.5 * (env.upper.values[i] + env.lower.values[i]);
  }
  env.upper.dates = series.dates;
  env.lower.dates = series.dates;
  env.mean.dates = series.dates;
  return env;
}

bool is_imf(const TimeSeries& series, const TimeSeries& mean_env) {
  const double sd = series_stddev(series.values);
  if (sd == 0.0) return false;

  const ExtremaResult ext = find_extrema(series);
  const int n_extrema = static_cast<int>(ext.total());
  const int n_crossings = count_zero_crossings(series.values);
  if (std::abs(n_extrema - n_crossings) > 1) return false;

  double max_abs_mean = 0.0;
  for (double v : mean_env.values) max_abs_mean = std::max(max_abs_mean, std::abs(v));
  return max_abs_mean <= kImfMeanEnvelopeFactor * sd;
}

TimeSeries sift_once(const TimeSeries& series, const KnotBuilder& knot_builder) {
  const ExtremaResult ext = find_extrema(series);
  if (ext.total() < 2) {
    throw NotSiftableError("series has fewer than two extrema");
  }
  const EnvelopeKnots knots = knot_builder(series, ext);
  const Envelopes env = envelopes(series, knots.upper, knots.lower);
  TimeSeries out;
  out.values.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out.values[i] = series.values[i] - env.mean.values[i];
  }
  out.dates = series.dates;
  return out;
}

TimeSeries sift_to_imf(const TimeSeries& series, const KnotBuilder& knot_builder,
                       int max_sifts) {
  {
    const ExtremaResult ext = find_extrema(series);
    if (ext.total() < 2) {
      throw NotSiftableError("series has fewer than two extrema");
    }
  }
  TimeSeries h = series;
  for (int s = 0; s < max_sifts; ++s) {
    const ExtremaResult ext = find_extrema(h);
    if (ext.total() < 2) break;  // degenerated mid-loop
    const EnvelopeKnots knots = knot_builder(h, ext);
    const Envelopes env = envelopes(h, knots.upper, knots.lower);
    if (is_imf(h, env.mean)) break;
    for (std::size_t i = 0; i < h.size(); ++i) {
      h.values[i] -= env.mean.values[i];
    }
  }
  return h;
}

Decomposition emd(const TimeSeries& series, int max_imfs, int max_sifts) {
  if (series.size() < 4) {
    throw std::invalid_argument("emd needs a series of length >= 4");
  }
  validate_series(series);

  Decomposition dec;
  TimeSeries residue = series;
  for (int k = 0; k < max_imfs; ++k) {
    const ExtremaResult ext = find_extrema(residue);
    if (ext.total() < 2 || ext.maxima.empty() || ext.minima.empty()) break;
    TimeSeries imf = sift_to_imf(residue, clamped_knots, max_sifts);
    for (std::size_t i = 0; i < residue.size(); ++i) {
      residue.values[i] -= imf.values[i];
    }
    dec.imfs.push_back(std::move(imf));
  }
  dec.residue = std::move(residue);
  return dec;
}

}  // namespace aceformer
