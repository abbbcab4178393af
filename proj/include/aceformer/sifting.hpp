#pragma once

#include <functional>
#include <stdexcept>

#include "aceformer/extrema.hpp"
#include "aceformer/series.hpp"

namespace aceformer {

// Raised when a series has fewer than two extrema and cannot be sifted.
struct NotSiftableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvelopeKnots {
  KnotSet upper;
  KnotSet lower;
};

// Builds upper/lower envelope knots from a series and its extrema.
using KnotBuilder = std::function<EnvelopeKnots(const TimeSeries&, const ExtremaResult&)>;

// Endpoints at their data values plus the extrema. Both envelopes pass
// through the first and last sample.
EnvelopeKnots anchored_knots(const TimeSeries& series, const ExtremaResult& extrema);

// Same as anchored_knots with the peak/trough midpoints added to both
// envelope knot sets.
EnvelopeKnots anchored_midpoint_knots(const TimeSeries& series, const ExtremaResult& extrema);

// Interior extrema only, with the boundary indices clamped to the nearest
// extremum's value. The classical end condition whose endpoint distortion
// the anchored variants avoid.
EnvelopeKnots clamped_knots(const TimeSeries& series, const ExtremaResult& extrema);

struct Envelopes {
  TimeSeries upper;
  TimeSeries lower;
  TimeSeries mean;  // (upper + lower) / 2
};

// Both knot sets must span index 0 to len-1.
Envelopes envelopes(const TimeSeries& series, const KnotSet& upper_knots,
                    const KnotSet& lower_knots);

// IMF test: |#extrema - #zero-crossings| <= 1 and the mean envelope stays
// within 0.05 * std(series). Constant series are never IMFs.
bool is_imf(const TimeSeries& series, const TimeSeries& mean_env);

inline constexpr double kImfMeanEnvelopeFactor = 0.05;
inline constexpr int kDefaultMaxSifts = 50;
inline constexpr int kDefaultMaxImfs = 10;

// One sifting step: series minus its mean envelope, with envelopes built
// from the supplied knot rule. Throws NotSiftableError below two extrema.
TimeSeries sift_once(const TimeSeries& series, const KnotBuilder& knot_builder);

// Repeated sifting until is_imf or the sift cap. Requires two extrema on
// entry; a branch that degenerates mid-loop is returned as-is.
TimeSeries sift_to_imf(const TimeSeries& series, const KnotBuilder& knot_builder,
                       int max_sifts = kDefaultMaxSifts);

// Classical EMD with clamped-end envelopes. Stops when the residue has
// fewer than two extrema or max_imfs is reached.
Decomposition emd(const TimeSeries& series, int max_imfs = kDefaultMaxImfs,
                  int max_sifts = kDefaultMaxSifts);

}  // namespace aceformer
