#pragma once

#include <cstdint>

#include "aceformer/sifting.hpp"

namespace aceformer {

struct AceemdConfig {
  int ensemble_size = 5;     // m, count of opposite-sign noise pairs
  double alpha = 0.5;        // pe/pm blend weight
  double noise_scale = 0.2;  // noise std as a fraction of input std
  std::uint64_t seed = 0;
  int max_iters = kDefaultMaxSifts;

  void validate() const;
};

// One ensemble member: pe = x + n, pm = x - n for the same noise draw.
struct NoisePair {
  TimeSeries pe;
  TimeSeries pm;
};

struct DenoiseResult {
  TimeSeries imf1;                       // removed noise component
  TimeSeries r1;                         // denoised signal, x - imf1
  std::vector<TimeSeries> per_member_imf1;  // each member's blended IMF
};

// m pairs with noise drawn Gaussian(0, noise_scale * std(x)); member i is
// seeded with seed + i so members reproduce independently.
std::vector<NoisePair> make_noise_pairs(const TimeSeries& x, const AceemdConfig& config);

// Aliased-complete core: sift pe with endpoint+extrema knots and pm with
// endpoint+extrema+midpoint knots in lockstep until pe's intermediate
// signal is an IMF, then blend alpha * pe + (1 - alpha) * pm. A pair that
// is not siftable on entry contributes zeros.
TimeSeries am_core(const NoisePair& pair, double alpha, int max_iters = kDefaultMaxSifts);

// Ensemble denoising: imf1 is the member average, r1 = x - imf1.
DenoiseResult aceemd_denoise(const TimeSeries& x, const AceemdConfig& config);

// Max-abs difference over the first k and last k samples.
double endpoint_deviation(const TimeSeries& denoised, const TimeSeries& reference,
                          std::size_t k);

}  // namespace aceformer
