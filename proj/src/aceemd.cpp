#include "aceformer/aceemd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace aceformer {

void AceemdConfig::validate() const {
  if (ensemble_size < 1) throw std::invalid_argument("aceemd ensemble size must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("aceemd alpha must be in [0, 1]");
  if (noise_scale < 0.0) throw std::invalid_argument("aceemd noise scale must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("aceemd max iterations must be >= 1");
}

std::vector<NoisePair> make_noise_pairs(const TimeSeries& x, const AceemdConfig& config) {
  config.validate();
  if (x.size() < 4) throw std::invalid_argument("aceemd needs a series of length >= 4");

  const double noise_std = config.noise_scale * series_stddev(x.values);
  std::vector<NoisePair> pairs;
  pairs.reserve(static_cast<std::size_t>(config.ensemble_size));
  for (int i = 0; i < config.ensemble_size; ++i) {
    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    NoisePair pair;
    pair.pe.values.resize(x.size());
    pair.pm.values.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double n = noise_std * gauss(rng);
      pair.pe.values[t] = x.values[t] + n;
      pair.pm.values[t] = x.values[t] - n;
    }
    pair.pe.dates = x.dates;
    pair.pm.dates = x.dates;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

TimeSeries am_core(const NoisePair& pair, double alpha, int max_iters) {
  if (pair.pe.size() != pair.pm.size()) {
    throw std::invalid_argument("noise pair members differ in length");
  }
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");

  TimeSeries zeros;
  zeros.values.assign(pair.pe.size(), 0.0);
  zeros.dates = pair.pe.dates;
  if (find_extrema(pair.pe).total() < 2 || find_extrema(pair.pm).total() < 2) {
    return zeros;  // no removable oscillation
  }

  TimeSeries pe_int = pair.pe;
  TimeSeries pm_int = pair.pm;
  for (int iter = 0; iter < max_iters; ++iter) {
    const ExtremaResult pe_ext = find_extrema(pe_int);
    if (pe_ext.total() < 2) break;
    const EnvelopeKnots pe_knots = anchored_knots(pe_int, pe_ext);
    const Envelopes pe_env = envelopes(pe_int, pe_knots.upper, pe_knots.lower);
    if (is_imf(pe_int, pe_env.mean)) break;  // pe's intermediate signal gates the loop

    for (std::size_t i = 0; i < pe_int.size(); ++i) {
      pe_int.values[i] -= pe_env.mean.values[i];
    }
    const ExtremaResult pm_ext = find_extrema(pm_int);
    if (pm_ext.total() >= 2) {
      const EnvelopeKnots pm_knots = anchored_midpoint_knots(pm_int, pm_ext);
      const Envelopes pm_env = envelopes(pm_int, pm_knots.upper, pm_knots.lower);
      for (std::size_t i = 0; i < pm_int.size(); ++i) {
        pm_int.values[i] -= pm_env.mean.values[i];
      }
    }
  }

  TimeSeries out;
  out.values.resize(pe_int.size());
  for (std::size_t i = 0; i < pe_int.size(); ++i) {
    out.values[i] = alpha * pe_int.values[i] + (1.0 - alpha) * pm_int.values[i];
  }
  out.dates = pair.pe.dates;
  return out;
}

DenoiseResult aceemd_denoise(const TimeSeries& x, const AceemdConfig& config) {
  config.validate();
  if (x.size() < 4) throw std::invalid_argument("aceemd needs a series of length >= 4");
  validate_series(x);

  const std::vector<NoisePair> pairs = make_noise_pairs(x, config);
  DenoiseResult result;
  result.per_member_imf1.reserve(pairs.size());
  for (const NoisePair& pair : pairs) {
    result.per_member_imf1.push_back(am_core(pair, config.alpha, config.max_iters));
  }

  const std::size_t n = x.size();
  const double inv_m = 1.0 / static_cast<double>(pairs.size());
  result.imf1.values.assign(n, 0.0);
  for (const TimeSeries& member : result.per_member_imf1) {  // fixed member order
    for (std::size_t i = 0; i < n; ++i) {
      result.imf1.values[i] += member.values[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) result.imf1.values[i] *= inv_m;

  result.r1.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.r1.values[i] = x.values[i] - result.imf1.values[i];
  }
  result.imf1.dates = x.dates;
  result.r1.dates = x.dates;
  return result;
}

double endpoint_deviation(const TimeSeries& denoised, const TimeSeries& reference,
                          std::size_t k) {
  if (denoised.size() != reference.size()) {
    throw std::invalid_argument("endpoint deviation needs equal-length series");
  }
  if (k < 1) throw std::invalid_argument("endpoint deviation needs k >= 1");
  const std::size_t n = denoised.size();
  if (k > n / 2) throw std::invalid_argument("endpoint deviation window k exceeds half the length");

  double dev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    dev = std::max(dev, std::abs(denoised.values[i] - reference.values[i]));
    dev = std::max(dev, std::abs(denoised.values[n - 1 - i] - reference.values[n - 1 - i]));
  }
  return dev;
}

}  // namespace aceformer
