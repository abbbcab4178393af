#pragma once

#include "aceformer/series.hpp"

namespace aceformer {

// Natural cubic spline through a knot set: interpolates every knot, C2
// between segments, second derivative zero at both end knots. Two knots
// degenerate to linear interpolation. Queries outside the knot range are
// an error; there is no extrapolation.
class CubicSpline {
 public:
  explicit CubicSpline(const KnotSet& knots);

  double eval(double x) const;

  double first_abscissa() const { return x_.front(); }
  double last_abscissa() const { return x_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

std::vector<double> cubic_spline_eval(const KnotSet& knots,
                                      const std::vector<std::size_t>& query_indices);

}  // namespace aceformer
