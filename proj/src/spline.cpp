#include "aceformer/spline.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aceformer {

CubicSpline::CubicSpline(const KnotSet& knots) {
  validate_knots(knots);
  const std::size_t n = knots.size();
  x_.resize(n);
  for (std::size_t i = 0; i < n; ++i) x_[i] = static_cast<double>(knots.indices[i]);
  y_ = knots.values;
  m_.assign(n, 0.0);
  if (n == 2) return;  // natural ends only: linear segment

  // Tridiagonal system for the interior second derivatives (Thomas solve).
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0), lower(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    lower[i] = h0;
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
  }
}

double CubicSpline::eval(double x) const {
  if (x < x_.front() || x > x_.back()) {
    throw std::out_of_range("spline query " + std::to_string(x) + " outside knot range [" +
                            std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
  }
  // Segment [x_i, x_{i+1}] containing x.
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = (it == x_.end()) ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
}

std::vector<double> cubic_spline_eval(const KnotSet& knots,
                                      const std::vector<std::size_t>& query_indices) {
  const CubicSpline spline(knots);
  std::vector<double> out;
  out.reserve(query_indices.size());
  for (std::size_t q : query_indices) out.push_back(spline.eval(static_cast<double>(q)));
  return out;
}

}  // namespace aceformer
