#pragma once

// Shared test utilities: independent oracles and seeded generators. These
// deliberately avoid the library's own solver paths so they can vouch for
// them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "aceformer/data.hpp"

namespace testsupport {

// Seeded OHLCV panel on a simplified 28-day-month calendar: a positive
// random-walk close with consistent open/high/low bounds and two index
// series that loosely track it.
inline aceformer::AlignedPanel synthetic_panel(std::size_t days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_real_distribution<double> pad(0.05, 0.8);

  aceformer::AlignedPanel panel;
  aceformer::Date day{2020, 1, 1};
  double close = 100.0;
  for (std::size_t i = 0; i < days; ++i) {
    const double open = close;
    close = std::max(5.0, close + step(rng));
    const double high = std::max(open, close) + pad(rng);
    const double low = std::max(0.5, std::min(open, close) - pad(rng));
    const double volume = 1e6 * (1.0 + std::fabs(step(rng)));
    panel.dates.push_back(day);
    panel.primary.push_back({day, open, high, low, close, volume});
    panel.index_a_close.push_back(close * 3.0 + 0.1 * step(rng));
    panel.index_b_close.push_back(close * 0.5 + 0.1 * step(rng));
    if (++day.day > 28) {
      day.day = 1;
      if (++day.month > 12) {
        day.month = 1;
        ++day.year;
      }
    }
  }
  return panel;
}

// Natural cubic spline via a dense per-segment coefficient system solved
// with Gaussian elimination. Independent of the tridiagonal second-
// derivative route used by the library.
inline std::vector<double> dense_natural_spline(const std::vector<double>& xs,
                                                const std::vector<double>& ys,
                                                const std::vector<double>& queries) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw std::invalid_argument("dense spline: bad knots");
  const std::size_t nseg = n - 1;
  const std::size_t dim = 4 * nseg;  // a,b,c,d per segment, S_i(t)=a+b u+c u^2+d u^3, u=t-x_i

  std::vector<std::vector<double>> A(dim, std::vector<double>(dim + 1, 0.0));
  std::size_t row = 0;
  auto coef = [&](std::size_t seg, int k) { return 4 * seg + static_cast<std::size_t>(k); };

  for (std::size_t i = 0; i < nseg; ++i) {
    const double h = xs[i + 1] - xs[i];
    // value at left and right knot
    A[row][coef(i, 0)] = 1.0;
    A[row][dim] = ys[i];
    ++row;
    A[row][coef(i, 0)] = 1.0;
    A[row][coef(i, 1)] = h;
    A[row][coef(i, 2)] = h * h;
    A[row][coef(i, 3)] = h * h * h;
    A[row][dim] = ys[i + 1];
    ++row;
  }
  for (std::size_t i = 0; i + 1 < nseg; ++i) {
    const double h = xs[i + 1] - xs[i];
    // C1: b_i + 2 c_i h + 3 d_i h^2 = b_{i+1}
    A[row][coef(i, 1)] = 1.0;
    A[row][coef(i, 2)] = 2.0 * h;
    A[row][coef(i, 3)] = 3.0 * h * h;
    A[row][coef(i + 1, 1)] = -1.0;
    ++row;
    // C2: 2 c_i + 6 d_i h = 2 c_{i+1}
    A[row][coef(i, 2)] = 2.0;
    A[row][coef(i, 3)] = 6.0 * h;
    A[row][coef(i + 1, 2)] = -2.0;
    ++row;
  }
  // natural ends: S''(x_0) = 0 and S''(x_{n-1}) = 0
  A[row][coef(0, 2)] = 2.0;
  ++row;
  {
    const double h = xs[n - 1] - xs[n - 2];
    A[row][coef(nseg - 1, 2)] = 2.0;
    A[row][coef(nseg - 1, 3)] = 6.0 * h;
    ++row;
  }
  if (row != dim) throw std::logic_error("dense spline: system row mismatch");

  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < dim; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    std::swap(A[col], A[piv]);
    if (std::abs(A[col][col]) < 1e-14) throw std::runtime_error("dense spline: singular system");
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= dim; ++c) A[r][c] -= f * A[col][c];
    }
  }
  std::vector<double> sol(dim);
  for (std::size_t i = 0; i < dim; ++i) sol[i] = A[i][dim] / A[i][i];

  std::vector<double> out;
  out.reserve(queries.size());
  for (double q : queries) {
    if (q < xs.front() || q > xs.back()) throw std::out_of_range("dense spline: query outside");
    std::size_t seg = 0;
    while (seg + 1 < nseg && q >= xs[seg + 1]) ++seg;
    const double u = q - xs[seg];
    out.push_back(sol[coef(seg, 0)] + sol[coef(seg, 1)] * u + sol[coef(seg, 2)] * u * u +
                  sol[coef(seg, 3)] * u * u * u);
  }
  return out;
}

// Brute-force interior extrema by direct neighbor comparison; treats any
// plateau as its center index. Mirrors the contract, written separately.
inline void brute_extrema(const std::vector<double>& v, std::vector<std::size_t>& maxima,
                          std::vector<std::size_t>& minima) {
  maxima.clear();
  minima.clear();
  const std::size_t n = v.size();
  std::size_t i = 1;
  while (i + 1 <= n - 1 && n >= 3) {
    if (i >= n - 1) break;
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    if (j >= n - 1) break;
    const bool starts_inside = i > 0;
    if (starts_inside) {
      if (v[i - 1] < v[i] && v[j + 1] < v[i]) maxima.push_back((i + j) / 2);
      if (v[i - 1] > v[i] && v[j + 1] > v[i]) minima.push_back((i + j) / 2);
    }
    i = j + 1;
  }
}

inline int brute_zero_crossings(const std::vector<double>& v) {
  int count = 0;
  double prev = 0.0;
  bool have_prev = false;
  for (double x : v) {
    if (x == 0.0) continue;
    if (have_prev && ((prev > 0.0) != (x > 0.0))) ++count;
    prev = x;
    have_prev = true;
  }
  return count;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double step = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, step);
  std::vector<double> v(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += gauss(rng);
    v[i] = acc;
  }
  return v;
}

inline std::vector<double> random_uniform(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                          double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testsupport
