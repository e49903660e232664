#pragma once

// Independent reference implementations used as test oracles. Everything
// here is deliberately naive: O(n^2) scans, direct formulas, adaptive
// quadrature.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "causality/series.hpp"
#include "causality/special.hpp"
#include "causality/types.hpp"

namespace support {

using causality::Index;
using causality::Matrix;
using causality::Vector;

inline double chebyshev(const Matrix& p, Index i, Index j) {
  double d = 0.0;
  for (Index c = 0; c < p.cols(); ++c) d = std::max(d, std::abs(p(i, c) - p(j, c)));
  return d;
}

/// Distance to the k-th nearest neighbour of i (self excluded), by full sort.
inline double brute_knn(const Matrix& p, Index i, Index k) {
  std::vector<double> d;
  for (Index j = 0; j < p.rows(); ++j)
    if (j != i) d.push_back(chebyshev(p, i, j));
  std::sort(d.begin(), d.end());
  return d[static_cast<std::size_t>(k - 1)];
}

inline Index brute_count(const Matrix& p, Index i, double r, bool strict) {
  Index c = 0;
  for (Index j = 0; j < p.rows(); ++j) {
    if (j == i) continue;
    const double d = chebyshev(p, i, j);
    c += strict ? d < r : d <= r;
  }
  return c;
}

inline Matrix join(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

/// KSG algorithm 1 CMI straight from the definition.
inline double naive_ksg_cmi(const Matrix& x, const Matrix& y, const Matrix& z, int k) {
  const Index n = x.rows();
  const Matrix joint = join(join(x, y), z);
  const Matrix xz = join(x, z);
  const Matrix yz = join(y, z);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double eps = brute_knn(joint, i, k);
    const Index nxz = brute_count(xz, i, eps, true);
    const Index nyz = brute_count(yz, i, eps, true);
    const Index nz = z.cols() > 0 ? brute_count(z, i, eps, true) : (eps > 0 ? n - 1 : 0);
    sum += causality::digamma(nxz + 1.0) + causality::digamma(nyz + 1.0) - causality::digamma(nz + 1.0);
  }
  return causality::digamma(static_cast<double>(k)) - sum / static_cast<double>(n);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int depth) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, depth - 1) + rec(mid, hi, fmid, frm, fhi, right, depth - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 50);
}

/// F(d1, d2) CDF by integrating the density; t = u^2 removes the t^(-1/2)
/// singularity at 0 for d1 = 1.
inline double f_cdf_quadrature(double x, int d1, int d2) {
  if (x <= 0) return 0.0;
  const double a = 0.5 * d1;
  const double b = 0.5 * d2;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  auto density = [&](double t) {
    if (t <= 0) return 0.0;
    const double log_f = a * std::log(d1 * t) + b * std::log(static_cast<double>(d2)) -
                         (a + b) * std::log(d1 * t + d2) - std::log(t) - log_beta;
    return std::exp(log_f);
  };
  return integrate([&](double u) { return density(u * u) * 2.0 * u; }, 0.0, std::sqrt(x));
}

/// Kolmogorov-Smirnov distance between a sample and U(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - p[i]);
    d = std::max(d, p[i] - static_cast<double>(i) / n);
  }
  return d;
}

inline causality::MultivariateTimeSeries white_noise(Index n, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix v(n, k);
  for (Index t = 0; t < n; ++t)
    for (Index c = 0; c < k; ++c) v(t, c) = g(rng);
  return causality::MultivariateTimeSeries(std::move(v));
}

/// Bivariate system y_t = a y_{t-1} + b x_{t-lag} + e_t with white x.
inline causality::MultivariateTimeSeries driven_pair(Index n, double a, double b, int lag, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Index burn = 200;
  Matrix v = Matrix::Zero(n + burn, 2);
  for (Index t = 0; t < n + burn; ++t) {
    v(t, 0) = g(rng);
    const double past_y = t >= 1 ? v(t - 1, 1) : 0.0;
    const double past_x = t >= lag ? v(t - lag, 0) : 0.0;
    v(t, 1) = a * past_y + b * past_x + g(rng);
  }
  return causality::MultivariateTimeSeries(v.bottomRows(n).eval());
}

}  // namespace support
