#pragma once

// Special functions used by the estimators and the parametric tests.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace causality {

/// Digamma function. Recurrence up to x >= 10, then the asymptotic series;
/// absolute error below 1e-14 for positive arguments.
template <typename Scalar>
Scalar digamma(Scalar x) {
  if (x <= Scalar(0) && std::floor(x) == x) {
    return std::numeric_limits<Scalar>::quiet_NaN();
  }
  if (x < Scalar(0)) {
    // Reflection.
    return digamma(Scalar(1) - x) - std::numbers::pi_v<Scalar> / std::tan(std::numbers::pi_v<Scalar> * x);
  }
  Scalar result = 0;
  while (x < Scalar(10)) {
    result -= Scalar(1) / x;
    x += Scalar(1);
  }
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // Bernoulli terms B_{2k} / (2k) up to k = 7.
  const Scalar series =
      inv2 * (Scalar(1) / 12 -
              inv2 * (Scalar(1) / 120 -
                      inv2 * (Scalar(1) / 252 -
                              inv2 * (Scalar(1) / 240 -
                                      inv2 * (Scalar(1) / 132 -
                                              inv2 * (Scalar(691) / 32760 - inv2 * (Scalar(1) / 12)))))));
  return result + std::log(x) - Scalar(0.5) * inv - series;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
template <typename Scalar>
Scalar betacf(Scalar a, Scalar b, Scalar x) {
  constexpr int kMaxIter = 100000;
  constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();
  constexpr Scalar kTiny = std::numeric_limits<Scalar>::min() / kEps;
  const Scalar qab = a + b;
  const Scalar qap = a + 1;
  const Scalar qam = a - 1;
  Scalar c = 1;
  Scalar d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  Scalar h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const Scalar m2 = Scalar(2 * m);
    Scalar aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const Scalar del = d * c;
    h *= del;
    if (std::abs(del - 1) <= kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
template <typename Scalar>
Scalar incomplete_beta(Scalar a, Scalar b, Scalar x) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const Scalar log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const Scalar front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * detail::betacf(a, b, x) / a;
  return 1 - front * detail::betacf(b, a, 1 - x) / b;
}

/// CDF of the Fisher-Snedecor distribution with (d1, d2) degrees of freedom.
template <typename Scalar>
Scalar f_cdf(Scalar x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("f_cdf: degrees of freedom must be >= 1");
  if (x <= 0) return 0;
  if (std::isinf(x)) return 1;
  const Scalar dx = Scalar(d1) * x;
  return incomplete_beta(Scalar(d1) / 2, Scalar(d2) / 2, dx / (dx + Scalar(d2)));
}

/// Upper tail 1 - f_cdf, evaluated without cancellation.
template <typename Scalar>
Scalar f_sf(Scalar x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("f_sf: degrees of freedom must be >= 1");
  if (x <= 0) return 1;
  if (std::isinf(x)) return 0;
  const Scalar dx = Scalar(d1) * x;
  return incomplete_beta(Scalar(d2) / 2, Scalar(d1) / 2, Scalar(d2) / (dx + Scalar(d2)));
}

template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

/// Inverse of the standard normal CDF (Acklam's approximation, one Halley step).
template <typename Scalar>
Scalar normal_quantile(Scalar p) {
  if (!(p > 0 && p < 1)) {
    if (p == 0) return -std::numeric_limits<Scalar>::infinity();
    if (p == 1) return std::numeric_limits<Scalar>::infinity();
    throw std::invalid_argument("normal_quantile: p must lie in [0, 1]");
  }
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01,  -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  const double pd = static_cast<double>(p);
  double x;
  if (pd < p_low) {
    const double q = std::sqrt(-2 * std::log(pd));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (pd <= 1 - p_low) {
    const double q = pd - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-pd));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = normal_cdf(x) - pd;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  x = x - u / (1 + x * u / 2);
  return static_cast<Scalar>(x);
}

}  // namespace causality
