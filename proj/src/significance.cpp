#include "causality/significance.hpp"

#include <algorithm>

#include "causality/errors.hpp"
#include "causality/seeding.hpp"

namespace causality {

Vector time_shift_surrogate(const Eigen::Ref<const Vector>& x, Index shift) {
  const Index n = x.size();
  if (shift < 1 || shift > n - 1) throw InvalidArgument("time shift must lie in [1, n-1]");
  Vector out(n);
  out.head(n - shift) = x.tail(n - shift);
  out.tail(shift) = x.head(shift);
  return out;
}

double surrogate_pvalue(double original_value, std::span<const double> surrogate_values) {
  if (surrogate_values.empty()) throw InvalidArgument("surrogate_pvalue needs at least one surrogate");
  const auto below = std::count_if(surrogate_values.begin(), surrogate_values.end(),
                                   [&](double s) { return s < original_value; });
  const double r0 = static_cast<double>(below) + 1.0;
  const double m = static_cast<double>(surrogate_values.size());
  return std::clamp(1.0 - (r0 - 0.326) / (m + 1.0 + 0.348), 0.0, 1.0);
}

SurrogateEnsemble make_surrogate_ensemble(Index n, int count, std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("surrogates need at least 3 samples");
  const Index lo = std::max<Index>(1, (n + 19) / 20);
  const Index hi = std::max(lo, std::min<Index>(n - 1, 19 * n / 20));
  SurrogateEnsemble ens;
  ens.rng_seed = seed;
  ens.shifts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_int_distribution<Index> pick(lo, hi);
    ens.shifts.push_back(pick(rng));
  }
  return ens;
}

SurrogateTestResult surrogate_test(const MultivariateTimeSeries& series, const PairMeasure& measure, Index x, Index y,
                                   int count, std::uint64_t seed) {
  if (count < 20) throw InvalidArgument("surrogate_test needs at least 20 surrogates");
  SurrogateTestResult out;
  out.original = measure(series, x, y);
  const auto ens = make_surrogate_ensemble(series.length(), count, seed);
  const Vector driver = series.column(x);
  out.surrogates.reserve(ens.shifts.size());
  for (Index shift : ens.shifts) {
    out.surrogates.push_back(measure(series.with_column(x, time_shift_surrogate(driver, shift)), x, y));
  }
  out.p_value = surrogate_pvalue(out.original, out.surrogates);
  return out;
}

}  // namespace causality
