#pragma once

// Time-shifted surrogates and rank-based p-values for the resampling tests.

#include <cstdint>
#include <functional>
#include <vector>

#include "causality/series.hpp"
#include "causality/special.hpp"

namespace causality {

/// output[t] = x[(t + shift) mod n]: the first `shift` samples move to the end.
/// Requires 1 <= shift <= n - 1.
Vector time_shift_surrogate(const Eigen::Ref<const Vector>& x, Index shift);

/// One-sided rank p-value p = 1 - (r0 - 0.326) / (M + 1 + 0.348), where r0 is
/// the ascending rank of the original among all M + 1 values. Ties rank the
/// original below equal surrogates, so a constant measure gives r0 = 1.
double surrogate_pvalue(double original_value, std::span<const double> surrogate_values);

/// Replicas of one driver column; each is a cyclic rotation of the original.
struct SurrogateEnsemble {
  std::vector<Index> shifts;
  std::uint64_t rng_seed = 0;
};

/// Draws `count` shifts uniformly from [ceil(n/20), floor(19n/20)]. Replica i
/// uses its own counter-derived stream, so the draw of replica i does not
/// depend on how many replicas are requested or evaluated in which order.
SurrogateEnsemble make_surrogate_ensemble(Index n, int count, std::uint64_t seed);

using PairMeasure = std::function<double(const MultivariateTimeSeries&, Index x, Index y)>;

struct SurrogateTestResult {
  double original = 0.0;
  std::vector<double> surrogates;
  double p_value = 1.0;
};

/// Evaluates `measure` on the data and on `count` time-shifted copies of the
/// driver column x, returning the rank p-value. Requires count >= 20.
SurrogateTestResult surrogate_test(const MultivariateTimeSeries& series, const PairMeasure& measure, Index x, Index y,
                                   int count, std::uint64_t seed);

}  // namespace causality
