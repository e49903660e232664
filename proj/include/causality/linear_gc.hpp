#pragma once

// Linear (VAR-based) Granger causality: OLS fits, the Fisher test and the
// GCI / CGCI / PCGC / RCGCI indices.

#include <optional>
#include <span>
#include <vector>

#include "causality/series.hpp"

namespace causality {

/// OLS fit of y on an intercept plus the lag terms of a LagMatrix.
struct VarModelFit {
  std::vector<LaggedTerm> terms;
  Vector coeffs;
  double intercept = 0.0;
  Vector residuals;
  double sse = 0.0;
  double resid_var = 0.0;  // sse / n_eff
  Index rank = 0;          // numerical rank of [1 | regressors]
  bool rank_deficient = false;
};

/// Minimum-norm least squares through a thresholded SVD of the column-scaled
/// design; singular values below 1e-10 of the largest are discarded and the
/// fit is flagged rank deficient. Requires more rows than parameters.
VarModelFit fit_ols(const LagMatrix& lagmat);

struct FisherResult {
  double f_stat = 0.0;
  double p_value = 1.0;
};

/// Nested-model F test,
///   F = ((sse_r - sse_u) / (p_u - p_r)) / (sse_u / (n_eff - p_r)),
/// with p = 1 - F_cdf(F; p_u - p_r, n_eff - p_r). Parameter counts include
/// the intercept. Throws DegenerateTest if sse_u == 0.
FisherResult fisher_test(double sse_r, double sse_u, int p_u, int p_r, Index n_eff);

struct LinearCausalityResult {
  double index = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
  std::vector<LaggedTerm> unrestricted_terms;
  std::vector<LaggedTerm> restricted_terms;
  bool rank_deficient = false;
};

/// Bivariate Granger causality index x -> y with lags 1..order.
LinearCausalityResult gci(const MultivariateTimeSeries& series, Index x, Index y, int order);

/// Conditional GCI: both models carry lags 1..order of every variable, the
/// restricted one drops the driver.
LinearCausalityResult cgci(const MultivariateTimeSeries& series, Index x, Index y, int order);

/// Greedy choice of `num_selected` confounders (variables other than x, y)
/// whose lags 1..order best explain the driver's present beyond its own past,
/// scored by log residual-variance reduction. Returned in selection order.
std::vector<Index> pcgc_select(const MultivariateTimeSeries& series, Index x, Index y, int num_selected, int order);

/// Partially conditioned GCI, conditioning on pcgc_select(...).
LinearCausalityResult pcgc(const MultivariateTimeSeries& series, Index x, Index y, int num_selected, int order);

/// Time-ordered term selection for the response `y` among lags 1..order of
/// all variables. Lag depth grows from 1 to `order`; at each depth, terms of
/// the current depth or shallower are added greedily while BIC decreases.
/// Result is sorted by (var, lag).
std::vector<LaggedTerm> rcgci_select(const MultivariateTimeSeries& series, Index y, int order);

/// Restricted conditional GCI. Pass `selection` to reuse rcgci_select output
/// across drivers of the same response.
LinearCausalityResult rcgci(const MultivariateTimeSeries& series, Index x, Index y, int order,
                            std::optional<std::span<const LaggedTerm>> selection = std::nullopt);

}  // namespace causality
