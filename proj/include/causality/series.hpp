#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "causality/types.hpp"

namespace causality {

/// K aligned scalar series of common length n, stored column-wise.
///
/// Column order is the variable order of every causal network built from
/// the series. Immutable after construction.
class MultivariateTimeSeries {
 public:
  MultivariateTimeSeries() = default;
  /// Labels default to X1..XK when empty. Throws InvalidArgument when
  /// n < 1, K < 2, a label count mismatches or any entry is non-finite.
  explicit MultivariateTimeSeries(Matrix values, std::vector<std::string> labels = {});

  Index length() const { return values_.rows(); }
  Index num_vars() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  auto column(Index var) const { return values_.col(var); }

  /// Copy with column `var` replaced.
  MultivariateTimeSeries with_column(Index var, const Eigen::Ref<const Vector>& column) const;
  /// Copy keeping only the listed columns, in the given order.
  MultivariateTimeSeries select(std::span<const Index> vars) const;

 private:
  Matrix values_;
  std::vector<std::string> labels_;
};

/// A strictly past term x_{var, t - lag}.
struct LaggedTerm {
  Index var = 0;
  Index lag = 1;

  friend bool operator==(const LaggedTerm&, const LaggedTerm&) = default;
  friend auto operator<=>(const LaggedTerm&, const LaggedTerm&) = default;
};

/// Regression design aligned on a common response sample.
///
/// Row r corresponds to original time index r + max_lag: target(r) is the
/// response at that time and regressors(r, j) is
/// series[terms[j].var] at time r + max_lag - terms[j].lag.
struct LagMatrix {
  Vector target;
  Matrix regressors;
  std::vector<LaggedTerm> terms;
  Index max_lag = 0;

  Index rows() const { return target.size(); }
};

/// Column-wise z-scoring with the sample (n-1) standard deviation.
MultivariateTimeSeries standardize(const MultivariateTimeSeries& series);

/// Builds the lag matrix for `response` and `terms`. `window` raises the
/// alignment lag above the largest term lag so nested models share rows.
LagMatrix build_lag_matrix(const MultivariateTimeSeries& series, Index response,
                           std::span<const LaggedTerm> terms, Index window = 0);

/// Lags 1, 1 + tau, ..., 1 + (m - 1) tau for each variable in `vars`,
/// variable-major.
std::vector<LaggedTerm> uniform_embedding(Index num_vars, std::span<const Index> vars, int m, int tau);

Index max_lag(std::span<const LaggedTerm> terms);

/// Header row of labels, then one row per time index.
void write_csv(std::ostream& out, const MultivariateTimeSeries& series);
MultivariateTimeSeries read_csv(std::istream& in);

}  // namespace causality
