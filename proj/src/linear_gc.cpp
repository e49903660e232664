#include "causality/linear_gc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causality/errors.hpp"
#include "causality/special.hpp"

namespace causality {

namespace {

constexpr double kSvdThreshold = 1e-10;

std::vector<LaggedTerm> lag_block(std::span<const Index> vars, int order) {
  std::vector<LaggedTerm> terms;
  for (Index v : vars)
    for (int j = 1; j <= order; ++j) terms.push_back({v, j});
  return terms;
}

void check_pair(const MultivariateTimeSeries& series, Index x, Index y, int order) {
  const Index k = series.num_vars();
  if (x < 0 || x >= k || y < 0 || y >= k) throw InvalidArgument("variable index out of range");
  if (x == y) throw InvalidArgument("driver and response must differ");
  if (order < 1) throw InvalidArgument("VAR order must be >= 1");
}

// Fits both nested models on rows aligned at lag `order` and runs the F test.
LinearCausalityResult compare_models(const MultivariateTimeSeries& series, Index y,
                                     std::vector<LaggedTerm> unrestricted, std::vector<LaggedTerm> restricted,
                                     int order) {
  const auto lu = build_lag_matrix(series, y, unrestricted, order);
  const auto lr = build_lag_matrix(series, y, restricted, order);
  const auto fu = fit_ols(lu);
  const auto fr = fit_ols(lr);
  const Index n_eff = lu.rows();
  LinearCausalityResult out;
  const auto fisher = fisher_test(std::max(fr.sse, fu.sse), fu.sse, static_cast<int>(unrestricted.size()) + 1,
                                  static_cast<int>(restricted.size()) + 1, n_eff);
  out.index = std::max(0.0, std::log(fr.resid_var / fu.resid_var));
  out.f_stat = fisher.f_stat;
  out.p_value = fisher.p_value;
  out.unrestricted_terms = std::move(unrestricted);
  out.restricted_terms = std::move(restricted);
  out.rank_deficient = fu.rank_deficient || fr.rank_deficient;
  return out;
}

double residual_sse(const Eigen::Ref<const Vector>& target, const Matrix& regressors) {
  LagMatrix lm;
  lm.target = target;
  lm.regressors = regressors;
  lm.terms.resize(static_cast<std::size_t>(regressors.cols()));
  return fit_ols(lm).sse;
}

// Incremental least squares over an orthonormal basis (intercept first),
// used to score single-column additions in O(n * basis size).
class ForwardRegression {
 public:
  explicit ForwardRegression(const Eigen::Ref<const Vector>& target) : residual_(target) {
    Vector ones = Vector::Ones(target.size());
    add(ones);
  }

  double sse() const { return residual_.squaredNorm(); }

  double sse_with(const Eigen::Ref<const Vector>& column) const {
    Vector c = orthogonalize(column);
    const double norm2 = c.squaredNorm();
    if (!(norm2 > 1e-20 * std::max(column.squaredNorm(), 1e-300))) return sse();
    const double proj = residual_.dot(c);
    return std::max(0.0, sse() - proj * proj / norm2);
  }

  void add(const Eigen::Ref<const Vector>& column) {
    Vector c = orthogonalize(column);
    const double norm = c.norm();
    if (!(norm > 1e-10 * std::max(column.norm(), 1e-300))) return;
    c /= norm;
    residual_ -= residual_.dot(c) * c;
    basis_.push_back(std::move(c));
  }

 private:
  Vector orthogonalize(const Eigen::Ref<const Vector>& column) const {
    Vector c = column;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis_) c -= q.dot(c) * q;
    return c;
  }

  std::vector<Vector> basis_;
  Vector residual_;
};

double bic(double sse, Index n, std::size_t params) {
  const double nd = static_cast<double>(n);
  return nd * std::log(std::max(sse, std::numeric_limits<double>::min()) / nd) +
         static_cast<double>(params) * std::log(nd);
}

}  // namespace

VarModelFit fit_ols(const LagMatrix& lagmat) {
  const Index n = lagmat.rows();
  const Index d = lagmat.regressors.cols();
  if (n <= d + 1) {
    throw InvalidArgument("OLS needs more rows than parameters (" + std::to_string(n) + " rows, " +
                          std::to_string(d + 1) + " parameters)");
  }
  Matrix design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = lagmat.regressors;
  Vector scale = design.colwise().norm().transpose();
  for (Index j = 0; j <= d; ++j) {
    if (!(scale(j) > 0)) scale(j) = 1.0;
  }
  design *= scale.cwiseInverse().asDiagonal();

  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kSvdThreshold);
  Vector beta = svd.solve(lagmat.target);
  beta = beta.cwiseQuotient(scale);

  VarModelFit fit;
  fit.terms = lagmat.terms;
  fit.intercept = beta(0);
  fit.coeffs = beta.tail(d);
  fit.residuals = lagmat.target - fit.intercept * Vector::Ones(n) - lagmat.regressors * fit.coeffs;
  fit.sse = fit.residuals.squaredNorm();
  fit.resid_var = fit.sse / static_cast<double>(n);
  fit.rank = svd.rank();
  fit.rank_deficient = fit.rank < d + 1;
  return fit;
}

FisherResult fisher_test(double sse_r, double sse_u, int p_u, int p_r, Index n_eff) {
  if (p_u <= p_r) throw InvalidArgument("fisher_test: unrestricted model must have more parameters");
  if (n_eff <= p_r) throw InvalidArgument("fisher_test: too few observations");
  sse_u = std::max(sse_u, 0.0);
  sse_r = std::max(sse_r, sse_u);
  if (sse_u == 0.0) throw DegenerateTest("unrestricted model fits exactly (SSE = 0)");
  const int d1 = p_u - p_r;
  const int d2 = static_cast<int>(n_eff) - p_r;
  FisherResult out;
  out.f_stat = ((sse_r - sse_u) / d1) / (sse_u / d2);
  out.p_value = std::clamp(f_sf(out.f_stat, d1, d2), 0.0, 1.0);
  return out;
}

LinearCausalityResult gci(const MultivariateTimeSeries& series, Index x, Index y, int order) {
  check_pair(series, x, y, order);
  const Index both[] = {std::min(x, y), std::max(x, y)};
  const Index self[] = {y};
  return compare_models(series, y, lag_block(both, order), lag_block(self, order), order);
}

LinearCausalityResult cgci(const MultivariateTimeSeries& series, Index x, Index y, int order) {
  check_pair(series, x, y, order);
  std::vector<Index> all;
  std::vector<Index> without_x;
  for (Index v = 0; v < series.num_vars(); ++v) {
    all.push_back(v);
    if (v != x) without_x.push_back(v);
  }
  return compare_models(series, y, lag_block(all, order), lag_block(without_x, order), order);
}

std::vector<Index> pcgc_select(const MultivariateTimeSeries& series, Index x, Index y, int num_selected, int order) {
  check_pair(series, x, y, order);
  const Index k = series.num_vars();
  if (num_selected < 0 || num_selected > k - 2) throw InvalidArgument("pcgc_select: Ks must lie in [0, K-2]");

  std::vector<Index> candidates;
  for (Index v = 0; v < k; ++v)
    if (v != x && v != y) candidates.push_back(v);

  std::vector<Index> chosen;
  if (num_selected == 0) return chosen;

  std::vector<Index> all_vars(static_cast<std::size_t>(k));
  for (Index v = 0; v < k; ++v) all_vars[static_cast<std::size_t>(v)] = v;
  const auto full = build_lag_matrix(series, x, lag_block(all_vars, order), order);
  auto block_cols = [&](Index v) {
    std::vector<Index> cols;
    for (int j = 0; j < order; ++j) cols.push_back(v * order + j);
    return cols;
  };

  std::vector<Index> base_cols = block_cols(x);
  double current = residual_sse(full.target, full.regressors(Eigen::all, base_cols));
  while (static_cast<int>(chosen.size()) < num_selected) {
    double best_gain = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      auto cols = base_cols;
      const auto extra = block_cols(candidates[c]);
      cols.insert(cols.end(), extra.begin(), extra.end());
      const double sse = residual_sse(full.target, full.regressors(Eigen::all, cols));
      const double gain = std::log(std::max(current, 1e-300) / std::max(sse, 1e-300));
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    const auto extra = block_cols(candidates[best]);
    base_cols.insert(base_cols.end(), extra.begin(), extra.end());
    current = residual_sse(full.target, full.regressors(Eigen::all, base_cols));
    chosen.push_back(candidates[best]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return chosen;
}

LinearCausalityResult pcgc(const MultivariateTimeSeries& series, Index x, Index y, int num_selected, int order) {
  auto conditioning = pcgc_select(series, x, y, num_selected, order);
  std::vector<Index> unrestricted_vars = conditioning;
  unrestricted_vars.push_back(x);
  unrestricted_vars.push_back(y);
  std::sort(unrestricted_vars.begin(), unrestricted_vars.end());
  std::vector<Index> restricted_vars;
  for (Index v : unrestricted_vars)
    if (v != x) restricted_vars.push_back(v);
  return compare_models(series, y, lag_block(unrestricted_vars, order), lag_block(restricted_vars, order), order);
}

std::vector<LaggedTerm> rcgci_select(const MultivariateTimeSeries& series, Index y, int order) {
  if (order < 1) throw InvalidArgument("VAR order must be >= 1");
  const Index k = series.num_vars();
  std::vector<Index> all_vars(static_cast<std::size_t>(k));
  for (Index v = 0; v < k; ++v) all_vars[static_cast<std::size_t>(v)] = v;
  const auto full = build_lag_matrix(series, y, lag_block(all_vars, order), order);
  const Index n = full.rows();
  auto column_of = [&](const LaggedTerm& t) { return t.var * order + (t.lag - 1); };

  ForwardRegression model(full.target);
  std::vector<LaggedTerm> selected;
  double current_bic = bic(model.sse(), n, 1);
  std::vector<bool> used(static_cast<std::size_t>(k * order), false);

  for (int depth = 1; depth <= order; ++depth) {
    while (true) {
      double best_bic = std::numeric_limits<double>::infinity();
      std::optional<LaggedTerm> best;
      // Candidate order (var, lag) ascending gives the deterministic tie-break.
      for (Index v = 0; v < k; ++v) {
        for (int lag = 1; lag <= depth; ++lag) {
          const LaggedTerm t{v, lag};
          if (used[static_cast<std::size_t>(column_of(t))]) continue;
          const double b = bic(model.sse_with(full.regressors.col(column_of(t))), n, selected.size() + 2);
          if (b < best_bic) {
            best_bic = b;
            best = t;
          }
        }
      }
      if (!best || !(best_bic < current_bic)) break;
      model.add(full.regressors.col(column_of(*best)));
      used[static_cast<std::size_t>(column_of(*best))] = true;
      selected.push_back(*best);
      current_bic = best_bic;
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

LinearCausalityResult rcgci(const MultivariateTimeSeries& series, Index x, Index y, int order,
                            std::optional<std::span<const LaggedTerm>> selection) {
  check_pair(series, x, y, order);
  std::vector<LaggedTerm> unrestricted;
  if (selection) {
    unrestricted.assign(selection->begin(), selection->end());
  } else {
    unrestricted = rcgci_select(series, y, order);
  }
  std::vector<LaggedTerm> restricted;
  for (const auto& t : unrestricted)
    if (t.var != x) restricted.push_back(t);
  if (restricted.size() == unrestricted.size()) {
    LinearCausalityResult out;
    out.unrestricted_terms = std::move(unrestricted);
    out.restricted_terms = std::move(restricted);
    return out;
  }
  return compare_models(series, y, std::move(unrestricted), std::move(restricted), order);
}

}  // namespace causality
