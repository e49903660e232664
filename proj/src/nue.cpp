#include "causality/nue.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causality/errors.hpp"
#include "causality/ksg.hpp"
#include "causality/seeding.hpp"
#include "causality/significance.hpp"
#include "causality/special.hpp"

namespace causality {

namespace {

constexpr double kMinPositiveIndex = 1e-12;

void check_pair(const MultivariateTimeSeries& series, Index x, Index y) {
  const Index k = series.num_vars();
  if (x < 0 || x >= k || y < 0 || y >= k) throw InvalidArgument("variable index out of range");
  if (x == y) throw InvalidArgument("driver and response must differ");
}

// Lag matrix layout shared by TE and PTE: driver block, response block,
// then the blocks of the remaining variables when `partial`.
struct TransferDesign {
  LagMatrix lags;
  Index block = 0;  // columns per variable
  bool partial = false;

  auto driver() const { return lags.regressors.leftCols(block); }
  auto conditioning() const { return lags.regressors.rightCols(lags.regressors.cols() - block); }
};

TransferDesign transfer_design(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau, int k,
                               bool partial) {
  check_pair(series, x, y);
  if (m < 1 || tau < 1) throw InvalidArgument("embedding requires m >= 1 and tau >= 1");
  if (partial && series.num_vars() < 3) throw InvalidArgument("partial transfer entropy needs K >= 3");
  const Index window = static_cast<Index>(m - 1) * tau + 1;
  if (series.length() <= window + k + 1) throw SeriesTooShort("series too short for the embedding and k");
  std::vector<Index> vars{x, y};
  if (partial) {
    for (Index v = 0; v < series.num_vars(); ++v)
      if (v != x && v != y) vars.push_back(v);
  }
  TransferDesign d;
  d.block = m;
  d.partial = partial;
  d.lags = build_lag_matrix(series, y, uniform_embedding(series.num_vars(), vars, m, tau), window);
  return d;
}

Matrix driver_block(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau) {
  const Index vars[] = {x};
  const Index window = static_cast<Index>(m - 1) * tau + 1;
  return build_lag_matrix(series, y, uniform_embedding(series.num_vars(), vars, m, tau), window).regressors;
}

NonlinearCausalityResult transfer_entropy_test(const MultivariateTimeSeries& raw, Index x, Index y,
                                               const TransferEntropyOptions& opts, bool partial) {
  const auto series = standardize(raw);
  const auto design = transfer_design(series, x, y, opts.m, opts.tau, opts.k, partial);
  const ConditionalMutualInformation cmi(design.lags.target, design.conditioning(), opts.k);
  NonlinearCausalityResult out;
  out.index = cmi(design.driver());
  if (opts.surrogates < 20) throw InvalidArgument("surrogate test needs at least 20 surrogates");
  const auto ens = make_surrogate_ensemble(series.length(), opts.surrogates, opts.seed);
  const Vector column = series.column(x);
  std::vector<double> values;
  values.reserve(ens.shifts.size());
  for (Index shift : ens.shifts) {
    const auto shifted = series.with_column(x, time_shift_surrogate(column, shift));
    values.push_back(cmi(driver_block(shifted, x, y, opts.m, opts.tau)));
  }
  out.p_value = surrogate_pvalue(out.index, values);
  return out;
}

Matrix take_columns(const Matrix& m, const std::vector<Index>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(cols[j]);
  return out;
}

struct CandidateSet {
  LagMatrix lags;  // one column per candidate term, ordered by (var, lag)
};

CandidateSet candidate_set(const MultivariateTimeSeries& series, Index response, std::span<const Index> vars,
                           int max_lag) {
  if (max_lag < 1) throw InvalidArgument("maximum lag must be >= 1");
  if (response < 0 || response >= series.num_vars()) throw InvalidArgument("response index out of range");
  std::vector<Index> sorted(vars.begin(), vars.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw InvalidArgument("candidate variable set is empty");
  CandidateSet c;
  c.lags = build_lag_matrix(series, response, uniform_embedding(series.num_vars(), sorted, max_lag, 1), max_lag);
  return c;
}

// Restricted permutation: visiting points in random order, each takes the
// value of a not yet used point among itself and its nearest neighbours,
// or of a random one of them when all are used.
void local_permutation(const NeighborLists& lists, int neighbors, Rng& rng, std::vector<Index>& perm) {
  const Index n = lists.size();
  const Index width = std::min<Index>(std::max(neighbors, 1) - 1, lists.width());
  std::vector<Index> visit(static_cast<std::size_t>(n));
  std::iota(visit.begin(), visit.end(), Index{0});
  std::shuffle(visit.begin(), visit.end(), rng);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<Index> pool;
  for (Index i : visit) {
    pool.assign(1, i);
    const std::int32_t* nb = lists.neighbors(i);
    for (Index r = 0; r < width; ++r) pool.push_back(nb[r]);
    std::shuffle(pool.begin(), pool.end(), rng);
    Index pick = pool.front();
    for (Index j : pool) {
      if (!used[static_cast<std::size_t>(j)]) {
        pick = j;
        break;
      }
    }
    used[static_cast<std::size_t>(pick)] = 1;
    perm[static_cast<std::size_t>(i)] = pick;
  }
}

MixedEmbedding select_terms(const CandidateSet& cands, const MixedEmbeddingOptions& opts) {
  if (opts.replicas < 1) throw InvalidArgument("termination test needs at least one replica");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const Matrix& columns = cands.lags.regressors;
  const Index n = columns.rows();
  const Matrix target = cands.lags.target;

  MixedEmbedding out;
  std::vector<Index> chosen;
  std::vector<Index> remaining(static_cast<std::size_t>(columns.cols()));
  std::iota(remaining.begin(), remaining.end(), Index{0});
  std::vector<Index> perm(static_cast<std::size_t>(n));

  for (std::uint64_t step = 0; !remaining.empty(); ++step) {
    const ConditionalMutualInformation cmi(target, take_columns(columns, chosen), opts.k);
    double best_value = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      const double v = cmi(columns.col(remaining[c]));
      if (v > best_value) {
        best_value = v;
        best = c;
      }
    }
    const Index col = remaining[best];

    std::vector<double> replicas;
    replicas.reserve(static_cast<std::size_t>(opts.replicas));
    Matrix shuffled(n, 1);
    const NeighborLists* local =
        opts.permutation == PermutationScheme::kLocal ? cmi.conditioning_neighbors() : nullptr;
    for (int r = 0; r < opts.replicas; ++r) {
      Rng rng(derive_seed(opts.seed, step * 1000003ULL + static_cast<std::uint64_t>(r)));
      if (local) {
        local_permutation(*local, opts.local_neighbors, rng, perm);
      } else {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
      }
      for (Index t = 0; t < n; ++t) shuffled(t, 0) = columns(perm[static_cast<std::size_t>(t)], col);
      replicas.push_back(cmi(shuffled));
    }

    EmbeddingStep trace;
    trace.candidate = cands.lags.terms[static_cast<std::size_t>(col)];
    trace.cmi = best_value;
    if (opts.rule == TerminationRule::kPermutationQuantile) {
      std::vector<double> sorted = replicas;
      std::sort(sorted.begin(), sorted.end());
      const auto m = static_cast<double>(sorted.size());
      const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil((1.0 - opts.alpha) * m)));
      trace.threshold = sorted[rank - 1];
      const auto above = std::count_if(replicas.begin(), replicas.end(), [&](double v) { return v >= best_value; });
      trace.p_value = (static_cast<double>(above) + 1.0) / (m + 1.0);
    } else {
      const double m = static_cast<double>(replicas.size());
      const double mean = std::accumulate(replicas.begin(), replicas.end(), 0.0) / m;
      double var = 0.0;
      for (double v : replicas) var += (v - mean) * (v - mean);
      const double sd = replicas.size() > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
      const double choices = static_cast<double>(remaining.size());
      const double level = std::pow(1.0 - opts.alpha, 1.0 / choices);
      trace.threshold = mean + normal_quantile(level) * sd;
      const double single = sd > 0.0 ? 1.0 - normal_cdf((best_value - mean) / sd) : (best_value > mean ? 0.0 : 1.0);
      trace.p_value = 1.0 - std::pow(1.0 - single, choices);
    }
    trace.accepted = best_value > trace.threshold;
    out.selection_trace.push_back(trace);
    if (!trace.accepted) break;
    out.terms.push_back(trace.candidate);
    chosen.push_back(col);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

// Normalized driver contribution R for a finished embedding of `response`.
NonlinearCausalityResult embedding_index(const CandidateSet& cands, MixedEmbedding embedding, Index x,
                                         const MixedEmbeddingOptions& opts) {
  NonlinearCausalityResult out;
  std::vector<Index> driver_cols;
  std::vector<Index> other_cols;
  std::vector<Index> all_cols;
  for (const auto& term : embedding.terms) {
    const auto it = std::find(cands.lags.terms.begin(), cands.lags.terms.end(), term);
    const auto col = static_cast<Index>(it - cands.lags.terms.begin());
    (term.var == x ? driver_cols : other_cols).push_back(col);
    all_cols.push_back(col);
  }
  if (!driver_cols.empty()) {
    const Matrix& columns = cands.lags.regressors;
    const double numerator =
        ksg_cmi(take_columns(columns, driver_cols), cands.lags.target, take_columns(columns, other_cols), opts.k);
    const double denominator = ksg_mi(take_columns(columns, all_cols), cands.lags.target, opts.k);
    const double ratio = denominator > 0.0 ? numerator / denominator : 0.0;
    out.index = std::clamp(ratio, kMinPositiveIndex, 1.0);
    out.clamped = !(denominator > 0.0) || ratio != out.index;
  }
  out.embedding = std::move(embedding);
  return out;
}

}  // namespace

double te_index(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau, int k) {
  const auto d = transfer_design(series, x, y, m, tau, k, false);
  return ksg_cmi(d.driver(), d.lags.target, d.conditioning(), k);
}

double pte_index(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau, int k) {
  const auto d = transfer_design(series, x, y, m, tau, k, true);
  return ksg_cmi(d.driver(), d.lags.target, d.conditioning(), k);
}

NonlinearCausalityResult te(const MultivariateTimeSeries& series, Index x, Index y, const TransferEntropyOptions& opts) {
  return transfer_entropy_test(series, x, y, opts, false);
}

NonlinearCausalityResult pte(const MultivariateTimeSeries& series, Index x, Index y,
                             const TransferEntropyOptions& opts) {
  return transfer_entropy_test(series, x, y, opts, true);
}

MixedEmbedding mixed_embedding(const MultivariateTimeSeries& series, Index response,
                               std::span<const Index> candidate_vars, const MixedEmbeddingOptions& opts) {
  const auto cands = candidate_set(standardize(series), response, candidate_vars, opts.max_lag);
  return select_terms(cands, opts);
}

NonlinearCausalityResult mime(const MultivariateTimeSeries& series, Index x, Index y,
                              const MixedEmbeddingOptions& opts) {
  check_pair(series, x, y);
  const Index vars[] = {x, y};
  const auto cands = candidate_set(standardize(series), y, vars, opts.max_lag);
  auto local = opts;
  local.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(x * series.num_vars() + y) + (1ULL << 32));
  return embedding_index(cands, select_terms(cands, local), x, opts);
}

NonlinearCausalityResult pmime(const MultivariateTimeSeries& series, Index x, Index y,
                               const MixedEmbeddingOptions& opts) {
  check_pair(series, x, y);
  std::vector<Index> vars(static_cast<std::size_t>(series.num_vars()));
  std::iota(vars.begin(), vars.end(), Index{0});
  const auto cands = candidate_set(standardize(series), y, vars, opts.max_lag);
  auto local = opts;
  local.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(y));
  return embedding_index(cands, select_terms(cands, local), x, opts);
}

std::vector<std::vector<NonlinearCausalityResult>> pmime_all(const MultivariateTimeSeries& series,
                                                             const MixedEmbeddingOptions& opts) {
  const Index k = series.num_vars();
  const auto standardized = standardize(series);
  std::vector<Index> vars(static_cast<std::size_t>(k));
  std::iota(vars.begin(), vars.end(), Index{0});
  std::vector<std::vector<NonlinearCausalityResult>> out(static_cast<std::size_t>(k),
                                                         std::vector<NonlinearCausalityResult>(static_cast<std::size_t>(k)));
  for (Index y = 0; y < k; ++y) {
    const auto cands = candidate_set(standardized, y, vars, opts.max_lag);
    auto local = opts;
    local.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(y));
    const auto embedding = select_terms(cands, local);
    for (Index x = 0; x < k; ++x) {
      if (x == y) continue;
      out[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = embedding_index(cands, embedding, x, opts);
    }
  }
  return out;
}

}  // namespace causality
