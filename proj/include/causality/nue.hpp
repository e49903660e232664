#pragma once

// Information-theoretic causality: transfer entropy (TE), partial TE, and
// the non-uniform embedding measures MIME and PMIME.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "causality/series.hpp"

namespace causality {

/// One greedy step of the non-uniform embedding.
struct EmbeddingStep {
  LaggedTerm candidate;
  double cmi = 0.0;        // I(y_future; candidate | terms selected so far)
  double threshold = 0.0;  // value the cmi had to exceed
  double p_value = 1.0;    // termination-test p-value
  bool accepted = false;
};

struct MixedEmbedding {
  std::vector<LaggedTerm> terms;  // selection order
  std::vector<EmbeddingStep> selection_trace;
};

struct NonlinearCausalityResult {
  double index = 0.0;
  std::optional<double> p_value;
  std::optional<MixedEmbedding> embedding;
  bool clamped = false;  // MIME/PMIME ratio fell outside (0, 1] and was clamped
};

/// How a candidate's CMI is judged against its permutation replicas.
enum class TerminationRule {
  /// Keep iff the CMI exceeds the empirical (1 - alpha) quantile of the replicas.
  kPermutationQuantile,
  /// Keep iff the CMI exceeds the replica mean plus z * sd with z the normal
  /// quantile at (1 - alpha)^(1/C), C the number of candidates the step chose
  /// from. Accounts for the step picking the best of C candidates.
  kPermutationSidak,
};

/// How the candidate column is resampled for the termination replicas.
enum class PermutationScheme {
  /// Uniformly random permutation of the whole column.
  kGlobal,
  /// Each value moves to one of the `local_neighbors` nearest points in the
  /// space of the already selected terms, so the candidate keeps its
  /// dependence on them. Equals kGlobal while nothing is selected.
  kLocal,
};

struct TransferEntropyOptions {
  int m = 1;
  int tau = 1;
  int k = 10;
  int surrogates = 100;
  std::uint64_t seed = 0;
};

struct MixedEmbeddingOptions {
  int max_lag = 5;
  int k = 10;
  int replicas = 100;
  double alpha = 0.05;
  TerminationRule rule = TerminationRule::kPermutationSidak;
  PermutationScheme permutation = PermutationScheme::kLocal;
  int local_neighbors = 5;
  std::uint64_t seed = 0;
};

/// TE value I(y_t; x-block | y-block) on the series as given (no
/// standardization, no test). Blocks are uniform embeddings with lags
/// 1, 1 + tau, ..., 1 + (m - 1) tau.
double te_index(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau, int k);

/// As te_index but conditioning also on the embeddings of all other variables.
double pte_index(const MultivariateTimeSeries& series, Index x, Index y, int m, int tau, int k);

/// Standardizes the series, computes TE x -> y and its time-shifted surrogate
/// p-value. The p-value equals surrogate_test(standardize(series), te_index, ...)
/// with the same seed.
NonlinearCausalityResult te(const MultivariateTimeSeries& series, Index x, Index y, const TransferEntropyOptions& opts);

NonlinearCausalityResult pte(const MultivariateTimeSeries& series, Index x, Index y,
                             const TransferEntropyOptions& opts);

/// Greedy non-uniform embedding of the response's next value from lags
/// 1..max_lag of `candidate_vars` (data standardized first). Step 1 scores
/// candidates by MI, later steps by CMI given the selected terms; ties go to
/// the lowest variable then the lowest lag. The chosen candidate is tested
/// against permutations of its own column and the scheme stops at the first
/// rejection.
MixedEmbedding mixed_embedding(const MultivariateTimeSeries& series, Index response,
                               std::span<const Index> candidate_vars, const MixedEmbeddingOptions& opts);

/// MIME: embedding from {x, y} only, index
/// R = I(y_future; w_x | w \ w_x) / I(y_future; w), 0 when no x term is selected.
NonlinearCausalityResult mime(const MultivariateTimeSeries& series, Index x, Index y,
                              const MixedEmbeddingOptions& opts);

/// PMIME: as mime but candidates span every variable.
NonlinearCausalityResult pmime(const MultivariateTimeSeries& series, Index x, Index y,
                               const MixedEmbeddingOptions& opts);

/// PMIME for all ordered pairs. The embedding of each response is computed
/// once and shared by its K - 1 drivers; entry (x, y) is the x -> y result and
/// diagonal entries are left default. Matches pmime(series, x, y, opts).
std::vector<std::vector<NonlinearCausalityResult>> pmime_all(const MultivariateTimeSeries& series,
                                                             const MixedEmbeddingOptions& opts);

}  // namespace causality
