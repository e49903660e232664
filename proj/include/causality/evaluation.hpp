#pragma once

// Turning per-pair results into networks and scoring them against truth.

#include <optional>
#include <span>
#include <vector>

#include "causality/systems.hpp"

namespace causality {

/// Result of one measure on one ordered pair.
struct PairResult {
  Index from = 0;
  Index to = 0;
  double strength = 0.0;
  std::optional<double> p_value;
};

enum class DecisionMode {
  kPValue,         // link iff p < alpha
  kPositiveIndex,  // link iff strength > 0
};

struct CausalNetwork {
  MatrixXb adjacency;
  Matrix strength;
  std::optional<Matrix> p_value;
};

/// Requires every ordered pair (i, j), i != j, of a K-variable system;
/// throws MissingPair otherwise.
CausalNetwork decide_network(std::span<const PairResult> results, Index num_vars, double alpha, DecisionMode mode);

struct ConfusionCounts {
  Index tp = 0;
  Index tn = 0;
  Index fp = 0;
  Index fn = 0;

  Index total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const CausalNetwork& estimated, const GroundTruth& truth);

/// Percentages in [0, 100].
struct Scores {
  double sens = 0.0;
  double spec = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Empty denominators: sens = 100 when tp + fn = 0, spec = 100 when
/// tn + fp = 0, precision = 0 when tp + fp = 0, f1 = 0 when
/// precision + sens = 0.
Scores scores(const ConfusionCounts& counts);

struct ScoreSummary {
  std::size_t count = 0;
  Scores mean;
  Scores std_error;
};

/// Plain means over realizations (F1 is averaged per realization, not
/// recomputed from pooled counts) with standard errors of the mean.
ScoreSummary aggregate(std::span<const Scores> per_realization);

}  // namespace causality
