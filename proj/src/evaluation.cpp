#include "causality/evaluation.hpp"

#include <cmath>
#include <string>

#include "causality/errors.hpp"

namespace causality {

CausalNetwork decide_network(std::span<const PairResult> results, Index num_vars, double alpha, DecisionMode mode) {
  if (num_vars < 2) throw InvalidArgument("network needs at least two variables");
  CausalNetwork net;
  net.adjacency = MatrixXb::Constant(num_vars, num_vars, false);
  net.strength = Matrix::Zero(num_vars, num_vars);
  MatrixXb seen = MatrixXb::Constant(num_vars, num_vars, false);
  Matrix pvals = Matrix::Constant(num_vars, num_vars, std::nan(""));
  bool any_p = false;
  for (const auto& r : results) {
    if (r.from < 0 || r.from >= num_vars || r.to < 0 || r.to >= num_vars || r.from == r.to) {
      throw InvalidArgument("pair result outside the ordered pairs of the network");
    }
    seen(r.from, r.to) = true;
    net.strength(r.from, r.to) = r.strength;
    if (r.p_value) {
      pvals(r.from, r.to) = *r.p_value;
      any_p = true;
    }
    bool link = false;
    if (mode == DecisionMode::kPValue) {
      if (!r.p_value) throw InvalidArgument("p-value decision requested for a result without a p-value");
      link = *r.p_value < alpha;
    } else {
      link = r.strength > 0.0;
    }
    net.adjacency(r.from, r.to) = link;
  }
  for (Index i = 0; i < num_vars; ++i)
    for (Index j = 0; j < num_vars; ++j)
      if (i != j && !seen(i, j)) {
        throw MissingPair("no result for pair " + std::to_string(i + 1) + " -> " + std::to_string(j + 1));
      }
  if (any_p) net.p_value = std::move(pvals);
  return net;
}

ConfusionCounts confusion(const CausalNetwork& estimated, const GroundTruth& truth) {
  const Index k = truth.num_vars();
  if (estimated.adjacency.rows() != k || estimated.adjacency.cols() != k) {
    throw InvalidArgument("estimated and true networks differ in size");
  }
  ConfusionCounts c;
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      if (i == j) continue;
      const bool est = estimated.adjacency(i, j);
      const bool tru = truth.adjacency(i, j);
      if (est && tru) ++c.tp;
      else if (!est && !tru) ++c.tn;
      else if (est) ++c.fp;
      else ++c.fn;
    }
  }
  return c;
}

Scores scores(const ConfusionCounts& c) {
  auto pct = [](Index num, Index den, double empty) {
    return den == 0 ? empty : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  Scores s;
  s.sens = pct(c.tp, c.tp + c.fn, 100.0);
  s.spec = pct(c.tn, c.tn + c.fp, 100.0);
  s.precision = pct(c.tp, c.tp + c.fp, 0.0);
  s.f1 = (s.precision + s.sens) > 0.0 ? 2.0 * s.precision * s.sens / (s.precision + s.sens) : 0.0;
  // tp = 0 with nonzero sens (empty truth) still has no correct positive.
  if (c.tp == 0) s.f1 = 0.0;
  return s;
}

ScoreSummary aggregate(std::span<const Scores> per_realization) {
  ScoreSummary out;
  out.count = per_realization.size();
  if (per_realization.empty()) return out;
  const double n = static_cast<double>(per_realization.size());
  auto summarize = [&](auto field, double& mean, double& se) {
    double sum = 0.0;
    for (const auto& s : per_realization) sum += s.*field;
    mean = sum / n;
    double ss = 0.0;
    for (const auto& s : per_realization) ss += (s.*field - mean) * (s.*field - mean);
    se = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  summarize(&Scores::sens, out.mean.sens, out.std_error.sens);
  summarize(&Scores::spec, out.mean.spec, out.std_error.spec);
  summarize(&Scores::precision, out.mean.precision, out.std_error.precision);
  summarize(&Scores::f1, out.mean.f1, out.std_error.f1);
  return out;
}

}  // namespace causality
