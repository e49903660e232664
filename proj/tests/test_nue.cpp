#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "causality/errors.hpp"
#include "causality/ksg.hpp"
#include "causality/nue.hpp"
#include "causality/systems.hpp"
#include "support.hpp"

using namespace causality;

namespace {

MultivariateTimeSeries solo_henon(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  Matrix v(n + 500, 2);
  v(0, 0) = u(rng);
  v(1, 0) = u(rng);
  for (Index t = 2; t < n + 500; ++t) v(t, 0) = 1.4 - v(t - 1, 0) * v(t - 1, 0) + 0.3 * v(t - 2, 0);
  std::normal_distribution<double> g;
  for (Index t = 0; t < n + 500; ++t) v(t, 1) = g(rng);
  return MultivariateTimeSeries(v.bottomRows(n).eval());
}

// Lag block x_{t-1}, ..., x_{t-m} aligned on target rows t = m .. n-1.
Matrix lag_block(const Vector& x, int m) {
  const Index rows = x.size() - m;
  Matrix b(rows, m);
  for (Index r = 0; r < rows; ++r)
    for (int j = 0; j < m; ++j) b(r, j) = x(r + m - 1 - j);
  return b;
}

Matrix columns(const MultivariateTimeSeries& s, std::span<const LaggedTerm> terms, Index window) {
  const Index rows = s.length() - window;
  Matrix b(rows, static_cast<Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j)
    for (Index r = 0; r < rows; ++r) b(r, static_cast<Index>(j)) = s.values()(r + window - terms[j].lag, terms[j].var);
  return b;
}

bool has_var(const std::vector<LaggedTerm>& terms, Index var) {
  return std::any_of(terms.begin(), terms.end(), [&](const LaggedTerm& t) { return t.var == var; });
}

}  // namespace

TEST(TransferEntropy, IndexIsTheDefiningCmi) {
  const auto s = standardize(support::driven_pair(200, 0.5, 0.5, 1, 2));
  const int m = 2;
  const Vector x = s.column(0);
  const Vector y = s.column(1);
  const Vector target = y.tail(200 - m);
  const double oracle = support::naive_ksg_cmi(lag_block(x, m), target, lag_block(y, m), 5);
  EXPECT_NEAR(te_index(s, 0, 1, m, 1, 5), oracle, 1e-12);
}

TEST(TransferEntropy, PartialConditionsOnOthers) {
  const auto base = support::driven_pair(200, 0.5, 0.5, 1, 3);
  Matrix v(200, 3);
  v << base.values(), support::white_noise(200, 2, 4).values().col(0);
  const auto s = standardize(MultivariateTimeSeries(v));
  const Vector z = s.column(2);
  const Matrix cond = support::join(lag_block(s.column(1), 1), lag_block(z, 1));
  const double oracle = support::naive_ksg_cmi(lag_block(s.column(0), 1), s.column(1).tail(199), cond, 5);
  EXPECT_NEAR(pte_index(s, 0, 1, 1, 1, 5), oracle, 1e-12);
  EXPECT_THROW(pte_index(base, 0, 1, 1, 1, 5), InvalidArgument);
}

TEST(TransferEntropy, DetectsDirection) {
  const auto s = support::driven_pair(800, 0.4, 0.8, 1, 5);
  const TransferEntropyOptions opts{.m = 1, .tau = 1, .k = 10, .surrogates = 50, .seed = 1};
  EXPECT_LT(*te(s, 0, 1, opts).p_value, 0.05);
  EXPECT_GT(te(s, 0, 1, opts).index, te(s, 1, 0, opts).index);
}

TEST(MixedEmbedding, WhiteNoiseEmbeddingIsEmpty) {
  int empty = 0;
  MixedEmbeddingOptions opts;
  opts.max_lag = 3;
  opts.replicas = 50;
  for (int trial = 0; trial < 20; ++trial) {
    opts.seed = 40 + trial;
    const auto s = support::white_noise(512, 2, 600 + trial);
    const Index vars[] = {0, 1};
    empty += mixed_embedding(s, 1, vars, opts).terms.empty();
  }
  EXPECT_GE(empty, 18);
}

TEST(MixedEmbedding, HenonSelectsItsOwnTwoLags) {
  MixedEmbeddingOptions opts;
  opts.seed = 3;
  const auto s = solo_henon(1024, 11);
  const Index vars[] = {0, 1};
  const auto emb = mixed_embedding(s, 0, vars, opts);
  std::vector<LaggedTerm> sorted = emb.terms;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<LaggedTerm> expected{{0, 1}, {0, 2}};
  EXPECT_EQ(sorted, expected);
}

TEST(MixedEmbedding, TraceIsConsistent) {
  MixedEmbeddingOptions opts;
  opts.seed = 5;
  const auto s = gen_henon(4, 0.3, 1024, 21).series;
  const Index vars[] = {0, 1, 2, 3};
  const auto emb = mixed_embedding(s, 2, vars, opts);
  ASSERT_FALSE(emb.selection_trace.empty());
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < emb.selection_trace.size(); ++i) {
    const auto& step = emb.selection_trace[i];
    if (step.accepted) {
      EXPECT_GT(step.cmi, step.threshold);
      EXPECT_EQ(step.candidate, emb.terms[accepted]);
      ++accepted;
    } else {
      EXPECT_EQ(i + 1, emb.selection_trace.size());
      EXPECT_LE(step.cmi, step.threshold);
    }
  }
  EXPECT_EQ(accepted, emb.terms.size());
}

TEST(Mime, IndexMatchesEmbeddingDecomposition) {
  MixedEmbeddingOptions opts;
  opts.seed = 8;
  const auto s = gen_henon(3, 0.4, 1024, 4).series;
  const auto r = pmime(s, 0, 1, opts);
  ASSERT_TRUE(r.embedding.has_value());
  const auto& terms = r.embedding->terms;
  ASSERT_TRUE(has_var(terms, 0));
  const Index window = opts.max_lag;
  const auto std_s = standardize(s);
  std::vector<LaggedTerm> wx;
  std::vector<LaggedTerm> rest;
  for (const auto& t : terms) (t.var == 0 ? wx : rest).push_back(t);
  const Vector target = std_s.column(1).tail(s.length() - window);
  const double num = ksg_cmi(columns(std_s, wx, window), target, columns(std_s, rest, window), opts.k);
  const double den = ksg_mi(columns(std_s, terms, window), target, opts.k);
  EXPECT_NEAR(r.index, std::clamp(num / den, 1e-12, 1.0), 1e-12);
}

TEST(Mime, IndexZeroIffNoDriverTerm) {
  MixedEmbeddingOptions opts;
  opts.seed = 2;
  const auto s = gen_henon(3, 0.3, 1024, 6).series;
  const auto all = pmime_all(s, opts);
  for (Index x = 0; x < 3; ++x)
    for (Index y = 0; y < 3; ++y) {
      if (x == y) continue;
      const auto& r = all[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      ASSERT_TRUE(r.embedding.has_value());
      EXPECT_EQ(r.index > 0.0, has_var(r.embedding->terms, x));
      EXPECT_GE(r.index, 0.0);
      EXPECT_LE(r.index, 1.0);
      const auto single = pmime(s, x, y, opts);
      EXPECT_EQ(single.index, r.index);
    }
  // Variable 0 of the chain is uncoupled.
  EXPECT_EQ(all[1][0].index, 0.0);
  EXPECT_GT(all[0][1].index, 0.0);
}

TEST(Mime, InvariantToRescaling) {
  MixedEmbeddingOptions opts;
  opts.seed = 9;
  const auto s = gen_henon(3, 0.3, 512, 7).series;
  Matrix v = s.values();
  v.col(0) = 3.0 * v.col(0).array() + 1.0;
  v.col(2) = 0.01 * v.col(2).array() - 4.0;
  const MultivariateTimeSeries r(v);
  EXPECT_NEAR(mime(s, 0, 1, opts).index, mime(r, 0, 1, opts).index, 1e-9);
  EXPECT_NEAR(pmime(s, 2, 1, opts).index, pmime(r, 2, 1, opts).index, 1e-9);
}

TEST(Mime, Errors) {
  const auto s = support::white_noise(200, 2, 1);
  MixedEmbeddingOptions opts;
  EXPECT_THROW(mime(s, 0, 0, opts), InvalidArgument);
  EXPECT_THROW(mime(s, 0, 2, opts), InvalidArgument);
}
