#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "causality/errors.hpp"
#include "causality/systems.hpp"
#include "support.hpp"

using namespace causality;

namespace {

// 1-based link list to adjacency.
MatrixXb links(Index k, std::initializer_list<std::pair<int, int>> list) {
  MatrixXb a = MatrixXb::Constant(k, k, false);
  for (const auto& [from, to] : list) a(from - 1, to - 1) = true;
  return a;
}

double variance(const Eigen::Ref<const Vector>& v) { return (v.array() - v.mean()).square().sum() / (v.size() - 1.0); }

void expect_stable_halves(const MultivariateTimeSeries& s, double tol) {
  const Index h = s.length() / 2;
  for (Index c = 0; c < s.num_vars(); ++c) {
    const double a = variance(s.column(c).head(h));
    const double b = variance(s.column(c).tail(h));
    EXPECT_LT(std::abs(a / b - 1.0), tol) << "column " << c;
  }
}

}  // namespace

TEST(GroundTruth, S1Links) {
  EXPECT_EQ(truth_s1().adjacency, links(5, {{1, 2}, {1, 4}, {2, 4}, {4, 5}, {5, 1}, {5, 2}, {5, 3}}));
}

TEST(GroundTruth, S2AndS4Links) {
  EXPECT_EQ(truth_s2().adjacency, links(5, {{1, 2}, {1, 3}, {1, 4}, {4, 5}, {5, 4}}));
  // S4 keeps X1, X2, X4, X5.
  EXPECT_EQ(truth_s4().adjacency, links(4, {{1, 2}, {1, 3}, {3, 4}, {4, 3}}));
}

TEST(GroundTruth, S5CommonDriverAndChain) {
  const auto t = truth_s5();
  EXPECT_EQ(t.adjacency.row(4).count(), 4);
  EXPECT_EQ(t.adjacency.col(4).count(), 0);
  EXPECT_EQ(t.adjacency, links(5, {{5, 1}, {5, 2}, {5, 3}, {5, 4}, {1, 2}, {2, 3}, {3, 4}}));
}

TEST(GroundTruth, S6Counts) {
  const auto t = truth_s6();
  EXPECT_EQ(t.num_links(), 23);
  EXPECT_EQ(20 * 19 - t.num_links(), 357);
  for (int v : {3, 7, 10, 13, 15, 19, 20}) EXPECT_EQ(t.adjacency.col(v - 1).count(), 0) << "X" << v;
}

TEST(GroundTruth, HenonCountsAndDiagonal) {
  for (Index k : {3, 5, 10, 20, 50, 100}) {
    const auto t = truth_henon(k);
    EXPECT_EQ(t.num_links(), 2 * (k - 2));
    EXPECT_EQ(t.adjacency.diagonal().count(), 0);
    EXPECT_EQ(t.adjacency.col(0).count(), 0);
    EXPECT_EQ(t.adjacency.col(k - 1).count(), 0);
  }
  for (const auto& t : {truth_s1(), truth_s2(), truth_s4(), truth_s5(), truth_s6()})
    EXPECT_EQ(t.adjacency.diagonal().count(), 0);
}

TEST(Generators, ShapesAndDeterminism) {
  for (SystemId id : {SystemId::S1, SystemId::S2, SystemId::S3, SystemId::S4, SystemId::S5, SystemId::S6}) {
    SystemSpec spec;
    spec.id = id;
    spec.coupling = 0.3;
    spec.num_vars = id == SystemId::S4 ? 4 : id == SystemId::S6 ? 20 : 5;
    const auto a = generate(spec, 300, 42);
    const auto b = generate(spec, 300, 42);
    const auto c = generate(spec, 300, 43);
    EXPECT_EQ(a.series.length(), 300);
    EXPECT_EQ(a.series.num_vars(), spec.num_vars);
    EXPECT_EQ(a.series.values(), b.series.values()) << to_string(id);
    EXPECT_NE(a.series.values(), c.series.values());
    EXPECT_EQ(a.truth.adjacency, truth_for(spec).adjacency);
    EXPECT_TRUE(a.series.values().allFinite());
  }
}

TEST(Generators, S1IsStationaryAndCentred) {
  const auto s = gen_s1(8192, 3).series;
  for (Index c = 0; c < 5; ++c) EXPECT_LT(std::abs(s.column(c).mean()), 0.2);
  expect_stable_halves(s, 0.2);
}

TEST(Generators, S2NonlinearDrivingInflatesVariance) {
  const auto s = gen_s2(8192, 4).series;
  EXPECT_GT(variance(s.column(1)), 1.0);
}

TEST(Generators, S4DropsX3) {
  const auto full = gen_s2(500, 9).series;
  const auto s4 = gen_s4(500, 9).series;
  ASSERT_EQ(s4.num_vars(), 4);
  EXPECT_EQ(s4.column(0), full.column(0));
  EXPECT_EQ(s4.column(1), full.column(1));
  EXPECT_EQ(s4.column(2), full.column(3));
  EXPECT_EQ(s4.column(3), full.column(4));
}

TEST(Generators, S5DriverIsExogenous) {
  // X5 follows the solo Henon recurrence exactly, so nothing else enters it.
  const auto s = gen_s5(4096, 1).series;
  const Vector x = s.column(4);
  for (Index t = 2; t < x.size(); ++t) ASSERT_NEAR(x(t), 1.4 - x(t - 1) * x(t - 1) + 0.3 * x(t - 2), 1e-12);
  EXPECT_LT(s.values().cwiseAbs().maxCoeff(), 10.0);
}

TEST(Generators, S6IsStationary) {
  // Squares and products of persistent AR terms make single runs very
  // heavy-tailed, so first and second halves are pooled over seeds and
  // compared by interquartile range.
  auto iqr = [](std::vector<double> s) {
    std::sort(s.begin(), s.end());
    return s[s.size() * 3 / 4] - s[s.size() / 4];
  };
  std::vector<std::vector<double>> first(20);
  std::vector<std::vector<double>> second(20);
  Vector pure_ar = Vector::Zero(20);
  for (int seed = 0; seed < 20; ++seed) {
    const auto s = gen_s6(8192, 300 + seed).series;
    for (Index c = 0; c < 20; ++c) {
      const auto col = s.column(c);
      first[static_cast<std::size_t>(c)].insert(first[static_cast<std::size_t>(c)].end(), col.begin(), col.begin() + 4096);
      second[static_cast<std::size_t>(c)].insert(second[static_cast<std::size_t>(c)].end(), col.begin() + 4096, col.end());
      pure_ar(c) += variance(col) / 20.0;
    }
  }
  for (std::size_t c = 0; c < 20; ++c) {
    const double a = iqr(first[c]);
    const double b = iqr(second[c]);
    EXPECT_LT(std::abs(a * a / (b * b) - 1.0), 0.3) << "X" << c + 1;
  }
  // Pure AR(1) rows with coefficient 0.8 have variance 1 / (1 - 0.64).
  for (int v : {3, 7, 10, 13, 15, 19, 20}) EXPECT_NEAR(pure_ar(v - 1), 1.0 / 0.36, 0.1 / 0.36) << "X" << v;
}

TEST(Generators, HenonDecoupledAndBounded) {
  const auto s = gen_henon(5, 0.0, 4096, 8).series;
  const Matrix z = standardize(s).values();
  for (Index a = 0; a < 5; ++a)
    for (Index b = a + 1; b < 5; ++b) EXPECT_LT(std::abs(z.col(a).dot(z.col(b)) / 4095.0), 0.1);
  for (int seed = 0; seed < 10; ++seed) {
    const auto h = gen_henon(20, 0.3, 4096, seed).series;
    EXPECT_LT(h.values().cwiseAbs().maxCoeff(), 10.0);
    // After the transient the uncoupled maps sit on the attractor.
    const auto free = gen_henon(20, 0.0, 4096, seed).series;
    for (Index c = 0; c < 20; ++c)
      EXPECT_LT(std::abs(free.column(c).head(2048).mean() - free.column(c).tail(2048).mean()), 0.1);
  }
  EXPECT_THROW(gen_henon(2, 0.3, 100, 1), InvalidArgument);
  EXPECT_THROW(gen_henon(5, 0.7, 100, 1), InvalidArgument);
}

TEST(Noise, GaussianVarianceAdditivity) {
  const auto s = gen_s1(20000, 1).series;
  const auto noisy = add_noise(s, {NoiseKind::Gaussian, 0.5}, 2);
  for (Index c = 0; c < 5; ++c) EXPECT_NEAR(variance(noisy.column(c)) / variance(s.column(c)), 1.25, 0.0625);
  const auto tiny = add_noise(s, {NoiseKind::Gaussian, 1e-12}, 2);
  EXPECT_LT((tiny.values() - s.values()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Noise, TrimmedScaleForHeavyTails) {
  const auto s = gen_s1(20000, 2).series;
  for (NoiseKind kind : {NoiseKind::TStudent2, NoiseKind::Garch11}) {
    const auto noisy = add_noise(s, {kind, 0.2}, 3);
    for (Index c = 0; c < 5; ++c) {
      const Vector e = noisy.column(c) - s.column(c);
      const double target = 0.2 * std::sqrt(variance(s.column(c)));
      const double got = kind == NoiseKind::TStudent2 ? trimmed_sd(e) : std::sqrt(variance(e));
      EXPECT_NEAR(got / target, 1.0, 0.1) << to_string(kind);
    }
  }
}

TEST(Noise, GarchUnconditionalVariance) {
  const Vector e = garch11_noise(200000, 4);
  EXPECT_NEAR(variance(e), 4.0, 0.8);
}

TEST(Transient, Discard) {
  const auto s = support::white_noise(1100, 2, 1);
  const auto d = transient_discard(s);
  EXPECT_EQ(d.length(), 100);
  EXPECT_EQ(d.values(), s.values().bottomRows(100));
  EXPECT_EQ(transient_discard(s, 0).values(), s.values());
}

TEST(GroundTruth, EdgeListExport) {
  std::ostringstream out;
  write_edge_list(out, truth_s2());
  EXPECT_EQ(out.str(), "from,to\n1,2\n1,3\n1,4\n4,5\n5,4\n");
}
