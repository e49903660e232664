#include <gtest/gtest.h>

#include <random>

#include "causality/errors.hpp"
#include "causality/ksg.hpp"
#include "causality/neighbors.hpp"
#include "support.hpp"

using namespace causality;

namespace {

// Random cloud; coarse rounding produces many ties and duplicates.
Matrix cloud(Index n, Index d, std::uint64_t seed, bool rounded) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix p(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) p(i, c) = rounded ? std::round(2.0 * g(rng)) / 2.0 : g(rng);
  return p;
}

}  // namespace

TEST(NeighborIndex, MatchesBruteForce) {
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + trial % 5;
    const Index n = 20 + (trial * 37) % 300;
    const bool rounded = trial % 3 == 0;
    const Matrix p = cloud(n, d, 100 + trial, rounded);
    const NeighborIndex index(p, 1 + trial % 60);
    for (Index i = 0; i < n; i += 7) {
      for (Index k : {Index{1}, Index{4}, Index{10}}) {
        const double eps = index.knn_distance(i, k);
        ASSERT_EQ(eps, support::brute_knn(p, i, k)) << "trial " << trial;
        ASSERT_EQ(index.count_within(i, eps, true), support::brute_count(p, i, eps, true));
        ASSERT_EQ(index.count_within(i, eps, false), support::brute_count(p, i, eps, false));
      }
    }
  }
}

TEST(NeighborIndex, KnnDistancesAscending) {
  const Matrix p = cloud(150, 3, 5, true);
  const NeighborIndex index(p);
  std::vector<double> best;
  index.knn_distances(10, 25, best);
  ASSERT_EQ(best.size(), 25u);
  EXPECT_TRUE(std::is_sorted(best.begin(), best.end()));
  for (Index k = 1; k <= 25; ++k) EXPECT_EQ(best[static_cast<std::size_t>(k - 1)], support::brute_knn(p, 10, k));
}

TEST(NeighborIndex, DuplicatesAreNeighbours) {
  Matrix p(4, 2);
  p << 0, 0, 0, 0, 1, 1, 3, 0;
  const NeighborIndex index(p);
  EXPECT_EQ(index.knn_distance(0, 1), 0.0);
  EXPECT_EQ(index.knn_distance(0, 2), 1.0);
  EXPECT_EQ(index.count_within(0, 0.0, false), 1);
  EXPECT_EQ(index.count_within(0, 0.0, true), 0);
  EXPECT_EQ(index.count_within(0, -1.0, false), 0);
  EXPECT_EQ(index.count_within(0, 1.0, false), 2);
}

TEST(NeighborIndex, Errors) {
  const Matrix p = cloud(10, 2, 1, false);
  const NeighborIndex index(p);
  EXPECT_THROW(index.knn_distance(0, 10), NotEnoughPoints);
  EXPECT_THROW(index.knn_distance(0, 0), InvalidArgument);
  EXPECT_THROW(index.knn_distance(10, 1), InvalidArgument);
  Matrix bad = p;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(NeighborIndex{bad}, InvalidArgument);
  EXPECT_THROW(NeighborIndex{Matrix(5, 0)}, InvalidArgument);
}

TEST(NeighborIndex, FloatScalar) {
  const Matrix p = cloud(120, 3, 8, false);
  const MatrixX<float> pf = p.cast<float>();
  const BasicNeighborIndex<float> index(pf);
  for (Index i = 0; i < 120; i += 11) {
    const float eps = index.knn_distance(i, 5);
    EXPECT_FLOAT_EQ(eps, static_cast<float>(support::brute_knn(pf.cast<double>(), i, 5)));
  }
}

TEST(NeighborLists, SortedAndConsistentWithBruteForce) {
  const Matrix p = cloud(200, 2, 12, true);
  const NeighborLists lists(p, 30);
  EXPECT_EQ(lists.width(), 30);
  EXPECT_FALSE(lists.complete());
  for (Index i = 0; i < 200; i += 9) {
    const double* d = lists.distances(i);
    const std::int32_t* nb = lists.neighbors(i);
    for (Index j = 0; j < 30; ++j) {
      EXPECT_NE(nb[j], i);
      EXPECT_EQ(d[j], support::chebyshev(p, i, nb[j]));
      EXPECT_EQ(d[j], support::brute_knn(p, i, j + 1));
    }
  }
  EXPECT_TRUE(NeighborLists(p, 199).complete());
}
