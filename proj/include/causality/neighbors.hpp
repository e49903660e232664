#pragma once

// Exact nearest-neighbour queries under the maximum (Chebyshev) norm.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "causality/errors.hpp"
#include "causality/types.hpp"

namespace causality {

/// Chebyshev distance between rows i and j of a point matrix.
template <typename Derived>
typename Derived::Scalar max_norm_distance(const Eigen::MatrixBase<Derived>& points, Index i, Index j) {
  return (points.row(i) - points.row(j)).cwiseAbs().maxCoeff();
}

/// kd-tree over the rows of an n x d point cloud.
///
/// Queries are by point index and always exclude the query point itself;
/// other points at distance zero (duplicates) are ordinary neighbours.
/// One-dimensional clouds use a sorted array instead of a tree. Immutable
/// after construction, so concurrent queries are safe.
template <typename Scalar>
class BasicNeighborIndex {
 public:
  using PointMatrix = MatrixX<Scalar>;

  static constexpr Index kMaxLeafSize = 256;

  explicit BasicNeighborIndex(const Eigen::Ref<const PointMatrix>& points, Index leaf_size = 48)
      : n_(points.rows()), d_(points.cols()), leaf_size_(std::clamp<Index>(leaf_size, 1, kMaxLeafSize)) {
    if (d_ < 1) throw InvalidArgument("point cloud must have at least one dimension");
    if (!points.allFinite()) throw InvalidArgument("point cloud contains non-finite values");
    order_.resize(static_cast<std::size_t>(n_));
    std::iota(order_.begin(), order_.end(), Index{0});
    if (d_ == 1) {
      std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) { return points(a, 0) < points(b, 0); });
    } else if (n_ > 0) {
      nodes_.reserve(static_cast<std::size_t>(2 * n_ / leaf_size_ + 2));
      build(points, 0, n_);
    }
    data_.resize(static_cast<std::size_t>(n_ * d_));
    position_.resize(static_cast<std::size_t>(n_));
    for (Index p = 0; p < n_; ++p) {
      const Index orig = order_[static_cast<std::size_t>(p)];
      position_[static_cast<std::size_t>(orig)] = p;
      for (Index c = 0; c < d_; ++c) data_[static_cast<std::size_t>(c * n_ + p)] = points(orig, c);
    }
    if (d_ > 1) compute_boxes();
  }

  Index size() const { return n_; }
  Index dim() const { return d_; }

  /// Distance to the k-th nearest neighbour of point i (self excluded).
  Scalar knn_distance(Index i, Index k) const {
    std::vector<Scalar> best;
    knn_distances(i, k, best);
    return best.back();
  }

  /// Ascending distances to the k nearest neighbours of point i.
  void knn_distances(Index i, Index k, std::vector<Scalar>& best) const {
    check_point(i);
    if (k < 1) throw InvalidArgument("k must be >= 1");
    if (k >= n_) {
      throw NotEnoughPoints("k = " + std::to_string(k) + " needs more than " + std::to_string(n_) + " points");
    }
    best.assign(static_cast<std::size_t>(k), std::numeric_limits<Scalar>::infinity());
    const Index self = position_[static_cast<std::size_t>(i)];
    if (d_ == 1) {
      knn_sorted(self, best);
    } else {
      const auto q = query(self);
      knn_node(0, q.data(), self, best);
    }
  }

  /// Number of points other than i within `radius` of point i: distance
  /// < radius when strict, <= radius otherwise.
  Index count_within(Index i, Scalar radius, bool strict = true) const {
    check_point(i);
    const Index self = position_[static_cast<std::size_t>(i)];
    Index count = 0;
    if (d_ == 1) {
      count = count_sorted(data_[static_cast<std::size_t>(self)], radius, strict);
    } else {
      const auto q = query(self);
      count = count_node(0, q.data(), radius, strict);
    }
    // The query point is always at distance 0 and counted when 0 qualifies.
    const bool self_counted = strict ? Scalar(0) < radius : Scalar(0) <= radius;
    return self_counted ? count - 1 : count;
  }

 private:
  struct Node {
    Index begin = 0;
    Index end = 0;
    Index left = -1;
    Index right = -1;
  };

  std::vector<Scalar> query(Index p) const {
    std::vector<Scalar> q(static_cast<std::size_t>(d_));
    for (Index c = 0; c < d_; ++c) q[static_cast<std::size_t>(c)] = data_[static_cast<std::size_t>(c * n_ + p)];
    return q;
  }

  void check_point(Index i) const {
    if (i < 0 || i >= n_) throw InvalidArgument("point index out of range");
  }

  Index build(const Eigen::Ref<const PointMatrix>& points, Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back({begin, end, -1, -1});
    if (end - begin <= leaf_size_) return id;
    Index split_dim = 0;
    Scalar widest = -1;
    for (Index c = 0; c < d_; ++c) {
      Scalar lo = std::numeric_limits<Scalar>::infinity();
      Scalar hi = -lo;
      for (Index p = begin; p < end; ++p) {
        const Scalar v = points(order_[static_cast<std::size_t>(p)], c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        split_dim = c;
      }
    }
    const Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](Index a, Index b) { return points(a, split_dim) < points(b, split_dim); });
    const Index left = build(points, begin, mid);
    const Index right = build(points, mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  void compute_boxes() {
    boxes_.resize(nodes_.size() * static_cast<std::size_t>(2 * d_));
    for (std::size_t id = nodes_.size(); id-- > 0;) {
      Scalar* lo = &boxes_[id * static_cast<std::size_t>(2 * d_)];
      Scalar* hi = lo + d_;
      const Node& node = nodes_[id];
      if (node.left < 0) {
        for (Index c = 0; c < d_; ++c) {
          lo[c] = std::numeric_limits<Scalar>::infinity();
          hi[c] = -std::numeric_limits<Scalar>::infinity();
        }
        for (Index c = 0; c < d_; ++c) {
          const Scalar* col = &data_[static_cast<std::size_t>(c * n_)];
          for (Index p = node.begin; p < node.end; ++p) {
            lo[c] = std::min(lo[c], col[p]);
            hi[c] = std::max(hi[c], col[p]);
          }
        }
      } else {
        const Scalar* l = &boxes_[static_cast<std::size_t>(node.left * 2 * d_)];
        const Scalar* r = &boxes_[static_cast<std::size_t>(node.right * 2 * d_)];
        for (Index c = 0; c < d_; ++c) {
          lo[c] = std::min(l[c], r[c]);
          hi[c] = std::max(l[d_ + c], r[d_ + c]);
        }
      }
    }
  }

  // Lower bound on the distance from q to any point in the node's box.
  Scalar box_min_distance(Index id, const Scalar* q) const {
    const Scalar* lo = &boxes_[static_cast<std::size_t>(id * 2 * d_)];
    const Scalar* hi = lo + d_;
    Scalar dist = 0;
    for (Index c = 0; c < d_; ++c) {
      if (q[c] < lo[c]) {
        dist = std::max(dist, lo[c] - q[c]);
      } else if (q[c] > hi[c]) {
        dist = std::max(dist, q[c] - hi[c]);
      }
    }
    return dist;
  }

  Scalar box_max_distance(Index id, const Scalar* q) const {
    const Scalar* lo = &boxes_[static_cast<std::size_t>(id * 2 * d_)];
    const Scalar* hi = lo + d_;
    Scalar dist = 0;
    for (Index c = 0; c < d_; ++c) dist = std::max({dist, std::abs(q[c] - lo[c]), std::abs(hi[c] - q[c])});
    return dist;
  }

  // Distances from q to the points of [begin, end), written to out.
  void leaf_distances(Index begin, Index end, const Scalar* q, Scalar* out) const {
    const Index len = end - begin;
    const Scalar* col = &data_[static_cast<std::size_t>(begin)];
    for (Index p = 0; p < len; ++p) out[p] = std::abs(col[p] - q[0]);
    for (Index c = 1; c < d_; ++c) {
      col = &data_[static_cast<std::size_t>(c * n_ + begin)];
      const Scalar qc = q[c];
      for (Index p = 0; p < len; ++p) {
        const Scalar diff = std::abs(col[p] - qc);
        out[p] = out[p] < diff ? diff : out[p];
      }
    }
  }

  static void offer(std::vector<Scalar>& best, Scalar dist) {
    if (!(dist < best.back())) return;
    auto it = std::upper_bound(best.begin(), best.end(), dist);
    std::move_backward(it, best.end() - 1, best.end());
    *it = dist;
  }

  void knn_node(Index id, const Scalar* q, Index self, std::vector<Scalar>& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      Scalar dist[kMaxLeafSize];
      leaf_distances(node.begin, node.end, q, dist);
      for (Index p = node.begin; p < node.end; ++p) {
        if (p != self) offer(best, dist[p - node.begin]);
      }
      return;
    }
    const Scalar dl = box_min_distance(node.left, q);
    const Scalar dr = box_min_distance(node.right, q);
    const bool left_first = dl <= dr;
    const Index first = left_first ? node.left : node.right;
    const Index second = left_first ? node.right : node.left;
    const Scalar d_first = left_first ? dl : dr;
    const Scalar d_second = left_first ? dr : dl;
    if (d_first < best.back()) knn_node(first, q, self, best);
    if (d_second < best.back()) knn_node(second, q, self, best);
  }

  Index count_node(Index id, const Scalar* q, Scalar radius, bool strict) const {
    const Scalar lower = box_min_distance(id, q);
    if (strict ? !(lower < radius) : !(lower <= radius)) return 0;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const Scalar upper = box_max_distance(id, q);
    if (strict ? upper < radius : upper <= radius) return node.end - node.begin;
    if (node.left < 0) {
      Scalar dist[kMaxLeafSize];
      leaf_distances(node.begin, node.end, q, dist);
      const Index len = node.end - node.begin;
      Index count = 0;
      if (strict) {
        for (Index p = 0; p < len; ++p) count += dist[p] < radius;
      } else {
        for (Index p = 0; p < len; ++p) count += dist[p] <= radius;
      }
      return count;
    }
    return count_node(node.left, q, radius, strict) + count_node(node.right, q, radius, strict);
  }

  void knn_sorted(Index self, std::vector<Scalar>& best) const {
    const Scalar q = data_[static_cast<std::size_t>(self)];
    Index lo = self - 1;
    Index hi = self + 1;
    for (std::size_t found = 0; found < best.size(); ++found) {
      const Scalar dl = lo >= 0 ? q - data_[static_cast<std::size_t>(lo)] : std::numeric_limits<Scalar>::infinity();
      const Scalar dh = hi < n_ ? data_[static_cast<std::size_t>(hi)] - q : std::numeric_limits<Scalar>::infinity();
      if (dl <= dh) {
        best[found] = dl;
        --lo;
      } else {
        best[found] = dh;
        ++hi;
      }
    }
  }

  Index count_sorted(Scalar q, Scalar radius, bool strict) const {
    auto inside = [&](Scalar dist) { return strict ? dist < radius : dist <= radius; };
    // Distances are monotone on each side of q, so both ends are found by bisection.
    const auto first = std::partition_point(data_.begin(), data_.end(),
                                            [&](Scalar v) { return v < q && !inside(q - v); });
    const auto last = std::partition_point(first, data_.end(), [&](Scalar v) { return v < q || inside(v - q); });
    return static_cast<Index>(last - first);
  }

  Index n_;
  Index d_;
  Index leaf_size_;
  std::vector<Index> order_;     // tree position -> original index
  std::vector<Index> position_;  // original index -> tree position
  std::vector<Scalar> data_;     // column-major points in tree order
  std::vector<Node> nodes_;
  std::vector<Scalar> boxes_;  // per node: lo[d], hi[d]
};

using NeighborIndex = BasicNeighborIndex<double>;

/// knn_distance over a built index; see BasicNeighborIndex::knn_distance.
template <typename Scalar>
Scalar knn_distance(const BasicNeighborIndex<Scalar>& index, Index i, Index k) {
  return index.knn_distance(i, k);
}

template <typename Scalar>
Index count_within(const BasicNeighborIndex<Scalar>& index, Index i, Scalar radius, bool strict = true) {
  if (radius < 0) throw InvalidArgument("radius must be non-negative");
  return index.count_within(i, radius, strict);
}

}  // namespace causality
