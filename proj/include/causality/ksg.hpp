#pragma once

// Kraskov-Stoegbauer-Grassberger (algorithm 1) estimators of mutual
// information and conditional mutual information, in nats.

#include <cstdint>
#include <optional>
#include <vector>

#include "causality/neighbors.hpp"
#include "causality/types.hpp"

namespace causality {

/// n x d matrix of samples, one row per observation.
using PointCloud = Matrix;

/// Horizontal concatenation of blocks with equal row counts.
PointCloud hstack(std::initializer_list<Eigen::Ref<const Matrix>> blocks);

/// The `width` nearest neighbours of every point (self excluded) under the
/// max norm, by increasing distance.
class NeighborLists {
 public:
  NeighborLists(const Eigen::Ref<const Matrix>& points, Index width);

  Index size() const { return n_; }
  Index width() const { return width_; }
  /// True when every other point is listed.
  bool complete() const { return width_ == n_ - 1; }
  const double* distances(Index i) const { return &dist_[static_cast<std::size_t>(i * width_)]; }
  const std::int32_t* neighbors(Index i) const { return &index_[static_cast<std::size_t>(i * width_)]; }

 private:
  Index n_;
  Index width_;
  std::vector<double> dist_;
  std::vector<std::int32_t> index_;
};

/// I(X; Y | Z) with Y and Z fixed, evaluated for many X blocks.
///
/// Sorted neighbour lists of the (Y, Z) and Z spaces are built once. The
/// joint k-th neighbour search then scans a point's (Y, Z) list until the
/// (Y, Z) distance alone exceeds the current k-th joint distance, and the
/// (X, Z) count scans its Z list. Points whose lists run out fall back to
/// kd-trees, so results are exact. An empty Z (zero columns) yields the
/// unconditional KSG mutual information.
class ConditionalMutualInformation {
 public:
  ConditionalMutualInformation(PointCloud y, PointCloud z, int k);

  double operator()(const Eigen::Ref<const Matrix>& x) const;

  Index samples() const { return y_.rows(); }
  int k() const { return k_; }
  /// Neighbour lists of the conditioning space, null when Z is empty.
  const NeighborLists* conditioning_neighbors() const { return z_lists_ ? &*z_lists_ : nullptr; }

 private:
  PointCloud y_;
  PointCloud z_;
  int k_;
  NeighborIndex yz_index_;
  std::optional<NeighborIndex> z_index_;
  NeighborLists yz_lists_;
  std::optional<NeighborLists> z_lists_;
};

/// I(X; Y) = psi(k) + psi(n) - <psi(n_x + 1) + psi(n_y + 1)> with joint-space
/// k-th neighbour radii and strict marginal counts.
double ksg_mi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y, int k);

/// I(X; Y | Z) = psi(k) - <psi(n_xz + 1) + psi(n_yz + 1) - psi(n_z + 1)>.
///
/// Throws DegenerateDistances when more than 5% of the points have a zero
/// k-th neighbour distance in the joint space, NotEnoughPoints if k >= n.
double ksg_cmi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
               const Eigen::Ref<const Matrix>& z, int k);

/// psi(1..n) tabulated for the estimators; entry i holds psi(i).
const std::vector<double>& digamma_table(Index n);

}  // namespace causality
