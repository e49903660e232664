#include "causality/ksg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "causality/errors.hpp"
#include "causality/special.hpp"

namespace causality {

PointCloud hstack(std::initializer_list<Eigen::Ref<const Matrix>> blocks) {
  Index rows = -1;
  Index cols = 0;
  for (const auto& b : blocks) {
    if (b.cols() == 0) continue;
    if (rows >= 0 && b.rows() != rows) throw InvalidArgument("hstack: blocks have different row counts");
    rows = b.rows();
    cols += b.cols();
  }
  PointCloud out(std::max<Index>(rows, 0), cols);
  Index at = 0;
  for (const auto& b : blocks) {
    if (b.cols() == 0) continue;
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

const std::vector<double>& digamma_table(Index n) {
  thread_local std::vector<double> table{0.0};
  for (auto i = static_cast<Index>(table.size()); i <= n; ++i) table.push_back(digamma(static_cast<double>(i)));
  return table;
}

NeighborLists::NeighborLists(const Eigen::Ref<const Matrix>& points, Index width)
    : n_(points.rows()), width_(std::clamp<Index>(width, 0, std::max<Index>(points.rows() - 1, 0))) {
  dist_.resize(static_cast<std::size_t>(n_ * width_));
  index_.resize(static_cast<std::size_t>(n_ * width_));
  std::vector<double> d(static_cast<std::size_t>(n_));
  std::vector<std::int32_t> order(static_cast<std::size_t>(n_));
  for (Index i = 0; i < n_; ++i) {
    std::fill(d.begin(), d.end(), 0.0);
    for (Index c = 0; c < points.cols(); ++c) {
      const double q = points(i, c);
      for (Index j = 0; j < n_; ++j) {
        const double diff = std::abs(points(j, c) - q);
        d[static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(j)] < diff ? diff : d[static_cast<std::size_t>(j)];
      }
    }
    d[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    std::iota(order.begin(), order.end(), 0);
    auto closer = [&](std::int32_t a, std::int32_t b) {
      const double da = d[static_cast<std::size_t>(a)];
      const double db = d[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    };
    const auto mid = order.begin() + width_;
    if (width_ < n_) std::nth_element(order.begin(), mid, order.end(), closer);
    std::sort(order.begin(), mid, closer);
    for (Index r = 0; r < width_; ++r) {
      const std::int32_t j = order[static_cast<std::size_t>(r)];
      dist_[static_cast<std::size_t>(i * width_ + r)] = d[static_cast<std::size_t>(j)];
      index_[static_cast<std::size_t>(i * width_ + r)] = j;
    }
  }
}

namespace {

// Enough for the marginal counts of typical series; longer scans use the trees.
Index list_width(Index n, int k) { return std::min<Index>(n - 1, std::max<Index>(512, 8 * static_cast<Index>(k))); }

// Number of listed distances below radius, or -1 if unlisted points may be.
Index count_listed(const NeighborLists& lists, Index i, double radius) {
  const double* d = lists.distances(i);
  const Index w = lists.width();
  const auto cnt = static_cast<Index>(std::lower_bound(d, d + w, radius) - d);
  return cnt < w || lists.complete() ? cnt : -1;
}

void offer(std::vector<double>& best, double dist) {
  if (!(dist < best.back())) return;
  auto it = std::upper_bound(best.begin(), best.end(), dist);
  std::move_backward(it, best.end() - 1, best.end());
  *it = dist;
}

}  // namespace

ConditionalMutualInformation::ConditionalMutualInformation(PointCloud y, PointCloud z, int k)
    : y_(std::move(y)),
      z_(std::move(z)),
      k_(k),
      yz_index_(z_.cols() > 0 ? hstack({y_, z_}) : y_),
      yz_lists_(z_.cols() > 0 ? hstack({y_, z_}) : y_, list_width(y_.rows(), k)) {
  if (k_ < 1) throw InvalidArgument("k must be >= 1");
  if (y_.cols() < 1) throw InvalidArgument("target block must have at least one column");
  if (z_.cols() > 0) {
    if (z_.rows() != y_.rows()) throw InvalidArgument("conditioning block has the wrong number of rows");
    z_index_.emplace(z_);
    z_lists_.emplace(z_, list_width(y_.rows(), k));
  }
  if (k_ >= y_.rows()) {
    throw NotEnoughPoints("k = " + std::to_string(k_) + " needs more than " + std::to_string(y_.rows()) + " points");
  }
}

double ConditionalMutualInformation::operator()(const Eigen::Ref<const Matrix>& x_in) const {
  const Index n = y_.rows();
  if (x_in.rows() != n) throw InvalidArgument("source block has the wrong number of rows");
  if (x_in.cols() < 1) throw InvalidArgument("source block must have at least one column");
  if (!x_in.allFinite()) throw InvalidArgument("source block contains non-finite values");
  const Matrix x = x_in;
  const Index dx = x.cols();
  const auto& psi = digamma_table(n);

  std::optional<NeighborIndex> joint;
  std::optional<NeighborIndex> xz;
  auto x_distance = [&](Index i, Index j) {
    double d = 0.0;
    for (Index c = 0; c < dx; ++c) d = std::max(d, std::abs(x(i, c) - x(j, c)));
    return d;
  };

  std::vector<double> best(static_cast<std::size_t>(k_));
  Index zero_radius = 0;
  double sum = 0.0;
  const Index w = yz_lists_.width();
  for (Index i = 0; i < n; ++i) {
    // k-th neighbour distance in the joint space; joint >= (Y, Z) distance.
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    const double* dyz = yz_lists_.distances(i);
    const std::int32_t* nb = yz_lists_.neighbors(i);
    Index r = 0;
    for (; r < w && dyz[r] < best.back(); ++r) offer(best, std::max(dyz[r], x_distance(i, nb[r])));
    const bool exhausted = r == w && !yz_lists_.complete() && !(w > 0 && best.back() <= dyz[w - 1]);
    if (exhausted) {
      if (!joint) joint.emplace(hstack({x, y_, z_}));
      joint->knn_distances(i, k_, best);
    }
    const double eps = best.back();
    if (eps == 0.0) ++zero_radius;

    Index n_yz = count_listed(yz_lists_, i, eps);
    if (n_yz < 0) n_yz = yz_index_.count_within(i, eps, true);

    Index n_z = 0;
    Index n_xz = -1;
    if (z_lists_) {
      n_z = count_listed(*z_lists_, i, eps);
      if (n_z < 0) n_z = z_index_->count_within(i, eps, true);
      const double* dz = z_lists_->distances(i);
      const std::int32_t* zb = z_lists_->neighbors(i);
      const Index wz = z_lists_->width();
      Index count = 0;
      Index q = 0;
      for (; q < wz && dz[q] < eps; ++q) count += x_distance(i, zb[q]) < eps;
      if (q < wz || z_lists_->complete()) n_xz = count;
    } else {
      // With no conditioning block every other point is at z-distance 0.
      n_z = eps > 0.0 ? n - 1 : 0;
    }
    if (n_xz < 0) {
      if (!xz) xz.emplace(z_.cols() > 0 ? hstack({x, z_}) : x);
      n_xz = xz->count_within(i, eps, true);
    }
    sum += psi[static_cast<std::size_t>(n_xz + 1)] + psi[static_cast<std::size_t>(n_yz + 1)] -
           psi[static_cast<std::size_t>(n_z + 1)];
  }
  if (static_cast<double>(zero_radius) > 0.05 * static_cast<double>(n)) {
    throw DegenerateDistances(std::to_string(zero_radius) + " of " + std::to_string(n) +
                              " points have a zero k-th neighbour distance");
  }
  return psi[static_cast<std::size_t>(k_)] - sum / static_cast<double>(n);
}

double ksg_cmi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
               const Eigen::Ref<const Matrix>& z, int k) {
  if (y.rows() != x.rows()) throw InvalidArgument("ksg_cmi: blocks have different row counts");
  return ConditionalMutualInformation(y, z, k)(x);
}

double ksg_mi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y, int k) {
  return ksg_cmi(x, y, Matrix(y.rows(), 0), k);
}

}  // namespace causality
