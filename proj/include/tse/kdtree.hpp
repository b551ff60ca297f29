#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tse/errors.hpp"

namespace tse {

// k-d tree over row-major points with all distances in the max norm.
// Supports k-th neighbor distances and strict fixed-radius counts; both
// exclude the query point itself by index.
class KdTree {
public:
  KdTree(const double* pts, std::size_t n, std::size_t dim,
         std::size_t leaf_size = 24)
      : pts_(pts), n_(n), dim_(dim), leaf_size_(std::max<std::size_t>(leaf_size, 4)) {
    if (n_ == 0) throw TooFewPoints("kd-tree needs at least one point");
    idx_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) idx_[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * n_ / leaf_size_ + 4);
    boxes_.reserve((2 * n_ / leaf_size_ + 4) * 2 * dim_);
    build(0, n_);
  }

  // Distance to the k-th nearest neighbor of point `query` (1-based k,
  // self excluded). k must be < n.
  double knn_distance(std::size_t query, std::size_t k) const {
    std::vector<double> heap;
    knn(query, k, heap);
    return heap.front();
  }

  // Smallest k' >= k whose k'-th neighbor distance is positive, for data
  // with duplicate points. Returns {distance, k'}; throws if every other
  // point coincides with the query.
  std::pair<double, std::size_t> knn_distance_positive(std::size_t query,
                                                       std::size_t k) const {
    std::size_t kk = k;
    while (kk < n_) {
      std::vector<double> heap;
      knn(query, kk, heap);
      if (heap.front() > 0.0) {
        // shrink back to the first positive rank
        std::sort(heap.begin(), heap.end());
        for (std::size_t r = 0; r < heap.size(); ++r)
          if (heap[r] > 0.0 && r + 1 >= k)
            return {heap[r], r + 1};
      }
      if (kk == n_ - 1) break;
      kk = std::min(n_ - 1, kk * 2);
    }
    throw NumericalError("all points coincide with the query point");
  }

  // Number of points j != query with max-norm distance strictly below r.
  std::size_t count_within(std::size_t query, double r) const {
    if (!(r > 0.0)) return 0;
    std::size_t count = 0;
    count_node(0, pts_ + query * dim_, r, count);
    return count - 1;  // the query point itself always qualifies
  }

  std::size_t size() const { return n_; }

private:
  struct Node {
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;  // -1: leaf
  };

  const double* box_lo(std::size_t node) const {
    return boxes_.data() + node * 2 * dim_;
  }
  const double* box_hi(std::size_t node) const {
    return boxes_.data() + node * 2 * dim_ + dim_;
  }

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto node_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin),
                      static_cast<std::uint32_t>(end)});
    // bounding box
    const std::size_t box_off = boxes_.size();
    boxes_.resize(box_off + 2 * dim_);
    double* lo = boxes_.data() + box_off;
    double* hi = lo + dim_;
    for (std::size_t d = 0; d < dim_; ++d) {
      lo[d] = std::numeric_limits<double>::infinity();
      hi[d] = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t i = begin; i < end; ++i) {
      const double* p = pts_ + idx_[i] * dim_;
      for (std::size_t d = 0; d < dim_; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    }
    if (end - begin <= leaf_size_) return node_id;
    // split the widest dimension at the median
    std::size_t split_dim = 0;
    double widest = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      const double w = hi[d] - lo[d];
      if (w > widest) {
        widest = w;
        split_dim = d;
      }
    }
    if (!(widest > 0.0)) return node_id;  // all points identical
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                     idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return pts_[a * dim_ + split_dim] < pts_[b * dim_ + split_dim];
                     });
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[static_cast<std::size_t>(node_id)].left = l;
    nodes_[static_cast<std::size_t>(node_id)].right = r;
    return node_id;
  }

  double box_distance(std::size_t node, const double* q) const {
    const double* lo = box_lo(node);
    const double* hi = box_hi(node);
    double d = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double below = lo[k] - q[k];
      const double above = q[k] - hi[k];
      d = std::max(d, std::max(below, above));
    }
    return std::max(d, 0.0);
  }

  double point_distance(std::size_t j, const double* q, double cutoff) const {
    const double* p = pts_ + j * dim_;
    double d = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      d = std::max(d, std::abs(p[k] - q[k]));
      if (d >= cutoff) return d;
    }
    return d;
  }

  // heap: max-heap of current best k distances; heap.front() is the working
  // k-th distance once full.
  void knn(std::size_t query, std::size_t k, std::vector<double>& heap) const {
    if (k >= n_) throw TooFewPoints("k must be below the point count");
    heap.clear();
    heap.reserve(k);
    knn_node(0, query, pts_ + query * dim_, k, heap);
  }

  void knn_node(std::size_t node_id, std::size_t query, const double* q,
                std::size_t k, std::vector<double>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t j = idx_[i];
        if (j == query) continue;
        const double cutoff = heap.size() == k
                                  ? heap.front()
                                  : std::numeric_limits<double>::infinity();
        const double d = point_distance(j, q, cutoff);
        if (heap.size() < k) {
          heap.push_back(d);
          std::push_heap(heap.begin(), heap.end());
        } else if (d < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = d;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const auto l = static_cast<std::size_t>(node.left);
    const auto r = static_cast<std::size_t>(node.right);
    double dl = box_distance(l, q);
    double dr = box_distance(r, q);
    std::size_t first = l, second = r;
    if (dr < dl) {
      std::swap(first, second);
      std::swap(dl, dr);
    }
    if (heap.size() < k || dl < heap.front()) knn_node(first, query, q, k, heap);
    if (heap.size() < k || dr < heap.front()) knn_node(second, query, q, k, heap);
  }

  void count_node(std::size_t node_id, const double* q, double r,
                  std::size_t& count) const {
    const Node& node = nodes_[node_id];
    if (box_distance(node_id, q) >= r) return;
    // farthest corner: the whole node lies strictly inside the ball
    const double* lo = box_lo(node_id);
    const double* hi = box_hi(node_id);
    double far = 0.0;
    for (std::size_t k = 0; k < dim_; ++k)
      far = std::max(far, std::max(std::abs(q[k] - lo[k]), std::abs(hi[k] - q[k])));
    if (far < r) {
      count += node.end - node.begin;
      return;
    }
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i)
        if (point_distance(idx_[i], q, r) < r) ++count;
      return;
    }
    count_node(static_cast<std::size_t>(node.left), q, r, count);
    count_node(static_cast<std::size_t>(node.right), q, r, count);
  }

  const double* pts_;
  std::size_t n_, dim_, leaf_size_;
  std::vector<std::uint32_t> idx_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;
};

}  // namespace tse
