#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pinspect/geometry.hpp"

namespace pinspect {

// Static 3D kd-tree over a point set. Neighbor results are ordered by
// (distance, index) so exact ties resolve to the lowest point index.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points) : pts_(points) {
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, order_.size(), 0);
  }

  // k nearest neighbors of q; exclude lets a query point skip itself.
  std::vector<std::pair<double, int>> knn(const Vec3& q, size_t k, int exclude = -1) const {
    Heap heap;
    heap.reserve(k + 1);
    if (!order_.empty()) knn_walk(0, order_.size(), 0, q, k, exclude, heap);
    std::sort(heap.begin(), heap.end());
    return heap;
  }

  std::vector<int> radius(const Vec3& q, double r) const {
    std::vector<int> out;
    if (!order_.empty()) radius_walk(0, order_.size(), 0, q, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  double nearest_neighbor_distance(int i) const {
    auto nn = knn(pts_[i], 1, i);
    return nn.empty() ? 0.0 : std::sqrt(nn[0].first);
  }

 private:
  using Heap = std::vector<std::pair<double, int>>;  // (squared distance, index)

  void build(size_t lo, size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       if (pts_[a][axis] != pts_[b][axis]) return pts_[a][axis] < pts_[b][axis];
                       return a < b;
                     });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void knn_walk(size_t lo, size_t hi, int axis, const Vec3& q, size_t k, int exclude,
                Heap& heap) const {
    if (lo >= hi) return;
    const size_t mid = (lo + hi) / 2;
    const int idx = order_[mid];
    if (idx != exclude) {
      const double d2 = (pts_[idx] - q).squaredNorm();
      const std::pair<double, int> cand{d2, idx};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    const double delta = q[axis] - pts_[idx][axis];
    const size_t near_lo = delta <= 0 ? lo : mid + 1;
    const size_t near_hi = delta <= 0 ? mid : hi;
    const size_t far_lo = delta <= 0 ? mid + 1 : lo;
    const size_t far_hi = delta <= 0 ? hi : mid;
    knn_walk(near_lo, near_hi, (axis + 1) % 3, q, k, exclude, heap);
    if (heap.size() < k || delta * delta <= heap.front().first)
      knn_walk(far_lo, far_hi, (axis + 1) % 3, q, k, exclude, heap);
  }

  void radius_walk(size_t lo, size_t hi, int axis, const Vec3& q, double r2,
                   std::vector<int>& out) const {
    if (lo >= hi) return;
    const size_t mid = (lo + hi) / 2;
    const int idx = order_[mid];
    if ((pts_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
    const double delta = q[axis] - pts_[idx][axis];
    const size_t near_lo = delta <= 0 ? lo : mid + 1;
    const size_t near_hi = delta <= 0 ? mid : hi;
    const size_t far_lo = delta <= 0 ? mid + 1 : lo;
    const size_t far_hi = delta <= 0 ? hi : mid;
    radius_walk(near_lo, near_hi, (axis + 1) % 3, q, r2, out);
    if (delta * delta <= r2) radius_walk(far_lo, far_hi, (axis + 1) % 3, q, r2, out);
  }

  const std::vector<Vec3>& pts_;
  std::vector<int> order_;
};

}  // namespace pinspect
