#include "core/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace logosp {

KdTree3::KdTree3(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!points_.empty()) root_ = build(0, static_cast<int32_t>(points_.size()));
}

int32_t KdTree3::build(int32_t begin, int32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
        Vec3 lo = points_[order_[begin]];
        Vec3 hi = lo;
        for (int32_t i = begin + 1; i < end; ++i) {
            const Vec3& p = points_[order_[i]];
            for (int k = 0; k < 3; ++k) {
                lo[k] = std::min(lo[k], p[k]);
                hi[k] = std::max(hi[k], p[k]);
            }
        }
        int axis = 0;
        for (int k = 1; k < 3; ++k)
            if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
        if (hi[axis] - lo[axis] > 0.0) {
            const int32_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](int32_t a, int32_t b) {
                                 if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
                                 return a < b;
                             });
            node.axis = static_cast<uint8_t>(axis);
            node.split = points_[order_[mid]][axis];
            const int32_t self = static_cast<int32_t>(nodes_.size());
            nodes_.push_back(node);
            const int32_t left = build(begin, mid);
            const int32_t right = build(mid, end);
            nodes_[self].left = left;
            nodes_[self].right = right;
            return self;
        }
        // All points coincide on the widest axis: keep as one big leaf.
    }
    const int32_t self = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(node);
    return self;
}

void KdTree3::knn_search(int32_t ni, const Vec3& q, int k,
                         std::vector<std::pair<double, int32_t>>& heap) const {
    const Node& node = nodes_[ni];
    auto cmp = [](const std::pair<double, int32_t>& a, const std::pair<double, int32_t>& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;  // larger index counts as "farther"
    };
    if (node.left < 0) {
        for (int32_t i = node.begin; i < node.end; ++i) {
            const int32_t idx = order_[i];
            const double d2 = dist2(points_[idx], q);
            const std::pair<double, int32_t> cand{d2, idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), cmp);
            } else if (cmp(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), cmp);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int32_t near = delta < 0.0 ? node.left : node.right;
    const int32_t far = delta < 0.0 ? node.right : node.left;
    knn_search(near, q, k, heap);
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().first) knn_search(far, q, k, heap);
}

std::vector<int32_t> KdTree3::knn(const Vec3& query, int k) const {
    std::vector<std::pair<double, int32_t>> heap;
    heap.reserve(static_cast<size_t>(k) + 1);
    if (root_ >= 0 && k > 0) knn_search(root_, query, k, heap);
    std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<int32_t> out;
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(idx);
    return out;
}

void KdTree3::radius_search(int32_t ni, const Vec3& q, double r2, std::vector<int32_t>& out) const {
    const Node& node = nodes_[ni];
    if (node.left < 0) {
        for (int32_t i = node.begin; i < node.end; ++i) {
            const int32_t idx = order_[i];
            if (dist2(points_[idx], q) <= r2) out.push_back(idx);
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int32_t near = delta < 0.0 ? node.left : node.right;
    const int32_t far = delta < 0.0 ? node.right : node.left;
    radius_search(near, q, r2, out);
    if (delta * delta <= r2) radius_search(far, q, r2, out);
}

std::vector<int32_t> KdTree3::radius(const Vec3& query, double r) const {
    std::vector<int32_t> out;
    if (root_ >= 0 && r >= 0.0) radius_search(root_, query, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace logosp
