#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace logosp {

// Static 3-d kd-tree over a point set. Neighbor queries break distance ties
// by ascending point index, so results are fully deterministic.
class KdTree3 {
public:
    explicit KdTree3(std::span<const Vec3> points);

    // Indices of the k nearest points (the query point itself included when
    // it is part of the set), ordered by (distance, index).
    std::vector<int32_t> knn(const Vec3& query, int k) const;

    // Indices with distance <= radius, ascending index order.
    std::vector<int32_t> radius(const Vec3& query, double r) const;

    size_t size() const { return points_.size(); }

private:
    struct Node {
        int32_t left = -1;
        int32_t right = -1;
        int32_t begin = 0;  // leaf range into order_
        int32_t end = 0;
        uint8_t axis = 0;
        double split = 0.0;
    };

    int32_t build(int32_t begin, int32_t end);
    void knn_search(int32_t node, const Vec3& q, int k,
                    std::vector<std::pair<double, int32_t>>& heap) const;
    void radius_search(int32_t node, const Vec3& q, double r2, std::vector<int32_t>& out) const;

    std::vector<Vec3> points_;
    std::vector<int32_t> order_;
    std::vector<Node> nodes_;
    int32_t root_ = -1;
    static constexpr int32_t kLeafSize = 16;
};

}  // namespace logosp
