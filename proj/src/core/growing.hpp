#pragma once

#include <cstdint>
#include <vector>

#include "core/kmeans.hpp"
#include "core/types.hpp"

namespace logosp {

struct GrowthSchedule {
    int m1 = 80;
    int mT = 40;
    int rounds = 5;

    void validate() const;
};

// Non-increasing integer sequence from m1 to mT with equal steps; any
// remainder is absorbed by the final step. rounds == 1 yields just [mT].
std::vector<int> growth_schedule(int m1, int mT, int rounds);

// Row m = arithmetic mean of the valid point rows of superpoint m, summed in
// ascending point index. Superpoints without any valid point come back
// invalid-masked.
FeatureSet superpoint_mean_features(const FeatureSet& point_features, const SuperpointPartition& partition);

// Per-superpoint geometric centroids (mean positions, ascending point index).
std::vector<Vec3> superpoint_centroids(const PointCloud& cloud, const SuperpointPartition& partition);

// One growth step: K-means over this scene's superpoint features into
// min(target_m, M) clusters; each cluster becomes a new superpoint and the
// level increments. Superpoints with invalid features join the cluster whose
// geometric centroid is nearest (sp_centroids may be empty when all rows are
// valid). new_of_old receives the old-id -> new-id map when non-null.
SuperpointPartition grow_superpoints(const FeatureSet& sp_features, const SuperpointPartition& partition,
                                     int target_m, const KMeansConfig& kmeans_cfg,
                                     const std::vector<Vec3>& sp_centroids = {},
                                     std::vector<int32_t>* new_of_old = nullptr);

}  // namespace logosp
