#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/types.hpp"

namespace logosp {

enum class SceneMode { indoor, outdoor };

struct InitConfig {
    SceneMode mode = SceneMode::indoor;
    double voxel_resolution = 0.5;   // indoor seed spacing, meters
    int normal_knn = 30;
    double angle_threshold_deg = 10.0;
    double ransac_distance = 0.2;    // meters
    double cluster_distance = 0.2;   // meters
    int ransac_iters = 256;
    int min_region_size = 20;        // points (at the resolution region_grow runs on)

    void validate() const;
};

struct PlaneModel {
    Vec3 normal{0, 0, 1};   // unit
    double offset = 0.0;    // n.x + offset = 0
    std::vector<int32_t> inlier_ids;

    double signed_distance(const Vec3& p) const { return dot(normal, p) + offset; }
};

// Per-point normals; a zero vector marks a degenerate (rank < 2) neighborhood.
struct NormalField {
    std::vector<Vec3> normals;
    std::vector<uint8_t> valid;

    size_t valid_count() const;
};

// One centroid per occupied voxel; map[i] gives point i's representative row
// in the downsampled cloud. Voxel order follows first occurrence.
std::pair<PointCloud, std::vector<int32_t>> voxel_downsample(const PointCloud& cloud, double size);

// Smallest-eigenvalue eigenvector of the k-neighborhood covariance, sign
// canonicalized to positive z (ties: positive y, then x).
NormalField estimate_normals(const PointCloud& cloud, int knn);

// Greedy normal-similarity region growing over the kNN graph. Seeds are taken
// in ascending point index; undersized regions merge into the region of their
// nearest outside point. Always yields a level-0 partition.
SuperpointPartition region_grow(const PointCloud& cloud, const NormalField& normals, const InitConfig& config);

// Best-of-iters 3-point RANSAC refit by total least squares on the winning
// inlier set; the reported inlier set is recomputed from the refit plane.
PlaneModel ransac_plane(const PointCloud& cloud, double distance, int iters, uint64_t rng_seed);

// Connected components (distance strictly below the threshold) over the
// points listed in remaining_ids; all other points form one dedicated
// superpoint (id 0) when present. Level-0 partition over the whole scene.
SuperpointPartition euclidean_cluster(const PointCloud& cloud, std::span<const int32_t> remaining_ids,
                                      double distance);

// indoor: voxel_downsample + estimate_normals + region_grow, expanded back to
// full resolution. outdoor: ransac_plane ground + euclidean_cluster remainder.
SuperpointPartition init_superpoints(const PointCloud& cloud, const InitConfig& config, uint64_t rng_seed);

}  // namespace logosp
