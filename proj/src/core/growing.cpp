#include "core/growing.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace logosp {

void GrowthSchedule::validate() const {
    if (rounds < 1) fail_pre("growth schedule: rounds must be >= 1");
    if (mT < 1) fail_pre("growth schedule: mT must be >= 1");
    if (m1 < mT) fail_pre("growth schedule: need m1 >= mT");
}

std::vector<int> growth_schedule(int m1, int mT, int rounds) {
    GrowthSchedule cfg{m1, mT, rounds};
    cfg.validate();
    std::vector<int> seq(static_cast<size_t>(rounds));
    if (rounds == 1) {
        seq[0] = mT;
        return seq;
    }
    const int step = (m1 - mT) / (rounds - 1);
    for (int r = 0; r < rounds - 1; ++r) seq[static_cast<size_t>(r)] = m1 - step * r;
    seq[static_cast<size_t>(rounds - 1)] = mT;
    return seq;
}

FeatureSet superpoint_mean_features(const FeatureSet& point_features, const SuperpointPartition& partition) {
    if (point_features.rows != partition.size())
        fail_pre("superpoint_mean_features: feature rows (" + std::to_string(point_features.rows) +
                 ") != partition size (" + std::to_string(partition.size()) + ")");

    const size_t m = static_cast<size_t>(partition.count);
    const size_t dim = point_features.dim;
    FeatureSet out;
    out.rows = m;
    out.dim = dim;
    out.values.assign(m * dim, 0.0);
    out.valid.assign(m, 0);

    std::vector<int64_t> counts(m, 0);
    for (size_t i = 0; i < partition.size(); ++i) {
        if (!point_features.row_valid(i)) continue;
        const size_t sp = static_cast<size_t>(partition.point_to_sp[i]);
        const double* src = point_features.values.data() + i * dim;
        double* dst = out.values.data() + sp * dim;
        for (size_t d = 0; d < dim; ++d) dst[d] += src[d];
        ++counts[sp];
    }
    for (size_t sp = 0; sp < m; ++sp) {
        if (counts[sp] == 0) continue;
        double* dst = out.values.data() + sp * dim;
        for (size_t d = 0; d < dim; ++d) dst[d] /= static_cast<double>(counts[sp]);
        out.valid[sp] = 1;
    }
    return out;
}

std::vector<Vec3> superpoint_centroids(const PointCloud& cloud, const SuperpointPartition& partition) {
    if (cloud.size() != partition.size()) fail_pre("superpoint_centroids: cloud/partition size mismatch");
    std::vector<Vec3> centroids(static_cast<size_t>(partition.count), Vec3{0, 0, 0});
    std::vector<int64_t> counts(static_cast<size_t>(partition.count), 0);
    for (size_t i = 0; i < cloud.size(); ++i) {
        const size_t sp = static_cast<size_t>(partition.point_to_sp[i]);
        centroids[sp] = add(centroids[sp], cloud.positions[i]);
        ++counts[sp];
    }
    for (size_t sp = 0; sp < centroids.size(); ++sp)
        centroids[sp] = scale(centroids[sp], 1.0 / static_cast<double>(counts[sp]));
    return centroids;
}

SuperpointPartition grow_superpoints(const FeatureSet& sp_features, const SuperpointPartition& partition,
                                     int target_m, const KMeansConfig& kmeans_cfg,
                                     const std::vector<Vec3>& sp_centroids,
                                     std::vector<int32_t>* new_of_old) {
    if (target_m < 1) fail_pre("grow_superpoints: target_m must be >= 1");
    const size_t m_old = static_cast<size_t>(partition.count);
    if (sp_features.rows != m_old) fail_pre("grow_superpoints: feature rows != superpoint count");

    SuperpointPartition out;
    out.scene_id = partition.scene_id;
    out.level = partition.level + 1;

    if (static_cast<size_t>(target_m) >= m_old) {
        // Clamp: this scene already has no more superpoints than requested.
        out.point_to_sp = partition.point_to_sp;
        out.count = partition.count;
        if (new_of_old) {
            new_of_old->resize(m_old);
            std::iota(new_of_old->begin(), new_of_old->end(), 0);
        }
        out.validate();
        return out;
    }

    // K-means over the valid feature rows only.
    std::vector<size_t> valid_rows;
    valid_rows.reserve(m_old);
    for (size_t s = 0; s < m_old; ++s)
        if (sp_features.row_valid(s)) valid_rows.push_back(s);
    if (valid_rows.size() < static_cast<size_t>(target_m))
        fail_pre("grow_superpoints: only " + std::to_string(valid_rows.size()) +
                 " superpoints have valid features, need >= target_m = " + std::to_string(target_m));

    const size_t dim = sp_features.dim;
    std::vector<double> data(valid_rows.size() * dim);
    for (size_t r = 0; r < valid_rows.size(); ++r)
        std::copy_n(sp_features.values.data() + valid_rows[r] * dim, dim, data.begin() + r * dim);

    KMeansConfig cfg = kmeans_cfg;
    cfg.k = target_m;
    const KMeansResult km = kmeans_fit(data, valid_rows.size(), dim, cfg);

    std::vector<int32_t> cluster_of(m_old, -1);
    for (size_t r = 0; r < valid_rows.size(); ++r) cluster_of[valid_rows[r]] = km.assignments[r];

    if (valid_rows.size() < m_old) {
        if (sp_centroids.size() != m_old)
            fail_pre("grow_superpoints: invalid-feature superpoints present but no geometric centroids given");
        // Cluster geometric centroid = unweighted mean of member superpoint
        // centroids; invalid superpoints join the nearest one.
        std::vector<Vec3> cluster_centroid(static_cast<size_t>(target_m), Vec3{0, 0, 0});
        std::vector<int64_t> counts(static_cast<size_t>(target_m), 0);
        for (size_t r = 0; r < valid_rows.size(); ++r) {
            const auto c = static_cast<size_t>(km.assignments[r]);
            cluster_centroid[c] = add(cluster_centroid[c], sp_centroids[valid_rows[r]]);
            ++counts[c];
        }
        for (size_t c = 0; c < cluster_centroid.size(); ++c)
            cluster_centroid[c] = scale(cluster_centroid[c], 1.0 / static_cast<double>(counts[c]));
        for (size_t s = 0; s < m_old; ++s) {
            if (cluster_of[s] >= 0) continue;
            int32_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < cluster_centroid.size(); ++c) {
                const double d2 = dist2(sp_centroids[s], cluster_centroid[c]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = static_cast<int32_t>(c);
                }
            }
            cluster_of[s] = best;
        }
    }

    out.point_to_sp.resize(partition.size());
    for (size_t i = 0; i < partition.size(); ++i)
        out.point_to_sp[i] = cluster_of[static_cast<size_t>(partition.point_to_sp[i])];
    out.count = target_m;
    if (new_of_old) *new_of_old = cluster_of;
    out.validate();
    return out;
}

}  // namespace logosp
