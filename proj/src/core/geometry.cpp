#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

#include "core/eigen_sym.hpp"
#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/rng.hpp"

namespace logosp {

void InitConfig::validate() const {
    if (voxel_resolution <= 0.0) fail_pre("init config: voxel_resolution must be > 0");
    if (normal_knn < 3) fail_pre("init config: normal_knn must be >= 3");
    if (angle_threshold_deg <= 0.0) fail_pre("init config: angle_threshold must be > 0");
    if (ransac_distance <= 0.0) fail_pre("init config: ransac_distance must be > 0");
    if (cluster_distance <= 0.0) fail_pre("init config: cluster_distance must be > 0");
    if (ransac_iters < 1) fail_pre("init config: ransac_iters must be >= 1");
    if (min_region_size < 1) fail_pre("init config: min_region_size must be >= 1");
}

size_t NormalField::valid_count() const {
    size_t n = 0;
    for (uint8_t v : valid) n += (v != 0);
    return n;
}

// ---------------------------------------------------------------- voxel grid

std::pair<PointCloud, std::vector<int32_t>> voxel_downsample(const PointCloud& cloud, double size) {
    if (size <= 0.0) fail_pre("voxel_downsample: size must be > 0");
    const size_t n = cloud.size();

    std::map<std::tuple<int64_t, int64_t, int64_t>, int32_t> voxel_of;
    std::vector<int32_t> map(n);
    int32_t next_voxel = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto key = std::make_tuple(static_cast<int64_t>(std::floor(cloud.positions[i][0] / size)),
                                         static_cast<int64_t>(std::floor(cloud.positions[i][1] / size)),
                                         static_cast<int64_t>(std::floor(cloud.positions[i][2] / size)));
        auto [it, inserted] = voxel_of.try_emplace(key, next_voxel);
        if (inserted) ++next_voxel;
        map[i] = it->second;
    }

    PointCloud out;
    out.scene_id = cloud.scene_id;
    out.positions.assign(static_cast<size_t>(next_voxel), Vec3{0, 0, 0});
    out.colors.assign(static_cast<size_t>(next_voxel), Vec3{0, 0, 0});
    std::vector<int64_t> counts(static_cast<size_t>(next_voxel), 0);
    for (size_t i = 0; i < n; ++i) {
        const auto v = static_cast<size_t>(map[i]);
        out.positions[v] = add(out.positions[v], cloud.positions[i]);
        out.colors[v] = add(out.colors[v], cloud.colors[i]);
        ++counts[v];
    }
    for (size_t v = 0; v < out.positions.size(); ++v) {
        out.positions[v] = scale(out.positions[v], 1.0 / static_cast<double>(counts[v]));
        out.colors[v] = scale(out.colors[v], 1.0 / static_cast<double>(counts[v]));
    }
    return {std::move(out), std::move(map)};
}

// ---------------------------------------------------------------- normals

namespace {

// Canonical orientation: positive z, ties broken toward positive y, then x.
Vec3 canonicalize_normal(Vec3 n) {
    constexpr double tie = 1e-12;
    double sign = 0.0;
    if (std::abs(n[2]) > tie) sign = n[2];
    else if (std::abs(n[1]) > tie) sign = n[1];
    else sign = n[0];
    if (sign < 0.0) n = scale(n, -1.0);
    return n;
}

}  // namespace

NormalField estimate_normals(const PointCloud& cloud, int knn) {
    if (knn < 3) fail_pre("estimate_normals: knn must be >= 3");
    const size_t n = cloud.size();
    if (n <= static_cast<size_t>(knn)) fail_pre("estimate_normals: need N > knn");

    KdTree3 tree(cloud.positions);
    NormalField field;
    field.normals.assign(n, Vec3{0, 0, 0});
    field.valid.assign(n, 0);

    for (size_t i = 0; i < n; ++i) {
        const auto nbrs = tree.knn(cloud.positions[i], knn);
        Vec3 mean{0, 0, 0};
        for (int32_t j : nbrs) mean = add(mean, cloud.positions[j]);
        mean = scale(mean, 1.0 / static_cast<double>(nbrs.size()));

        double cov[6] = {0, 0, 0, 0, 0, 0};  // xx, xy, xz, yy, yz, zz
        for (int32_t j : nbrs) {
            const Vec3 d = sub(cloud.positions[j], mean);
            cov[0] += d[0] * d[0];
            cov[1] += d[0] * d[1];
            cov[2] += d[0] * d[2];
            cov[3] += d[1] * d[1];
            cov[4] += d[1] * d[2];
            cov[5] += d[2] * d[2];
        }

        Matrix C(3, 3);
        C.at(0, 0) = cov[0]; C.at(0, 1) = cov[1]; C.at(0, 2) = cov[2];
        C.at(1, 0) = cov[1]; C.at(1, 1) = cov[3]; C.at(1, 2) = cov[4];
        C.at(2, 0) = cov[2]; C.at(2, 1) = cov[4]; C.at(2, 2) = cov[5];
        const SymEigen eig = eigendecompose_symmetric(C);

        // Rank < 2 (collinear or coincident neighborhood) leaves the surface
        // normal undefined.
        const double trace = cov[0] + cov[3] + cov[5];
        if (eig.values[1] <= 1e-12 * std::max(trace, 1e-300)) continue;

        Vec3 normal{eig.vectors.at(0, 0), eig.vectors.at(1, 0), eig.vectors.at(2, 0)};
        const double len = norm(normal);
        if (!(len > 0.0) || !std::isfinite(len)) continue;
        field.normals[i] = canonicalize_normal(scale(normal, 1.0 / len));
        field.valid[i] = 1;
    }
    return field;
}

// ---------------------------------------------------------------- region grow

SuperpointPartition region_grow(const PointCloud& cloud, const NormalField& normals, const InitConfig& config) {
    config.validate();
    const size_t n = cloud.size();
    if (normals.normals.size() != n || normals.valid.size() != n)
        fail_pre("region_grow: normal field size mismatch");
    if (normals.valid_count() * 2 < n) fail_pre("region_grow: normals valid for < 50% of points");

    KdTree3 tree(cloud.positions);
    const int k = std::min<int>(config.normal_knn, static_cast<int>(n));

    // Undirected kNN graph, neighbor lists ascending.
    std::vector<std::vector<int32_t>> adjacency(n);
    for (size_t i = 0; i < n; ++i) {
        for (int32_t j : tree.knn(cloud.positions[i], k)) {
            if (j == static_cast<int32_t>(i)) continue;
            adjacency[i].push_back(j);
            adjacency[j].push_back(static_cast<int32_t>(i));
        }
    }
    for (auto& adj : adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }

    const double cos_threshold = std::cos(config.angle_threshold_deg * M_PI / 180.0);
    std::vector<int32_t> region(n, -1);
    int32_t next_region = 0;

    // Seeds in ascending point index; growth admits a neighbor when its
    // normal is within the angle threshold of the current point's normal.
    std::deque<int32_t> queue;
    for (size_t seed = 0; seed < n; ++seed) {
        if (region[seed] >= 0) continue;
        const int32_t rid = next_region++;
        region[seed] = rid;
        if (!normals.valid[seed]) continue;  // invalid-normal points stay singletons here
        queue.clear();
        queue.push_back(static_cast<int32_t>(seed));
        while (!queue.empty()) {
            const int32_t cur = queue.front();
            queue.pop_front();
            for (int32_t nb : adjacency[cur]) {
                if (region[nb] >= 0 || !normals.valid[nb]) continue;
                if (dot(normals.normals[cur], normals.normals[nb]) >= cos_threshold) {
                    region[nb] = rid;
                    queue.push_back(nb);
                }
            }
        }
    }

    // Merge undersized regions into the region of their nearest point that
    // belongs to a big-enough region. Regions processed in ascending id.
    std::vector<int64_t> sizes(static_cast<size_t>(next_region), 0);
    for (size_t i = 0; i < n; ++i) ++sizes[static_cast<size_t>(region[i])];
    const bool any_large = std::any_of(sizes.begin(), sizes.end(),
                                       [&](int64_t s) { return s >= config.min_region_size; });
    if (any_large) {
        std::vector<std::vector<int32_t>> members(static_cast<size_t>(next_region));
        for (size_t i = 0; i < n; ++i) members[static_cast<size_t>(region[i])].push_back(static_cast<int32_t>(i));
        for (int32_t r = 0; r < next_region; ++r) {
            if (sizes[static_cast<size_t>(r)] >= config.min_region_size) continue;
            // Nearest point of a big-enough region over all members, ties by
            // region id; the kNN horizon doubles until it covers the cloud.
            double best_d2 = std::numeric_limits<double>::infinity();
            int32_t best_target = -1;
            for (int32_t i : members[static_cast<size_t>(r)]) {
                int kk = std::min(8, static_cast<int>(n));
                for (;;) {
                    bool found = false;
                    for (int32_t j : tree.knn(cloud.positions[i], kk)) {
                        if (region[j] == r || sizes[static_cast<size_t>(region[j])] < config.min_region_size) continue;
                        const double d2 = dist2(cloud.positions[i], cloud.positions[j]);
                        if (d2 < best_d2 || (d2 == best_d2 && region[j] < best_target)) {
                            best_d2 = d2;
                            best_target = region[j];
                        }
                        found = true;
                        break;  // knn results are distance-ordered
                    }
                    if (found || kk >= static_cast<int>(n)) break;
                    kk = std::min(kk * 2, static_cast<int>(n));
                }
            }
            if (best_target >= 0) {
                for (int32_t i : members[static_cast<size_t>(r)]) region[i] = best_target;
                sizes[static_cast<size_t>(best_target)] += sizes[static_cast<size_t>(r)];
                sizes[static_cast<size_t>(r)] = 0;
            }
        }
    }

    // Dense relabel by first occurrence.
    std::vector<int32_t> relabel(static_cast<size_t>(next_region), -1);
    int32_t dense = 0;
    SuperpointPartition part;
    part.scene_id = cloud.scene_id;
    part.point_to_sp.resize(n);
    for (size_t i = 0; i < n; ++i) {
        int32_t& m = relabel[static_cast<size_t>(region[i])];
        if (m < 0) m = dense++;
        part.point_to_sp[i] = m;
    }
    part.count = dense;
    part.level = 0;
    part.validate();
    return part;
}

// ---------------------------------------------------------------- RANSAC

namespace {

// Total least squares plane through a set of points: centroid + smallest
// covariance eigenvector.
std::optional<std::pair<Vec3, double>> fit_plane_tls(const PointCloud& cloud, std::span<const int32_t> ids) {
    if (ids.size() < 3) return std::nullopt;
    Vec3 mean{0, 0, 0};
    for (int32_t i : ids) mean = add(mean, cloud.positions[i]);
    mean = scale(mean, 1.0 / static_cast<double>(ids.size()));
    Matrix C(3, 3);
    for (int32_t i : ids) {
        const Vec3 d = sub(cloud.positions[i], mean);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) C.at(a, b) += d[a] * d[b];
    }
    const SymEigen eig = eigendecompose_symmetric(C);
    Vec3 normal{eig.vectors.at(0, 0), eig.vectors.at(1, 0), eig.vectors.at(2, 0)};
    const double len = norm(normal);
    if (!(len > 0.0)) return std::nullopt;
    normal = canonicalize_normal(scale(normal, 1.0 / len));
    return std::make_pair(normal, -dot(normal, mean));
}

std::vector<int32_t> plane_inliers(const PointCloud& cloud, const Vec3& normal, double offset, double distance) {
    std::vector<int32_t> ids;
    for (size_t i = 0; i < cloud.size(); ++i)
        if (std::abs(dot(normal, cloud.positions[i]) + offset) <= distance) ids.push_back(static_cast<int32_t>(i));
    return ids;
}

}  // namespace

PlaneModel ransac_plane(const PointCloud& cloud, double distance, int iters, uint64_t rng_seed) {
    if (cloud.size() < 3) fail_pre("ransac_plane: need N >= 3");
    if (distance <= 0.0) fail_pre("ransac_plane: distance must be > 0");
    if (iters < 1) fail_pre("ransac_plane: iters must be >= 1");

    Rng rng(rng_seed);
    const size_t n = cloud.size();
    size_t best_count = 0;
    Vec3 best_normal{0, 0, 0};
    double best_offset = 0.0;
    bool have_hypothesis = false;

    for (int it = 0; it < iters; ++it) {
        const size_t a = rng.bounded(n);
        size_t b = rng.bounded(n - 1);
        if (b >= a) ++b;
        size_t c = rng.bounded(n - 2);
        if (c >= std::min(a, b)) ++c;
        if (c >= std::max(a, b)) ++c;

        const Vec3 u = sub(cloud.positions[b], cloud.positions[a]);
        const Vec3 v = sub(cloud.positions[c], cloud.positions[a]);
        Vec3 normal = cross(u, v);
        const double len = norm(normal);
        if (len <= 1e-12 * std::max(norm(u), 1e-300) * std::max(norm(v), 1e-300) || len == 0.0)
            continue;  // collinear triple
        normal = scale(normal, 1.0 / len);
        const double offset = -dot(normal, cloud.positions[a]);

        size_t count = 0;
        for (size_t i = 0; i < n; ++i)
            if (std::abs(dot(normal, cloud.positions[i]) + offset) <= distance) ++count;
        if (count > best_count) {
            best_count = count;
            best_normal = normal;
            best_offset = offset;
            have_hypothesis = true;
        }
    }
    if (!have_hypothesis) fail_numeric("ransac_plane: all sampled triples collinear after " +
                                       std::to_string(iters) + " iterations");

    PlaneModel model;
    model.normal = canonicalize_normal(best_normal);
    model.offset = model.normal == best_normal ? best_offset : -best_offset;
    const auto coarse = plane_inliers(cloud, model.normal, model.offset, distance);
    if (const auto refit = fit_plane_tls(cloud, coarse)) {
        model.normal = refit->first;
        model.offset = refit->second;
    }
    model.inlier_ids = plane_inliers(cloud, model.normal, model.offset, distance);
    return model;
}

// ---------------------------------------------------------------- clustering

SuperpointPartition euclidean_cluster(const PointCloud& cloud, std::span<const int32_t> remaining_ids,
                                      double distance) {
    if (distance <= 0.0) fail_pre("euclidean_cluster: distance must be > 0");
    const size_t n = cloud.size();
    std::vector<uint8_t> remaining(n, 0);
    for (int32_t i : remaining_ids) {
        if (i < 0 || static_cast<size_t>(i) >= n) fail_pre("euclidean_cluster: remaining id out of range");
        remaining[static_cast<size_t>(i)] = 1;
    }

    SuperpointPartition part;
    part.scene_id = cloud.scene_id;
    part.point_to_sp.assign(n, -1);
    part.level = 0;

    size_t plane_points = 0;
    for (size_t i = 0; i < n; ++i)
        if (!remaining[i]) ++plane_points;
    int32_t next_id = 0;
    if (plane_points > 0) {
        for (size_t i = 0; i < n; ++i)
            if (!remaining[i]) part.point_to_sp[i] = 0;
        next_id = 1;
    }

    // Connected components among remaining points, strict < distance.
    std::vector<Vec3> pts;
    std::vector<int32_t> pts_orig;
    pts.reserve(n - plane_points);
    for (size_t i = 0; i < n; ++i) {
        if (!remaining[i]) continue;
        pts.push_back(cloud.positions[i]);
        pts_orig.push_back(static_cast<int32_t>(i));
    }
    if (!pts.empty()) {
        KdTree3 tree(pts);
        const double d2_limit = distance * distance;
        std::vector<int32_t> component(pts.size(), -1);
        std::deque<int32_t> queue;
        for (size_t seed = 0; seed < pts.size(); ++seed) {
            if (component[seed] >= 0) continue;
            const int32_t cid = next_id++;
            component[seed] = cid;
            queue.clear();
            queue.push_back(static_cast<int32_t>(seed));
            while (!queue.empty()) {
                const int32_t cur = queue.front();
                queue.pop_front();
                for (int32_t nb : tree.radius(pts[cur], distance)) {
                    if (component[nb] >= 0) continue;
                    if (dist2(pts[cur], pts[nb]) >= d2_limit) continue;  // strict
                    component[nb] = cid;
                    queue.push_back(nb);
                }
            }
        }
        for (size_t q = 0; q < pts.size(); ++q) part.point_to_sp[pts_orig[q]] = component[q];
    }

    part.count = next_id;
    part.validate();
    return part;
}

// ---------------------------------------------------------------- dispatcher

SuperpointPartition init_superpoints(const PointCloud& cloud, const InitConfig& config, uint64_t rng_seed) {
    config.validate();
    if (config.mode == SceneMode::indoor) {
        auto [sampled, map] = voxel_downsample(cloud, config.voxel_resolution);
        if (sampled.size() <= static_cast<size_t>(config.normal_knn)) {
            // Too few voxels for normal estimation: everything becomes one
            // superpoint rather than failing the scene.
            SuperpointPartition part;
            part.scene_id = cloud.scene_id;
            part.point_to_sp.assign(cloud.size(), 0);
            part.count = 1;
            part.level = 0;
            return part;
        }
        const NormalField normals = estimate_normals(sampled, config.normal_knn);
        const SuperpointPartition coarse = region_grow(sampled, normals, config);
        SuperpointPartition part;
        part.scene_id = cloud.scene_id;
        part.point_to_sp.resize(cloud.size());
        for (size_t i = 0; i < cloud.size(); ++i)
            part.point_to_sp[i] = coarse.point_to_sp[static_cast<size_t>(map[i])];
        part.count = coarse.count;
        part.level = 0;
        part.validate();
        return part;
    }

    const PlaneModel ground = ransac_plane(cloud, config.ransac_distance, config.ransac_iters, rng_seed);
    std::vector<uint8_t> is_inlier(cloud.size(), 0);
    for (int32_t i : ground.inlier_ids) is_inlier[static_cast<size_t>(i)] = 1;
    std::vector<int32_t> remaining;
    remaining.reserve(cloud.size() - ground.inlier_ids.size());
    for (size_t i = 0; i < cloud.size(); ++i)
        if (!is_inlier[i]) remaining.push_back(static_cast<int32_t>(i));
    return euclidean_cluster(cloud, remaining, config.cluster_distance);
}

}  // namespace logosp
