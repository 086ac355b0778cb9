#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "core/error.hpp"
#include "core/growing.hpp"
#include "core/rng.hpp"

using namespace logosp;

namespace {

FeatureSet make_features(std::vector<std::vector<double>> rows, std::vector<uint8_t> valid = {}) {
    FeatureSet fs;
    fs.rows = rows.size();
    fs.dim = rows.front().size();
    for (const auto& r : rows) fs.values.insert(fs.values.end(), r.begin(), r.end());
    fs.valid = valid.empty() ? std::vector<uint8_t>(fs.rows, 1) : std::move(valid);
    return fs;
}

SuperpointPartition make_partition(std::vector<int32_t> point_to_sp, int32_t count, int32_t level = 0) {
    SuperpointPartition p;
    p.scene_id = "t";
    p.point_to_sp = std::move(point_to_sp);
    p.count = count;
    p.level = level;
    return p;
}

}  // namespace

TEST_CASE("growth_schedule: frozen sequences") {
    CHECK(growth_schedule(80, 40, 5) == std::vector<int>{80, 70, 60, 50, 40});
    CHECK(growth_schedule(80, 80, 1) == std::vector<int>{80});
    CHECK(growth_schedule(10, 3, 4) == std::vector<int>{10, 8, 6, 3});
    CHECK(growth_schedule(5, 5, 3) == std::vector<int>{5, 5, 5});
    CHECK_THROWS_AS(growth_schedule(3, 10, 2), Error);
    CHECK_THROWS_AS(growth_schedule(10, 3, 0), Error);
}

TEST_CASE("superpoint_mean_features: pairs and singletons") {
    const FeatureSet pf = make_features({{1, 1}, {3, 3}, {7, 2}});
    const auto part = make_partition({0, 0, 1}, 2);
    const FeatureSet means = superpoint_mean_features(pf, part);
    REQUIRE(means.rows == 2);
    CHECK(means.values[0] == 2.0);
    CHECK(means.values[1] == 2.0);
    CHECK(means.values[2] == 7.0);
    CHECK(means.values[3] == 2.0);
}

TEST_CASE("superpoint_mean_features: invalid rows are skipped; empty superpoints masked") {
    const FeatureSet pf = make_features({{1, 0}, {5, 0}, {9, 9}}, {1, 0, 0});
    const auto part = make_partition({0, 0, 1}, 2);
    const FeatureSet means = superpoint_mean_features(pf, part);
    CHECK(means.valid[0] == 1);
    CHECK(means.values[0] == 1.0);  // only the valid member contributes
    CHECK(means.valid[1] == 0);
}

TEST_CASE("superpoint_mean_features: matches brute-force grouped mean to 1e-12") {
    Rng rng(64);
    const size_t n = 200, dim = 6;
    const int32_t m = 10;
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    for (auto& r : rows)
        for (auto& v : r) v = rng.uniform(-2, 2);
    std::vector<int32_t> p2s(n);
    for (size_t i = 0; i < n; ++i) p2s[i] = static_cast<int32_t>(rng.bounded(m));
    for (int32_t s = 0; s < m; ++s) p2s[static_cast<size_t>(s)] = s;  // keep IDs dense
    const FeatureSet pf = make_features(rows);
    const auto part = make_partition(p2s, m);
    const FeatureSet means = superpoint_mean_features(pf, part);

    for (int32_t s = 0; s < m; ++s) {
        std::vector<double> acc(dim, 0.0);
        int cnt = 0;
        for (size_t i = 0; i < n; ++i) {
            if (p2s[i] != s) continue;
            for (size_t d = 0; d < dim; ++d) acc[d] += rows[i][d];
            ++cnt;
        }
        for (size_t d = 0; d < dim; ++d)
            CHECK(std::abs(means.values[static_cast<size_t>(s) * dim + d] - acc[d] / cnt) <= 1e-12);
    }
}

TEST_CASE("grow_superpoints: zero-objective optimum merges equal features") {
    const FeatureSet spf = make_features({{0, 0}, {0, 0}, {5, 5}, {5, 5}});
    const auto part = make_partition({0, 1, 2, 3}, 4);
    KMeansConfig cfg;
    const SuperpointPartition grown = grow_superpoints(spf, part, 2, cfg);
    CHECK(grown.count == 2);
    CHECK(grown.level == 1);
    CHECK(grown.point_to_sp[0] == grown.point_to_sp[1]);
    CHECK(grown.point_to_sp[2] == grown.point_to_sp[3]);
    CHECK(grown.point_to_sp[0] != grown.point_to_sp[2]);
}

TEST_CASE("grow_superpoints: clamp to identity when target >= M") {
    const FeatureSet spf = make_features({{0, 0}, {1, 1}, {2, 2}});
    const auto part = make_partition({0, 1, 2, 0}, 3, 2);
    KMeansConfig cfg;
    std::vector<int32_t> map;
    const SuperpointPartition grown = grow_superpoints(spf, part, 5, cfg, {}, &map);
    CHECK(grown.point_to_sp == part.point_to_sp);
    CHECK(grown.count == 3);
    CHECK(grown.level == 3);
    CHECK(map == std::vector<int32_t>{0, 1, 2});
}

TEST_CASE("grow_superpoints: recovers feature blobs") {
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    std::vector<int> blob;
    for (int s = 0; s < 12; ++s) {
        const int b = s % 3;
        blob.push_back(b);
        rows.push_back({10.0 * b + 0.01 * rng.normal(), -5.0 * b + 0.01 * rng.normal()});
    }
    const FeatureSet spf = make_features(rows);
    std::vector<int32_t> p2s(12);
    for (int i = 0; i < 12; ++i) p2s[static_cast<size_t>(i)] = i;
    const auto part = make_partition(p2s, 12);
    KMeansConfig cfg;
    cfg.restarts = 4;
    const SuperpointPartition grown = grow_superpoints(spf, part, 3, cfg);
    REQUIRE(grown.count == 3);
    std::map<int, int32_t> blob_to_new;
    for (int i = 0; i < 12; ++i) {
        const auto it = blob_to_new.find(blob[static_cast<size_t>(i)]);
        if (it == blob_to_new.end()) blob_to_new[blob[static_cast<size_t>(i)]] = grown.point_to_sp[static_cast<size_t>(i)];
        else CHECK(it->second == grown.point_to_sp[static_cast<size_t>(i)]);
    }
}

TEST_CASE("grow_superpoints: coarsening keeps old superpoints whole") {
    Rng rng(8);
    const size_t n = 300;
    const int32_t m = 40;
    std::vector<int32_t> p2s(n);
    for (size_t i = 0; i < n; ++i) p2s[i] = static_cast<int32_t>(rng.bounded(m));
    for (int32_t s = 0; s < m; ++s) p2s[static_cast<size_t>(s)] = s;
    std::vector<std::vector<double>> rows(static_cast<size_t>(m), std::vector<double>(4));
    for (auto& r : rows)
        for (auto& v : r) v = rng.uniform(-3, 3);
    const FeatureSet spf = make_features(rows);
    const auto part = make_partition(p2s, m);

    KMeansConfig cfg;
    std::vector<int32_t> new_of_old;
    const SuperpointPartition grown = grow_superpoints(spf, part, 12, cfg, {}, &new_of_old);
    CHECK(grown.count == 12);
    for (size_t i = 0; i < n; ++i)
        CHECK(grown.point_to_sp[i] == new_of_old[static_cast<size_t>(part.point_to_sp[i])]);
}

TEST_CASE("grow_superpoints: composition over multiple levels reproduces the final map") {
    Rng rng(13);
    const size_t n = 500;
    int32_t m = 60;
    std::vector<int32_t> p2s(n);
    for (size_t i = 0; i < n; ++i) p2s[i] = static_cast<int32_t>(rng.bounded(m));
    for (int32_t s = 0; s < m; ++s) p2s[static_cast<size_t>(s)] = s;
    SuperpointPartition part = make_partition(p2s, m);
    const SuperpointPartition level0 = part;

    std::vector<std::vector<int32_t>> history;
    for (int target : {40, 25, 10}) {
        std::vector<std::vector<double>> rows(static_cast<size_t>(part.count), std::vector<double>(3));
        Rng feat_rng(static_cast<uint64_t>(target));
        for (auto& r : rows)
            for (auto& v : r) v = feat_rng.uniform(-1, 1);
        std::vector<int32_t> map;
        part = grow_superpoints(make_features(rows), part, target, KMeansConfig{}, {}, &map);
        history.push_back(std::move(map));
    }
    CHECK(part.level == 3);
    for (size_t i = 0; i < n; ++i) {
        int32_t sp = level0.point_to_sp[i];
        for (const auto& step : history) sp = step[static_cast<size_t>(sp)];
        CHECK(sp == part.point_to_sp[i]);
    }
}

TEST_CASE("grow_superpoints: invalid-feature superpoints follow the nearest centroid") {
    // superpoint 2 has no valid features and sits geometrically next to sp 0
    const FeatureSet spf = make_features({{0, 0}, {10, 10}, {99, 99}}, {1, 1, 0});
    const auto part = make_partition({0, 1, 2}, 3);
    const std::vector<Vec3> centroids = {{0, 0, 0}, {5, 5, 5}, {0.1, 0, 0}};
    KMeansConfig cfg;
    const SuperpointPartition grown = grow_superpoints(spf, part, 2, cfg, centroids);
    CHECK(grown.count == 2);
    CHECK(grown.point_to_sp[2] == grown.point_to_sp[0]);
    CHECK(grown.point_to_sp[0] != grown.point_to_sp[1]);

    CHECK_THROWS_WITH_AS(grow_superpoints(spf, part, 2, cfg), doctest::Contains("centroids"), Error);
}

TEST_CASE("superpoint_centroids: mean positions per superpoint") {
    PointCloud c;
    c.scene_id = "t";
    c.positions = {{0, 0, 0}, {2, 0, 0}, {5, 5, 5}};
    c.colors.assign(3, Vec3{0, 0, 0});
    const auto part = make_partition({0, 0, 1}, 2);
    const auto cents = superpoint_centroids(c, part);
    CHECK(cents[0] == Vec3{1, 0, 0});
    CHECK(cents[1] == Vec3{5, 5, 5});
}
