#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/spectral.hpp"

using namespace logosp;

namespace {

FeatureSet make_features(std::vector<std::vector<double>> rows) {
    FeatureSet fs;
    fs.rows = rows.size();
    fs.dim = rows.front().size();
    for (const auto& r : rows) fs.values.insert(fs.values.end(), r.begin(), r.end());
    fs.valid.assign(fs.rows, 1);
    return fs;
}

FeatureSet random_features(size_t rows, size_t dim, uint64_t seed) {
    Rng rng(seed);
    FeatureSet fs;
    fs.rows = rows;
    fs.dim = dim;
    fs.values.resize(rows * dim);
    for (auto& v : fs.values) v = rng.uniform(-2, 2);
    fs.valid.assign(rows, 1);
    return fs;
}

double frobenius(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.a) acc += v * v;
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("build_global_graph: Gaussian edge weights from feature distance") {
    const FeatureSet fs = make_features({{0, 0}, {0, 0}, {1, 0}});
    const GlobalGraph g = build_global_graph(fs);
    CHECK(g.adjacency.at(0, 1) == 1.0);               // identical features
    CHECK(g.adjacency.at(0, 0) == 1.0);               // self loop
    CHECK(g.adjacency.at(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(g.adjacency.at(0, 2) == doctest::Approx(0.367879441).epsilon(1e-8));
}

TEST_CASE("build_global_graph: symmetric, entries in (0,1], matches brute force") {
    const FeatureSet fs = random_features(30, 8, 17);
    const GlobalGraph g = build_global_graph(fs, 1.0, 4);
    for (size_t i = 0; i < 30; ++i) {
        CHECK(g.adjacency.at(i, i) == 1.0);
        for (size_t j = 0; j < 30; ++j) {
            CHECK(g.adjacency.at(i, j) == g.adjacency.at(j, i));
            CHECK(g.adjacency.at(i, j) > 0.0);
            CHECK(g.adjacency.at(i, j) <= 1.0);
            double acc = 0.0;
            for (size_t d = 0; d < 8; ++d) {
                const double diff = fs.values[i * 8 + d] - fs.values[j * 8 + d];
                acc += diff * diff;
            }
            if (i != j)
                CHECK(g.adjacency.at(i, j) == doctest::Approx(std::exp(-std::sqrt(acc))).epsilon(1e-14));
        }
        double deg = 0.0;
        for (size_t j = 0; j < 30; ++j) deg += g.adjacency.at(i, j);
        CHECK(g.degrees[i] == doctest::Approx(deg).epsilon(1e-14));
    }
}

TEST_CASE("build_global_graph: invalid rows are named in the error") {
    FeatureSet fs = random_features(4, 2, 3);
    fs.valid[2] = 0;
    NodeNamer namer = [](size_t i) { return "scene 'x' superpoint " + std::to_string(i); };
    CHECK_THROWS_WITH_AS(build_global_graph(fs, 1.0, 1, namer), doctest::Contains("scene 'x' superpoint 2"),
                         Error);
}

TEST_CASE("normalized_laplacian: closed form for twin identical nodes") {
    const FeatureSet fs = make_features({{1, 2}, {1, 2}});
    const GlobalGraph g = build_global_graph(fs);
    const Matrix l = normalized_laplacian(g);
    CHECK(l.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(l.at(0, 1) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(l.at(1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(l.at(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("normalized_laplacian: single node gives [0]") {
    const FeatureSet fs = make_features({{3.0}});
    const Matrix l = normalized_laplacian(build_global_graph(fs));
    CHECK(l.rows == 1);
    CHECK(l.at(0, 0) == 0.0);
}

TEST_CASE("normalized_laplacian: D^{1/2} 1 is the zero mode") {
    const FeatureSet fs = random_features(20, 5, 23);
    const GlobalGraph g = build_global_graph(fs);
    const Matrix l = normalized_laplacian(g);
    double worst = 0.0;
    for (size_t i = 0; i < 20; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < 20; ++j) acc += l.at(i, j) * std::sqrt(g.degrees[j]);
        worst = std::max(worst, std::abs(acc));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("eigendecompose: spectral contracts on the Laplacian") {
    const FeatureSet fs = random_features(40, 6, 29);
    const GlobalGraph g = build_global_graph(fs);
    const Matrix l = normalized_laplacian(g);
    const EigenBasis basis = eigendecompose(l);

    CHECK(basis.eigenvalues.front() >= -1e-8);
    CHECK(basis.eigenvalues.front() <= 1e-8);  // zero mode
    CHECK(basis.eigenvalues.back() <= 2.0 + 1e-8);
    CHECK(max_abs_diff_from_identity(matmul_at_b(basis.u, basis.u)) <= 1e-8);

    // closed form for the 2-node case incl. canonical signs
    const Matrix l2 = normalized_laplacian(build_global_graph(make_features({{1, 1}, {1, 1}})));
    const EigenBasis b2 = eigendecompose(l2);
    CHECK(b2.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b2.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b2.u.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(b2.u.at(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("gft: constant features concentrate on the zero mode") {
    const FeatureSet fs = make_features({{3, 4}, {3, 4}});
    const GlobalGraph g = build_global_graph(fs);
    const EigenBasis basis = eigendecompose(normalized_laplacian(g));
    const Matrix freq = gft(basis.u, fs);
    CHECK(freq.at(0, 0) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(freq.at(0, 1) == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(freq.at(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(freq.at(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gft: identity basis is a passthrough; round trip reconstructs") {
    const FeatureSet fs = random_features(25, 7, 31);
    Matrix eye(25, 25);
    for (size_t i = 0; i < 25; ++i) eye.at(i, i) = 1.0;
    const Matrix passthrough = gft(eye, fs);
    for (size_t i = 0; i < fs.values.size(); ++i) CHECK(passthrough.a[i] == fs.values[i]);

    const EigenBasis basis = eigendecompose(normalized_laplacian(build_global_graph(fs)));
    const Matrix freq = gft(basis.u, fs);
    const Matrix back = matmul(basis.u, freq);
    double worst = 0.0;
    for (size_t i = 0; i < fs.values.size(); ++i) worst = std::max(worst, std::abs(back.a[i] - fs.values[i]));
    CHECK(worst <= 1e-6);

    // Parseval
    Matrix f(fs.rows, fs.dim);
    f.a = fs.values;
    CHECK(std::abs(frobenius(freq) - frobenius(f)) <= 1e-9 * frobenius(f));
}

TEST_CASE("group_patterns: s_prime == S keeps U up to column order") {
    const FeatureSet fs = random_features(10, 4, 37);
    const EigenBasis basis = eigendecompose(normalized_laplacian(build_global_graph(fs)));
    const Matrix freq = gft(basis.u, fs);
    std::vector<int32_t> assign;
    Matrix v;
    group_patterns(basis.u, freq, 10, KMeansConfig{}, assign, v);
    REQUIRE(v.cols == 10);
    // every cluster is a singleton and ordering is by member index, so V == U
    for (size_t i = 0; i < 10; ++i) {
        CHECK(assign[i] == static_cast<int32_t>(i));
        for (size_t r = 0; r < 10; ++r) CHECK(v.at(r, i) == basis.u.at(r, i));
    }
}

TEST_CASE("group_patterns: one cluster averages all of U") {
    const FeatureSet fs = make_features({{1, 0}, {1, 0}, {1, 0}});  // identical rows, identical freq rows
    const EigenBasis basis = eigendecompose(normalized_laplacian(build_global_graph(fs)));
    const Matrix freq = gft(basis.u, fs);
    std::vector<int32_t> assign;
    Matrix v;
    group_patterns(basis.u, freq, 1, KMeansConfig{}, assign, v);
    REQUIRE(v.cols == 1);
    for (size_t r = 0; r < 3; ++r) {
        const double want = (basis.u.at(r, 0) + basis.u.at(r, 1) + basis.u.at(r, 2)) / 3.0;
        CHECK(v.at(r, 0) == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("group_patterns: well-separated frequency blobs recover membership") {
    // Hand-built U (identity => freq rows = feature rows) with 3 blobs.
    const size_t s = 12;
    Matrix eye(s, s);
    for (size_t i = 0; i < s; ++i) eye.at(i, i) = 1.0;
    Rng rng(41);
    std::vector<std::vector<double>> rows;
    std::vector<int32_t> blob(s);
    for (size_t i = 0; i < s; ++i) {
        blob[i] = static_cast<int32_t>(i % 3);
        rows.push_back({100.0 * blob[i] + 0.01 * rng.normal(), -50.0 * blob[i] + 0.01 * rng.normal()});
    }
    const FeatureSet fs = make_features(rows);
    const Matrix freq = gft(eye, fs);
    std::vector<int32_t> assign;
    Matrix v;
    KMeansConfig cfg;
    cfg.restarts = 4;
    group_patterns(eye, freq, 3, cfg, assign, v);

    // assignments equal blob membership after the deterministic reordering
    // (smallest member index: blob 0 holds row 0, blob 1 row 1, blob 2 row 2)
    for (size_t i = 0; i < s; ++i) CHECK(assign[i] == blob[i]);
    // each V column is the mean of its assigned identity columns
    for (size_t c = 0; c < 3; ++c) {
        for (size_t r = 0; r < s; ++r) {
            const double want = (blob[r] == static_cast<int32_t>(c)) ? 0.25 : 0.0;  // 4 members each
            CHECK(std::abs(v.at(r, c) - want) <= 1e-12);
        }
    }
}

TEST_CASE("superpoint_pseudo_labels: C == S makes every superpoint its own class") {
    const FeatureSet fs = random_features(8, 3, 51);
    const EigenBasis basis = eigendecompose(normalized_laplacian(build_global_graph(fs)));
    const Matrix freq = gft(basis.u, fs);
    std::vector<int32_t> assign;
    Matrix v;
    group_patterns(basis.u, freq, 8, KMeansConfig{}, assign, v);
    const LabelAssignment labels = superpoint_pseudo_labels(v, 8, KMeansConfig{});
    std::vector<int32_t> sorted = labels.per_sp;
    std::sort(sorted.begin(), sorted.end());
    for (int32_t i = 0; i < 8; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);
}

TEST_CASE("superpoint_pseudo_labels: identical V rows share a class") {
    Matrix v(6, 2);
    for (size_t i = 0; i < 6; ++i) {
        v.at(i, 0) = i < 3 ? 1.0 : -1.0;
        v.at(i, 1) = i < 3 ? 0.0 : 2.0;
    }
    const LabelAssignment labels = superpoint_pseudo_labels(v, 2, KMeansConfig{});
    CHECK(labels.per_sp[0] == labels.per_sp[1]);
    CHECK(labels.per_sp[1] == labels.per_sp[2]);
    CHECK(labels.per_sp[3] == labels.per_sp[4]);
    CHECK(labels.per_sp[0] != labels.per_sp[3]);
}

TEST_CASE("expand_labels_to_points: inheritance, offsets, exclusions") {
    LabelAssignment labels;
    labels.classes = 4;
    labels.per_sp = {3, 0, 1};

    SuperpointPartition part;
    part.scene_id = "s";
    part.point_to_sp = {0, 0, 0, 0, 0};
    part.count = 1;
    CHECK(expand_labels_to_points(labels, part) == std::vector<int32_t>{3, 3, 3, 3, 3});

    // scene whose superpoints start at global row 1
    SuperpointPartition part2;
    part2.scene_id = "s2";
    part2.point_to_sp = {0, 1, 0};
    part2.count = 2;
    CHECK(expand_labels_to_points(labels, part2, 1) == std::vector<int32_t>{0, 1, 0});

    const std::vector<uint8_t> excluded = {0, 1, 0};
    CHECK(expand_labels_to_points(labels, part2, 1, &excluded) == std::vector<int32_t>{0, -1, 0});

    SuperpointPartition part3;
    part3.scene_id = "s3";
    part3.point_to_sp = {0, 1};
    part3.count = 2;
    CHECK_THROWS_WITH_AS(expand_labels_to_points(labels, part3, 2), doctest::Contains("unlabeled"), Error);
}

TEST_CASE("expand_labels_to_points: random scene equals lookup-table join") {
    Rng rng(73);
    LabelAssignment labels;
    labels.classes = 5;
    for (int i = 0; i < 30; ++i) labels.per_sp.push_back(static_cast<int32_t>(rng.bounded(5)));

    SuperpointPartition part;
    part.scene_id = "r";
    part.count = 30;
    for (int i = 0; i < 500; ++i) part.point_to_sp.push_back(static_cast<int32_t>(rng.bounded(30)));
    for (int32_t s = 0; s < 30; ++s) part.point_to_sp[static_cast<size_t>(s)] = s;

    const auto expanded = expand_labels_to_points(labels, part);
    for (size_t i = 0; i < part.size(); ++i)
        CHECK(expanded[i] == labels.per_sp[static_cast<size_t>(part.point_to_sp[i])]);
}
