#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/projection.hpp"
#include "core/rng.hpp"
#include "testutil.hpp"

using namespace logosp;

namespace {

// 64x48 identity-pose camera at the origin looking along +z.
CameraView make_view(uint32_t w = 64, uint32_t h = 48, int stride = 4, size_t dim = 2) {
    CameraView v;
    v.intrinsics = {50, 0, w / 2.0, 0, 50, h / 2.0, 0, 0, 1};
    v.extrinsics = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    v.stride = stride;
    v.depth.width = w;
    v.depth.height = h;
    v.depth.depth_mm.assign(static_cast<size_t>(w) * h, 0);
    v.fwidth = w / static_cast<uint32_t>(stride);
    v.fheight = h / static_cast<uint32_t>(stride);
    v.features.rows = static_cast<size_t>(v.fwidth) * v.fheight;
    v.features.dim = dim;
    v.features.values.assign(v.features.rows * dim, 0.0);
    v.features.valid.assign(v.features.rows, 1);
    return v;
}

void fill_depth(CameraView& v, uint16_t mm) { std::fill(v.depth.depth_mm.begin(), v.depth.depth_mm.end(), mm); }

void set_cell_feature(CameraView& v, uint32_t cu, uint32_t cv, const std::vector<double>& f) {
    const size_t cell = static_cast<size_t>(cv) * v.fwidth + cu;
    for (size_t d = 0; d < v.features.dim; ++d) v.features.values[cell * v.features.dim + d] = f[d];
}

PointCloud one_point(const Vec3& p) {
    PointCloud c;
    c.scene_id = "p";
    c.positions = {p};
    c.colors = {{0, 0, 0}};
    return c;
}

}  // namespace

TEST_CASE("project_view: principal-axis point with matching depth gets the cell feature") {
    CameraView v = make_view();
    fill_depth(v, 2000);
    set_cell_feature(v, 32 / 4, 24 / 4, {3.5, -1.25});
    const PointCloud c = one_point({0, 0, 2});
    const ViewProjection proj = project_view(c, v, ProjectionConfig{});
    REQUIRE(proj.hit[0] == 1);
    CHECK(proj.features[0] == 3.5);
    CHECK(proj.features[1] == -1.25);
}

TEST_CASE("project_view: occluder depth blocks the point") {
    CameraView v = make_view();
    fill_depth(v, 1000);  // surface at 1 m, point at 2 m
    const PointCloud c = one_point({0, 0, 2});
    CHECK(project_view(c, v, ProjectionConfig{}).hit[0] == 0);
}

TEST_CASE("project_view: behind-camera, zero-depth and off-image points miss") {
    CameraView v = make_view();
    fill_depth(v, 2000);
    CHECK(project_view(one_point({0, 0, -2}), v, ProjectionConfig{}).hit[0] == 0);
    CHECK(project_view(one_point({50, 0, 2}), v, ProjectionConfig{}).hit[0] == 0);
    fill_depth(v, 0);  // invalid depth pixel
    CHECK(project_view(one_point({0, 0, 2}), v, ProjectionConfig{}).hit[0] == 0);
}

TEST_CASE("project_view: tolerance boundary is inclusive") {
    CameraView v = make_view();
    fill_depth(v, 2050);  // 2.05 m vs point depth 2.0, tolerance 0.05
    ProjectionConfig cfg;
    cfg.depth_tolerance = 0.05;
    CHECK(project_view(one_point({0, 0, 2}), v, cfg).hit[0] == 1);
    fill_depth(v, 2051);
    CHECK(project_view(one_point({0, 0, 2}), v, cfg).hit[0] == 0);
}

TEST_CASE("aggregate_views: two views average, zero hits mask") {
    CameraView v1 = make_view();
    CameraView v2 = make_view();
    fill_depth(v1, 2000);
    fill_depth(v2, 2000);
    set_cell_feature(v1, 8, 6, {1, 0});
    set_cell_feature(v2, 8, 6, {0, 1});
    PointCloud c = one_point({0, 0, 2});
    c.positions.push_back({0, 0, -5});  // never visible
    c.colors.push_back({0, 0, 0});

    const FeatureSet fs = aggregate_views(c, {v1, v2}, ProjectionConfig{});
    REQUIRE(fs.rows == 2);
    CHECK(fs.valid[0] == 1);
    CHECK(fs.values[0] == 0.5);
    CHECK(fs.values[1] == 0.5);
    CHECK(fs.valid[1] == 0);
}

TEST_CASE("aggregate_views: a single hit passes the feature through exactly") {
    CameraView v1 = make_view();
    fill_depth(v1, 2000);
    set_cell_feature(v1, 8, 6, {0.123456789, 42.0});
    const PointCloud c = one_point({0, 0, 2});
    const FeatureSet fs = aggregate_views(c, {v1}, ProjectionConfig{});
    CHECK(fs.values[0] == 0.123456789);
    CHECK(fs.values[1] == 42.0);
}

TEST_CASE("aggregate_views: min_views gates validity") {
    CameraView v1 = make_view();
    fill_depth(v1, 2000);
    const PointCloud c = one_point({0, 0, 2});
    ProjectionConfig cfg;
    cfg.min_views = 2;
    CHECK(aggregate_views(c, {v1}, cfg).valid[0] == 0);
}

TEST_CASE("aggregate_views: box scene with 5 cameras equals brute-force recomputation") {
    // A box of points around the origin, five cameras on a ring looking at it.
    Rng rng(404);
    PointCloud cloud;
    cloud.scene_id = "box";
    for (int i = 0; i < 150; ++i) {
        cloud.positions.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
        cloud.colors.push_back({0, 0, 0});
    }

    std::vector<CameraView> views;
    for (int k = 0; k < 5; ++k) {
        CameraView v = make_view(64, 48, 4, 3);
        const double angle = 2.0 * M_PI * k / 5.0;
        // camera placed on a ring of radius 3, looking at the origin:
        // forward = -position/|position|, right/up completing the basis
        const Vec3 pos{3.0 * std::cos(angle), 3.0 * std::sin(angle), 0.5};
        Vec3 fwd = scale(pos, -1.0 / norm(pos));
        Vec3 up{0, 0, 1};
        Vec3 right = cross(fwd, up);
        right = scale(right, 1.0 / norm(right));
        up = cross(right, fwd);
        // columns of R are camera axes (x=right, y=-up, z=forward)
        v.extrinsics = {right[0], -up[0], fwd[0], pos[0],
                        right[1], -up[1], fwd[1], pos[1],
                        right[2], -up[2], fwd[2], pos[2],
                        0, 0, 0, 1};
        // depth: distance from camera plane to each point would need a real
        // renderer; instead give every pixel the true depth of some chosen
        // points and let the rest miss by tolerance.
        fill_depth(v, 3000);
        for (size_t cell = 0; cell < v.features.rows; ++cell)
            for (size_t d = 0; d < 3; ++d)
                v.features.values[cell * 3 + d] = rng.uniform(-1, 1);
        views.push_back(std::move(v));
    }

    ProjectionConfig cfg;
    cfg.depth_tolerance = 0.6;  // generous: ring radius 3, box half-diagonal ~0.87
    const FeatureSet got = aggregate_views(cloud, views, cfg);

    // independent re-computation, straight from the definitions
    for (size_t i = 0; i < cloud.size(); ++i) {
        std::vector<double> acc(3, 0.0);
        int hits = 0;
        for (const auto& v : views) {
            const double* e = v.extrinsics.data();
            const double tx = cloud.positions[i][0] - e[3];
            const double ty = cloud.positions[i][1] - e[7];
            const double tz = cloud.positions[i][2] - e[11];
            const double xc = e[0] * tx + e[4] * ty + e[8] * tz;
            const double yc = e[1] * tx + e[5] * ty + e[9] * tz;
            const double zc = e[2] * tx + e[6] * ty + e[10] * tz;
            if (zc <= 0) continue;
            const long u = std::lround(50.0 * xc / zc + 32.0);
            const long w = std::lround(50.0 * yc / zc + 24.0);
            if (u < 0 || w < 0 || u >= 64 || w >= 48) continue;
            const uint16_t dmm = v.depth.at(static_cast<uint32_t>(u), static_cast<uint32_t>(w));
            if (dmm == 0 || std::abs(zc - dmm / 1000.0) > cfg.depth_tolerance) continue;
            const size_t cell = static_cast<size_t>(w / 4) * v.fwidth + static_cast<size_t>(u / 4);
            for (size_t d = 0; d < 3; ++d) acc[d] += v.features.values[cell * 3 + d];
            ++hits;
        }
        if (hits == 0) {
            CHECK(got.valid[i] == 0);
        } else {
            REQUIRE(got.valid[i] == 1);
            for (size_t d = 0; d < 3; ++d) CHECK(got.values[i * 3 + d] == acc[d] / hits);
        }
    }
}

TEST_CASE("camera view JSON round trip and validation") {
    testutil::TempDir tmp("cam");
    CameraView v = make_view();
    fill_depth(v, 1500);
    set_cell_feature(v, 3, 3, {1.5, 2.5});
    write_camera_view(v, tmp.file("cam.json"), tmp.file("cam.lgspdpth"), tmp.file("cam.lgspfeat"));
    const CameraView back = read_camera_view(tmp.file("cam.json"));
    CHECK(back.intrinsics == v.intrinsics);
    CHECK(back.extrinsics == v.extrinsics);
    CHECK(back.stride == v.stride);
    CHECK(back.depth.depth_mm == v.depth.depth_mm);
    CHECK(back.features.values == v.features.values);

    CameraView bad = make_view();
    bad.extrinsics[0] = 2.0;  // not orthonormal
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("orthonormal"), Error);
    CameraView flip = make_view();
    flip.extrinsics[0] = -1.0;  // det -1
    CHECK_THROWS_WITH_AS(flip.validate(), doctest::Contains("determinant"), Error);
}

TEST_CASE("aggregate_views: views disagreeing on feature dim are rejected") {
    CameraView a = make_view(64, 48, 4, 2);
    CameraView b = make_view(64, 48, 4, 3);
    fill_depth(a, 2000);
    fill_depth(b, 2000);
    CHECK_THROWS_WITH_AS(aggregate_views(one_point({0, 0, 2}), {a, b}, ProjectionConfig{}),
                         doctest::Contains("disagree"), Error);
}

TEST_CASE("camera JSON with wrong value types is a parse error") {
    testutil::TempDir tmp("cam_bad");
    CameraView v = make_view();
    fill_depth(v, 1000);
    write_camera_view(v, tmp.file("cam.json"), tmp.file("cam.lgspdpth"), tmp.file("cam.lgspfeat"));
    std::ifstream in(tmp.file("cam.json"));
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    in.close();
    const auto pos = text.find("\"stride\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"stride\": 4").size(), "\"stride\": \"four\"");
    std::ofstream(tmp.file("bad.json")) << text;
    CHECK_THROWS_WITH_AS(read_camera_view(tmp.file("bad.json")), doctest::Contains("bad camera value"), Error);
}
