#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <limits>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/rng.hpp"
#include "testutil.hpp"

using namespace logosp;
using testutil::TempDir;

namespace {

PointCloud random_cloud(size_t n, uint64_t seed) {
    Rng rng(seed);
    PointCloud cloud;
    cloud.scene_id = "random";
    for (size_t i = 0; i < n; ++i) {
        // float-representable coordinates so binary PLY round-trips bitwise
        cloud.positions.push_back({static_cast<float>(rng.uniform(-5, 5)), static_cast<float>(rng.uniform(-5, 5)),
                                   static_cast<float>(rng.uniform(-5, 5))});
        cloud.colors.push_back({static_cast<double>(rng.bounded(256)) / 255.0,
                                static_cast<double>(rng.bounded(256)) / 255.0,
                                static_cast<double>(rng.bounded(256)) / 255.0});
        cloud.gt_labels.push_back(static_cast<int32_t>(rng.bounded(20)) - 1);
    }
    return cloud;
}

}  // namespace

TEST_CASE("ply: 1-point ascii cloud normalizes colors") {
    TempDir tmp("ply_ascii");
    const std::string path = tmp.file("one.ply");
    {
        std::ofstream out(path);
        out << "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "end_header\n0 0 0 255 0 0\n";
    }
    const PointCloud cloud = read_point_cloud(path);
    REQUIRE(cloud.size() == 1);
    CHECK(cloud.positions[0] == Vec3{0, 0, 0});
    CHECK(cloud.colors[0] == Vec3{1, 0, 0});
    CHECK_FALSE(cloud.has_gt());
}

TEST_CASE("ply: empty vertex element is rejected") {
    TempDir tmp("ply_empty");
    const std::string path = tmp.file("empty.ply");
    {
        std::ofstream out(path);
        out << "ply\nformat ascii 1.0\nelement vertex 0\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "end_header\n";
    }
    CHECK_THROWS_WITH_AS(read_point_cloud(path), doctest::Contains("N >= 1 violated"), Error);
}

TEST_CASE("ply: malformed inputs name the offending element") {
    TempDir tmp("ply_bad");
    SUBCASE("missing property") {
        const std::string path = tmp.file("noz.ply");
        std::ofstream(path) << "ply\nformat ascii 1.0\nelement vertex 1\n"
                               "property float x\nproperty float y\n"
                               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                               "end_header\n0 0 1 2 3\n";
        CHECK_THROWS_WITH_AS(read_point_cloud(path), doctest::Contains("missing property 'z'"), Error);
    }
    SUBCASE("ascii nan token is malformed") {
        const std::string path = tmp.file("nan.ply");
        std::ofstream(path) << "ply\nformat ascii 1.0\nelement vertex 1\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                               "end_header\nnan 0 0 1 2 3\n";
        CHECK_THROWS_WITH_AS(read_point_cloud(path), doctest::Contains("property 'x'"), Error);
    }
    SUBCASE("binary nan coordinate is non-finite") {
        const std::string path = tmp.file("nan_bin.ply");
        {
            std::ofstream out(path, std::ios::binary);
            out << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
                   "property float x\nproperty float y\nproperty float z\n"
                   "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                   "end_header\n";
            const float nanval = std::numeric_limits<float>::quiet_NaN();
            const float zero = 0.0f;
            const uint8_t color[3] = {1, 2, 3};
            out.write(reinterpret_cast<const char*>(&nanval), 4);
            out.write(reinterpret_cast<const char*>(&zero), 4);
            out.write(reinterpret_cast<const char*>(&zero), 4);
            out.write(reinterpret_cast<const char*>(color), 3);
        }
        CHECK_THROWS_WITH_AS(read_point_cloud(path), doctest::Contains("non-finite"), Error);
    }
    SUBCASE("bad magic") {
        const std::string path = tmp.file("bad.ply");
        std::ofstream(path) << "plz\n";
        CHECK_THROWS_AS(read_point_cloud(path), Error);
    }
}

TEST_CASE("ply: binary write/read round-trip is bitwise identity") {
    TempDir tmp("ply_rt");
    const PointCloud cloud = random_cloud(100, 7);
    const std::string a = tmp.file("a.ply");
    const std::string b = tmp.file("b.ply");
    write_point_cloud(cloud, a, /*binary=*/true);
    const PointCloud back = read_point_cloud(a);
    REQUIRE(back.size() == cloud.size());
    CHECK(back.positions == cloud.positions);
    CHECK(back.gt_labels == cloud.gt_labels);
    write_point_cloud(back, b, /*binary=*/true);
    CHECK(testutil::same_bytes(a, b));
}

TEST_CASE("ply: ascii round trip preserves f32 coordinates, labels, colors") {
    TempDir tmp("ply_ascii_rt");
    PointCloud cloud = random_cloud(10, 11);
    const std::string path = tmp.file("c.ply");
    write_point_cloud(cloud, path, /*binary=*/false);
    const PointCloud back = read_point_cloud(path);
    CHECK(back.positions == cloud.positions);
    CHECK(back.gt_labels == cloud.gt_labels);
    CHECK(back.colors == cloud.colors);
}

TEST_CASE("lgspfeat: header and payload round trip") {
    TempDir tmp("feat");
    Rng rng(3);
    FeatureSet fs;
    fs.rows = 50;
    fs.dim = 384;
    for (size_t i = 0; i < fs.rows * fs.dim; ++i)
        fs.values.push_back(static_cast<float>(rng.normal()));  // f32-representable
    fs.valid.assign(fs.rows, 1);
    fs.valid[7] = 0;

    const std::string a = tmp.file("a.lgspfeat");
    const std::string b = tmp.file("b.lgspfeat");
    write_feature_set(fs, a);
    const FeatureSet back = read_feature_set(a);
    REQUIRE(back.rows == fs.rows);
    REQUIRE(back.dim == fs.dim);
    CHECK(back.values == fs.values);
    CHECK(back.valid == fs.valid);
    write_feature_set(back, b);
    CHECK(testutil::same_bytes(a, b));
}

TEST_CASE("lgspfeat: small literal case") {
    TempDir tmp("feat_small");
    FeatureSet fs;
    fs.rows = 2;
    fs.dim = 3;
    fs.values = {1, 2, 3, 4, 5, 6};
    fs.valid = {1, 1};
    const std::string path = tmp.file("s.lgspfeat");
    write_feature_set(fs, path);
    const FeatureSet back = read_feature_set(path);
    CHECK(back.rows == 2);
    CHECK(back.dim == 3);
    CHECK(back.values == fs.values);
}

TEST_CASE("lgspfeat: truncation, magic, and trailing-byte errors") {
    TempDir tmp("feat_bad");
    FeatureSet fs;
    fs.rows = 4;
    fs.dim = 2;
    fs.values = {1, 2, 3, 4, 5, 6, 7, 8};
    fs.valid.assign(4, 1);
    const std::string path = tmp.file("t.lgspfeat");
    write_feature_set(fs, path);

    auto bytes = testutil::read_bytes(path);
    SUBCASE("short payload") {
        std::ofstream(tmp.file("short.lgspfeat"), std::ios::binary)
            .write(bytes.data(), static_cast<long>(bytes.size() - 5));
        CHECK_THROWS_WITH_AS(read_feature_set(tmp.file("short.lgspfeat")), doctest::Contains("shorter"), Error);
    }
    SUBCASE("bad magic") {
        bytes[0] = 'X';
        std::ofstream(tmp.file("magic.lgspfeat"), std::ios::binary)
            .write(bytes.data(), static_cast<long>(bytes.size()));
        CHECK_THROWS_WITH_AS(read_feature_set(tmp.file("magic.lgspfeat")), doctest::Contains("magic"), Error);
    }
    SUBCASE("trailing bytes") {
        bytes.push_back(0);
        std::ofstream(tmp.file("trail.lgspfeat"), std::ios::binary)
            .write(bytes.data(), static_cast<long>(bytes.size()));
        CHECK_THROWS_WITH_AS(read_feature_set(tmp.file("trail.lgspfeat")), doctest::Contains("trailing"), Error);
    }
}

TEST_CASE("lgsplbl: sentinel preserved and validation enforced") {
    TempDir tmp("lbl");
    const std::string path = tmp.file("l.lgsplbl");
    const std::vector<int32_t> labels = {0, -1, 3};
    write_labels(labels, path);
    CHECK(read_labels(path) == labels);

    CHECK_THROWS_WITH_AS(write_labels(labels, path, /*classes=*/3), doctest::Contains("outside"), Error);
    write_labels(labels, path, /*classes=*/4);  // 3 < 4 is fine
}

TEST_CASE("lgsplbl: 1e5 random labels round-trip bytewise") {
    TempDir tmp("lbl_big");
    Rng rng(5);
    std::vector<int32_t> labels(100000);
    for (auto& v : labels) v = static_cast<int32_t>(rng.bounded(50)) - 1;
    const std::string a = tmp.file("a.lgsplbl");
    const std::string b = tmp.file("b.lgsplbl");
    write_labels(labels, a);
    const auto back = read_labels(a);
    CHECK(back == labels);
    write_labels(back, b);
    CHECK(testutil::same_bytes(a, b));
}

TEST_CASE("depth map round trip and indexing") {
    TempDir tmp("depth");
    DepthMap d;
    d.width = 5;
    d.height = 3;
    d.depth_mm.assign(15, 0);
    d.depth_mm[7] = 2000;
    const std::string path = tmp.file("d.lgspdpth");
    write_depth_map(d, path);
    const DepthMap back = read_depth_map(path);
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.depth_mm == d.depth_mm);
    CHECK(back.at(2, 1) == 2000);
}

TEST_CASE("manifest: parses, resolves paths, rejects duplicates and dead links") {
    TempDir tmp("manifest");
    write_point_cloud(random_cloud(4, 1), tmp.file("a.ply"));
    std::ofstream(tmp.file("m.json")) << R"({"scenes":[{"id":"a","cloud":"a.ply"}]})";
    const DatasetManifest m = read_manifest(tmp.file("m.json"));
    REQUIRE(m.scenes.size() == 1);
    CHECK(m.scenes[0].scene_id == "a");
    CHECK(std::filesystem::path(m.scenes[0].cloud_path).is_absolute());

    std::ofstream(tmp.file("dup.json"))
        << R"({"scenes":[{"id":"a","cloud":"a.ply"},{"id":"a","cloud":"a.ply"}]})";
    CHECK_THROWS_WITH_AS(read_manifest(tmp.file("dup.json")), doctest::Contains("duplicate"), Error);

    std::ofstream(tmp.file("missing.json")) << R"({"scenes":[{"id":"b","cloud":"nope.ply"}]})";
    CHECK_THROWS_WITH_AS(read_manifest(tmp.file("missing.json")), doctest::Contains("not found"), Error);
}

TEST_CASE("manifest: write/read round trip") {
    TempDir tmp("manifest_rt");
    write_point_cloud(random_cloud(4, 2), tmp.file("x.ply"));
    DatasetManifest m;
    SceneEntry e;
    e.scene_id = "x";
    e.cloud_path = tmp.file("x.ply");
    m.scenes.push_back(e);
    write_manifest(m, tmp.file("m.json"));
    const DatasetManifest back = read_manifest(tmp.file("m.json"));
    CHECK(back.scenes[0].scene_id == "x");
    CHECK(back.scenes[0].cloud_path == e.cloud_path);
}

TEST_CASE("lgspfeat: masked rows may hold junk, all-invalid is rejected") {
    TempDir tmp("feat_mask");
    FeatureSet fs;
    fs.rows = 3;
    fs.dim = 2;
    fs.values = {1, 2, std::numeric_limits<double>::quiet_NaN(), 4, 5, 6};
    fs.valid = {1, 0, 1};  // NaN sits on the masked row
    const std::string path = tmp.file("m.lgspfeat");
    write_feature_set(fs, path);
    const FeatureSet back = read_feature_set(path);
    CHECK(back.valid == fs.valid);
    CHECK(back.values[0] == 1.0);

    FeatureSet dead = fs;
    dead.valid = {0, 0, 0};
    CHECK_THROWS_WITH_AS(write_feature_set(dead, tmp.file("dead.lgspfeat")), doctest::Contains("no valid rows"),
                         Error);
}

TEST_CASE("ply: extra vertex properties and surrounding elements are tolerated") {
    TempDir tmp("ply_extra");
    SUBCASE("ascii with unknown scalar property and trailing element") {
        const std::string path = tmp.file("extra.ply");
        std::ofstream(path) << "ply\nformat ascii 1.0\n"
                               "comment produced elsewhere\n"
                               "element vertex 2\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "property float confidence\n"
                               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                               "element face 1\n"
                               "property list uchar int vertex_indices\n"
                               "end_header\n"
                               "0 0 0 0.9 255 0 0\n"
                               "1 1 1 0.1 0 255 0\n"
                               "3 0 1 0\n";
        const PointCloud cloud = read_point_cloud(path);
        REQUIRE(cloud.size() == 2);
        CHECK(cloud.positions[1] == Vec3{1, 1, 1});
        CHECK(cloud.colors[1][1] == 1.0);
    }
    SUBCASE("binary with fixed-size element before vertex") {
        const std::string path = tmp.file("pre.ply");
        {
            std::ofstream out(path, std::ios::binary);
            out << "ply\nformat binary_little_endian 1.0\n"
                   "element meta 1\nproperty int revision\n"
                   "element vertex 1\n"
                   "property float x\nproperty float y\nproperty float z\n"
                   "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                   "end_header\n";
            const int32_t rev = 7;
            out.write(reinterpret_cast<const char*>(&rev), 4);
            const float xyz[3] = {1.5f, -2.0f, 0.25f};
            const uint8_t rgb[3] = {10, 20, 30};
            out.write(reinterpret_cast<const char*>(xyz), 12);
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
        const PointCloud cloud = read_point_cloud(path);
        REQUIRE(cloud.size() == 1);
        CHECK(cloud.positions[0] == Vec3{1.5, -2.0, 0.25});
    }
    SUBCASE("list property before vertex is rejected") {
        const std::string path = tmp.file("listpre.ply");
        std::ofstream(path) << "ply\nformat ascii 1.0\n"
                               "element face 1\nproperty list uchar int vertex_indices\n"
                               "element vertex 1\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                               "end_header\n3 0 1 0\n0 0 0 1 2 3\n";
        CHECK_THROWS_WITH_AS(read_point_cloud(path), doctest::Contains("precedes vertex"), Error);
    }
}
