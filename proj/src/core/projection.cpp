#include "core/projection.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "core/error.hpp"

namespace logosp {

namespace {

using nlohmann::json;

// Rotation block of a row-major 4x4, applied transposed (world -> camera).
Vec3 world_to_camera(const std::array<double, 16>& ext, const Vec3& p) {
    const double tx = p[0] - ext[3];
    const double ty = p[1] - ext[7];
    const double tz = p[2] - ext[11];
    return {ext[0] * tx + ext[4] * ty + ext[8] * tz,
            ext[1] * tx + ext[5] * ty + ext[9] * tz,
            ext[2] * tx + ext[6] * ty + ext[10] * tz};
}

}  // namespace

void CameraView::validate() const {
    if (!(fx() > 0.0) || !(fy() > 0.0)) fail_pre("camera view: fx and fy must be > 0");
    if (stride < 1) fail_pre("camera view: stride must be >= 1");
    // R^T R == I within 1e-6 and det(R) == +1.
    double rtr[3][3] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) rtr[i][j] += extrinsics[static_cast<size_t>(k * 4 + i)] * extrinsics[static_cast<size_t>(k * 4 + j)];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(rtr[i][j] - want) > 1e-6)
                fail_pre("camera view: extrinsics rotation block is not orthonormal");
        }
    const double det =
        extrinsics[0] * (extrinsics[5] * extrinsics[10] - extrinsics[6] * extrinsics[9]) -
        extrinsics[1] * (extrinsics[4] * extrinsics[10] - extrinsics[6] * extrinsics[8]) +
        extrinsics[2] * (extrinsics[4] * extrinsics[9] - extrinsics[5] * extrinsics[8]);
    if (std::abs(det - 1.0) > 1e-6) fail_pre("camera view: extrinsics rotation determinant must be +1");

    const uint32_t fw = depth.width / static_cast<uint32_t>(stride);
    const uint32_t fh = depth.height / static_cast<uint32_t>(stride);
    if (fw == 0 || fh == 0) fail_pre("camera view: stride larger than the image");
    if (fwidth != fw || fheight != fh || features.rows != static_cast<size_t>(fw) * fh)
        fail_pre("camera view: feature grid must be (width/stride) x (height/stride)");
    // Hits must depend on geometry and depth only, so partial feature grids
    // are rejected up front.
    if (features.valid_count() != features.rows) fail_pre("camera view: feature grid has masked cells");
}

CameraView read_camera_view(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open for reading: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail_parse(path + ": invalid JSON: " + e.what());
    }
    for (const char* key : {"intrinsics", "extrinsics", "depth", "features", "stride"})
        if (!j.contains(key)) fail_parse(path + ": missing camera key '" + std::string(key) + "'");
    if (!j["intrinsics"].is_array() || j["intrinsics"].size() != 9)
        fail_parse(path + ": intrinsics must be 9 numbers");
    if (!j["extrinsics"].is_array() || j["extrinsics"].size() != 16)
        fail_parse(path + ": extrinsics must be 16 numbers");

    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    CameraView v;
    try {
        for (size_t i = 0; i < 9; ++i) v.intrinsics[i] = j["intrinsics"][i].get<double>();
        for (size_t i = 0; i < 16; ++i) v.extrinsics[i] = j["extrinsics"][i].get<double>();
        v.stride = j["stride"].get<int>();
        v.depth = read_depth_map(resolve(j["depth"].get<std::string>()));
        v.features = read_feature_set(resolve(j["features"].get<std::string>()));
    } catch (const json::exception& e) {
        fail_parse(path + ": bad camera value: " + e.what());
    }
    v.fwidth = v.depth.width / static_cast<uint32_t>(std::max(v.stride, 1));
    v.fheight = v.depth.height / static_cast<uint32_t>(std::max(v.stride, 1));
    v.validate();
    return v;
}

void write_camera_view(const CameraView& view, const std::string& path, const std::string& depth_path,
                       const std::string& feature_path) {
    write_depth_map(view.depth, depth_path);
    write_feature_set(view.features, feature_path);
    const auto base = std::filesystem::path(path).parent_path();
    auto relativize = [&](const std::string& p) {
        std::error_code ec;
        auto rel = std::filesystem::relative(p, base, ec);
        return ec ? p : rel.string();
    };
    json j;
    j["intrinsics"] = view.intrinsics;
    j["extrinsics"] = view.extrinsics;
    j["depth"] = relativize(depth_path);
    j["features"] = relativize(feature_path);
    j["stride"] = view.stride;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) fail_io("write failed: " + path);
}

void ProjectionConfig::validate() const {
    if (depth_tolerance <= 0.0) fail_pre("projection config: depth_tolerance must be > 0");
    if (min_views < 1) fail_pre("projection config: min_views must be >= 1");
}

ViewProjection project_view(const PointCloud& cloud, const CameraView& view, const ProjectionConfig& config) {
    view.validate();
    config.validate();
    const size_t n = cloud.size();
    const size_t dim = view.features.dim;

    ViewProjection out;
    out.dim = dim;
    out.features.assign(n * dim, 0.0);
    out.hit.assign(n, 0);

    for (size_t i = 0; i < n; ++i) {
        const Vec3 pc = world_to_camera(view.extrinsics, cloud.positions[i]);
        if (!(pc[2] > 0.0)) continue;  // behind (or on) the camera plane
        const double u = view.fx() * pc[0] / pc[2] + view.cx();
        const double v = view.fy() * pc[1] / pc[2] + view.cy();
        const long ui = std::lround(u);
        const long vi = std::lround(v);
        if (ui < 0 || vi < 0 || ui >= static_cast<long>(view.depth.width) ||
            vi >= static_cast<long>(view.depth.height))
            continue;
        const uint16_t d_mm = view.depth.at(static_cast<uint32_t>(ui), static_cast<uint32_t>(vi));
        if (d_mm == 0) continue;  // invalid depth pixel
        const double d_m = static_cast<double>(d_mm) / 1000.0;
        if (std::abs(pc[2] - d_m) > config.depth_tolerance) continue;  // occluded or floating

        const uint32_t cu = std::min(static_cast<uint32_t>(ui / view.stride), view.fwidth - 1);
        const uint32_t cv = std::min(static_cast<uint32_t>(vi / view.stride), view.fheight - 1);
        const size_t cell = static_cast<size_t>(cv) * view.fwidth + cu;
        std::copy_n(view.features.values.data() + cell * dim, dim, out.features.begin() + i * dim);
        out.hit[i] = 1;
    }
    return out;
}

FeatureSet aggregate_views(const PointCloud& cloud, const std::vector<CameraView>& views,
                           const ProjectionConfig& config) {
    config.validate();
    if (views.empty()) fail_pre("aggregate_views: need at least one view");
    const size_t dim = views.front().features.dim;
    for (const auto& v : views)
        if (v.features.dim != dim) fail_pre("aggregate_views: views disagree on feature dim");

    const size_t n = cloud.size();
    FeatureSet out;
    out.rows = n;
    out.dim = dim;
    out.values.assign(n * dim, 0.0);
    out.valid.assign(n, 0);
    std::vector<int32_t> hits(n, 0);

    for (const auto& view : views) {  // fixed ascending view order
        const ViewProjection proj = project_view(cloud, view, config);
        for (size_t i = 0; i < n; ++i) {
            if (!proj.hit[i]) continue;
            double* dst = out.values.data() + i * dim;
            const double* src = proj.features.data() + i * dim;
            for (size_t d = 0; d < dim; ++d) dst[d] += src[d];
            ++hits[i];
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (hits[i] >= config.min_views && hits[i] > 0) {
            double* dst = out.values.data() + i * dim;
            for (size_t d = 0; d < dim; ++d) dst[d] /= static_cast<double>(hits[i]);
            out.valid[i] = 1;
        } else {
            // keep masked rows at zero
            std::fill_n(out.values.data() + i * dim, dim, 0.0);
        }
    }
    return out;
}

}  // namespace logosp
