#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/io.hpp"
#include "core/types.hpp"

namespace logosp {

// One calibrated RGB-D view: pinhole intrinsics, camera-to-world extrinsics,
// a millimeter depth map, and a feature grid downsampled from the image by an
// integer stride.
struct CameraView {
    std::array<double, 9> intrinsics{};    // row-major 3x3
    std::array<double, 16> extrinsics{};   // row-major 4x4 camera-to-world
    DepthMap depth;
    FeatureSet features;  // rows = fwidth*fheight, row-major over cells
    uint32_t fwidth = 0;
    uint32_t fheight = 0;
    int stride = 1;

    double fx() const { return intrinsics[0]; }
    double fy() const { return intrinsics[4]; }
    double cx() const { return intrinsics[2]; }
    double cy() const { return intrinsics[5]; }

    void validate() const;  // orthonormal rotation, det +1, fx/fy > 0
};

// Camera JSON: { "intrinsics": [9], "extrinsics": [16], "depth": path,
// "features": path, "stride": int }; paths resolve against the JSON file.
CameraView read_camera_view(const std::string& path);
void write_camera_view(const CameraView& view, const std::string& path, const std::string& depth_path,
                       const std::string& feature_path);

struct ProjectionConfig {
    double depth_tolerance = 0.05;  // meters
    int min_views = 1;

    void validate() const;
};

// Per-point feature + hit flag for a single view. A point scores a hit iff it
// projects inside the image with positive camera-frame depth, the depth pixel
// is valid (non-zero), and |z - depth| <= depth_tolerance.
struct ViewProjection {
    std::vector<double> features;  // N*D, rows meaningful only where hit
    std::vector<uint8_t> hit;      // N
    size_t dim = 0;
};
ViewProjection project_view(const PointCloud& cloud, const CameraView& view, const ProjectionConfig& config);

// Arithmetic mean of all hit features per point, accumulated in ascending
// view index; rows with fewer than min_views hits are invalid-masked.
FeatureSet aggregate_views(const PointCloud& cloud, const std::vector<CameraView>& views,
                           const ProjectionConfig& config);

}  // namespace logosp
