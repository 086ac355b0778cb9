#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace logosp {

// All binary formats are little-endian. Readers reject invariant violations
// instead of repairing them, and preserve row/point order exactly.

// PLY with float x,y,z + uchar red,green,blue and an optional int label
// property. ASCII and binary_little_endian, version 1.0.
PointCloud read_point_cloud(const std::string& path);
void write_point_cloud(const PointCloud& cloud, const std::string& path, bool binary = true);

// LGSPFEAT: "LGSPFEAT" | u32 version=1 | u64 rows | u32 dim | u8 has_mask |
// rows*dim f32 row-major | rows mask bytes when has_mask.
FeatureSet read_feature_set(const std::string& path);
void write_feature_set(const FeatureSet& fs, const std::string& path);

// LGSPLBL: "LGSPLBL\0" | u32 version=1 | u64 rows | rows i32.
// classes >= 0 on write enables range validation against [0,classes) + {-1}.
std::vector<int32_t> read_labels(const std::string& path);
void write_labels(std::span<const int32_t> labels, const std::string& path, int32_t classes = -1);

// LGSPDPTH: "LGSPDPTH" | u32 width | u32 height | w*h u16 millimeters,
// row-major (v*width + u), 0 = invalid.
struct DepthMap {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint16_t> depth_mm;

    uint16_t at(uint32_t u, uint32_t v) const { return depth_mm[static_cast<size_t>(v) * width + u]; }
};
DepthMap read_depth_map(const std::string& path);
void write_depth_map(const DepthMap& d, const std::string& path);

// Manifest JSON: { "scenes": [ { "id", "cloud", "features"?, "views"?: [..],
// "labels"? } ] }. Relative paths resolve against the manifest directory.
DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& m, const std::string& path);

}  // namespace logosp
