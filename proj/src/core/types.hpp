#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace logosp {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

// One scene: xyz positions in meters, rgb colors in [0,1], optional per-point
// ground-truth labels with -1 meaning undefined/ignore. Immutable by
// convention once constructed; validate() enforces the type invariants.
struct PointCloud {
    std::string scene_id;
    std::vector<Vec3> positions;
    std::vector<Vec3> colors;
    std::vector<int32_t> gt_labels;  // empty, or one per point

    size_t size() const { return positions.size(); }
    bool has_gt() const { return !gt_labels.empty(); }
    void validate() const;  // throws Error on invariant violation
};

// Dense per-row feature matrix (per point or per superpoint) with a validity
// mask. Values are held as doubles in memory; the on-disk format is f32.
struct FeatureSet {
    size_t rows = 0;
    size_t dim = 0;
    std::vector<double> values;  // rows*dim, row-major
    std::vector<uint8_t> valid;  // rows, 1 = valid

    std::span<const double> row(size_t r) const { return {values.data() + r * dim, dim}; }
    std::span<double> row(size_t r) { return {values.data() + r * dim, dim}; }
    bool row_valid(size_t r) const { return valid[r] != 0; }
    size_t valid_count() const;
    void validate() const;  // finite values on valid rows, >= 1 valid row
};

// Per-point superpoint membership for one scene. IDs are dense in [0, count);
// level is the growth generation (0 = initial superpoints).
struct SuperpointPartition {
    std::string scene_id;
    std::vector<int32_t> point_to_sp;
    int32_t count = 0;
    int32_t level = 0;

    size_t size() const { return point_to_sp.size(); }
    void validate() const;  // dense IDs, full coverage
};

// Superpoint class labels in [0, classes). Per-point labels derived from it
// use -1 only for points excluded at ingestion.
struct LabelAssignment {
    std::vector<int32_t> per_sp;
    int32_t classes = 0;

    void validate() const;
};

struct SceneEntry {
    std::string scene_id;
    std::string cloud_path;
    std::string feature_path;              // optional, "" when absent
    std::vector<std::string> view_paths;   // camera JSON files, optional
    std::string label_path;                // optional ground-truth labels
};

struct DatasetManifest {
    std::vector<SceneEntry> scenes;

    void validate() const;  // unique scene ids, referenced files exist
};

}  // namespace logosp
