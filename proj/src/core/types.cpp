#include "core/types.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "core/error.hpp"

namespace logosp {

void PointCloud::validate() const {
    if (positions.empty()) fail_parse("point cloud '" + scene_id + "': N >= 1 violated");
    if (colors.size() != positions.size())
        fail_parse("point cloud '" + scene_id + "': colors length " + std::to_string(colors.size()) +
                   " != N " + std::to_string(positions.size()));
    for (size_t i = 0; i < positions.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            if (!std::isfinite(positions[i][k]))
                fail_parse("point cloud '" + scene_id + "': non-finite coordinate at vertex " + std::to_string(i));
            if (colors[i][k] < 0.0 || colors[i][k] > 1.0)
                fail_parse("point cloud '" + scene_id + "': color out of [0,1] at vertex " + std::to_string(i));
        }
    }
    if (!gt_labels.empty() && gt_labels.size() != positions.size())
        fail_parse("point cloud '" + scene_id + "': gt_labels length " + std::to_string(gt_labels.size()) +
                   " != N " + std::to_string(positions.size()));
}

size_t FeatureSet::valid_count() const {
    size_t n = 0;
    for (uint8_t v : valid) n += (v != 0);
    return n;
}

void FeatureSet::validate() const {
    if (rows == 0 || dim == 0) fail_parse("feature set: empty (rows and dim must be >= 1)");
    if (values.size() != rows * dim) fail_parse("feature set: value buffer size mismatch");
    if (valid.size() != rows) fail_parse("feature set: mask length mismatch");
    size_t n_valid = 0;
    for (size_t r = 0; r < rows; ++r) {
        if (!valid[r]) continue;
        ++n_valid;
        for (size_t c = 0; c < dim; ++c)
            if (!std::isfinite(values[r * dim + c]))
                fail_parse("feature set: non-finite value at row " + std::to_string(r));
    }
    if (n_valid == 0) fail_parse("feature set: no valid rows");
}

void SuperpointPartition::validate() const {
    if (point_to_sp.empty()) fail_parse("partition '" + scene_id + "': empty");
    if (count <= 0) fail_parse("partition '" + scene_id + "': superpoint count must be >= 1");
    std::vector<int64_t> seen(static_cast<size_t>(count), 0);
    for (size_t i = 0; i < point_to_sp.size(); ++i) {
        const int32_t sp = point_to_sp[i];
        if (sp < 0 || sp >= count)
            fail_parse("partition '" + scene_id + "': point " + std::to_string(i) +
                       " has superpoint id " + std::to_string(sp) + " outside [0," + std::to_string(count) + ")");
        ++seen[static_cast<size_t>(sp)];
    }
    for (int32_t m = 0; m < count; ++m)
        if (seen[static_cast<size_t>(m)] == 0)
            fail_parse("partition '" + scene_id + "': superpoint id " + std::to_string(m) + " is empty (IDs not dense)");
}

void LabelAssignment::validate() const {
    if (classes <= 0) fail_pre("label assignment: class count must be >= 1");
    for (size_t s = 0; s < per_sp.size(); ++s)
        if (per_sp[s] < 0 || per_sp[s] >= classes)
            fail_pre("label assignment: superpoint " + std::to_string(s) + " label " +
                     std::to_string(per_sp[s]) + " outside [0," + std::to_string(classes) + ")");
}

void DatasetManifest::validate() const {
    if (scenes.empty()) fail_parse("manifest: no scenes");
    std::set<std::string> ids;
    for (const auto& s : scenes) {
        if (s.scene_id.empty()) fail_parse("manifest: scene with empty id");
        if (!ids.insert(s.scene_id).second) fail_parse("manifest: duplicate scene id '" + s.scene_id + "'");
        auto must_exist = [&](const std::string& p, const char* what) {
            if (!p.empty() && !std::filesystem::exists(p))
                fail_io("manifest: scene '" + s.scene_id + "' " + what + " file not found: " + p);
        };
        if (s.cloud_path.empty()) fail_parse("manifest: scene '" + s.scene_id + "' has no cloud path");
        must_exist(s.cloud_path, "cloud");
        must_exist(s.feature_path, "feature");
        must_exist(s.label_path, "label");
        for (const auto& v : s.view_paths) must_exist(v, "view");
    }
}

}  // namespace logosp
