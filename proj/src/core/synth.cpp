#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/rng.hpp"

namespace logosp {

void SynthConfig::validate() const {
    if (scenes < 1) fail_pre("synth config: scenes must be >= 1");
    if (classes < 1) fail_pre("synth config: classes must be >= 1");
    if (objects_per_scene < 1) fail_pre("synth config: objects_per_scene must be >= 1");
    if (feature_dim < 1) fail_pre("synth config: feature_dim must be >= 1");
    if (separation <= 0.0) fail_pre("synth config: separation must be > 0");
    if (noise_sigma < 0.0) fail_pre("synth config: noise_sigma must be >= 0");
    if (patch_size <= 0.0 || grid_step <= 0.0 || grid_step > patch_size)
        fail_pre("synth config: need 0 < grid_step <= patch_size");
}

namespace {

std::vector<std::vector<double>> make_class_means(const SynthConfig& cfg, Rng& rng) {
    std::vector<std::vector<double>> means(static_cast<size_t>(cfg.classes),
                                           std::vector<double>(static_cast<size_t>(cfg.feature_dim)));
    for (auto& m : means)
        for (auto& v : m) v = rng.normal();
    if (cfg.classes == 1) return means;

    double min_dist = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < means.size(); ++a)
        for (size_t b = a + 1; b < means.size(); ++b) {
            double acc = 0.0;
            for (size_t d = 0; d < means[a].size(); ++d) {
                const double diff = means[a][d] - means[b][d];
                acc += diff * diff;
            }
            min_dist = std::min(min_dist, std::sqrt(acc));
        }
    if (!(min_dist > 0.0)) fail_numeric("synth: degenerate class means, pick another seed");
    const double s = cfg.separation / min_dist;
    for (auto& m : means)
        for (auto& v : m) v *= s;
    return means;
}

}  // namespace

DatasetManifest synth_scenes(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "clouds");
    fs::create_directories(fs::path(out_dir) / "features");
    fs::create_directories(fs::path(out_dir) / "gt");

    Rng rng(cfg.rng_seed);
    const auto means = make_class_means(cfg, rng);

    const int side = static_cast<int>(cfg.patch_size / cfg.grid_step) + 1;
    const double half = cfg.patch_size / 2.0;
    const double pitch = 2.5 * cfg.patch_size;
    const int lattice = std::max(1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(cfg.objects_per_scene)))));

    DatasetManifest manifest;
    int64_t global_object = 0;
    for (int h = 0; h < cfg.scenes; ++h) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d", h);

        PointCloud cloud;
        cloud.scene_id = name;
        FeatureSet features;
        features.dim = static_cast<size_t>(cfg.feature_dim);

        for (int o = 0; o < cfg.objects_per_scene; ++o) {
            // The first C objects of the dataset sweep every class so the
            // generative labels always cover [0, C).
            const int cls = global_object < cfg.classes ? static_cast<int>(global_object)
                                                        : static_cast<int>(rng.bounded(static_cast<uint64_t>(cfg.classes)));
            ++global_object;

            const int axis = o % 3;  // patch normal: z, x, y in rotation
            const Vec3 center{(o % lattice) * pitch, ((o / lattice) % lattice) * pitch,
                              (o / (lattice * lattice)) * pitch};
            const Vec3 color{0.2 + 0.6 * (cls % 3) / 2.0, 0.2 + 0.6 * ((cls / 3) % 3) / 2.0, 0.8};

            for (int u = 0; u < side; ++u) {
                for (int v = 0; v < side; ++v) {
                    const double du = u * cfg.grid_step - half;
                    const double dv = v * cfg.grid_step - half;
                    Vec3 p = center;
                    if (axis == 0) {
                        p[0] += du;
                        p[1] += dv;
                    } else if (axis == 1) {
                        p[1] += du;
                        p[2] += dv;
                    } else {
                        p[0] += du;
                        p[2] += dv;
                    }
                    cloud.positions.push_back(p);
                    cloud.colors.push_back(color);
                    cloud.gt_labels.push_back(cls);
                    for (int d = 0; d < cfg.feature_dim; ++d)
                        features.values.push_back(means[static_cast<size_t>(cls)][static_cast<size_t>(d)] +
                                                  cfg.noise_sigma * rng.normal());
                }
            }
        }
        features.rows = cloud.size();
        features.valid.assign(features.rows, 1);

        const std::string cloud_path = (fs::path(out_dir) / "clouds" / (std::string(name) + ".ply")).string();
        const std::string feat_path = (fs::path(out_dir) / "features" / (std::string(name) + ".lgspfeat")).string();
        const std::string gt_path = (fs::path(out_dir) / "gt" / (std::string(name) + ".lgsplbl")).string();
        write_point_cloud(cloud, cloud_path, /*binary=*/true);
        write_feature_set(features, feat_path);
        write_labels(cloud.gt_labels, gt_path, cfg.classes);

        SceneEntry entry;
        entry.scene_id = name;
        entry.cloud_path = cloud_path;
        entry.feature_path = feat_path;
        entry.label_path = gt_path;
        manifest.scenes.push_back(std::move(entry));
    }
    write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

}  // namespace logosp
