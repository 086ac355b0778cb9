#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/spectral.hpp"

namespace logosp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto with_stage(const char* tag, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("[") + tag + "] " + e.what());
    }
}

std::string scene_file(const std::string& dir, const std::string& scene_id, const char* ext) {
    return (fs::path(dir) / (scene_id + ext)).string();
}

SuperpointPartition partition_from_labels(const std::string& scene_id, std::vector<int32_t> labels) {
    SuperpointPartition part;
    part.scene_id = scene_id;
    int32_t max_id = -1;
    for (int32_t v : labels) max_id = std::max(max_id, v);
    part.point_to_sp = std::move(labels);
    part.count = max_id + 1;
    part.level = 0;
    part.validate();
    return part;
}

std::vector<PointCloud> load_clouds(const DatasetManifest& manifest) {
    std::vector<PointCloud> clouds(manifest.scenes.size());
    for (size_t h = 0; h < manifest.scenes.size(); ++h) {
        clouds[h] = read_point_cloud(manifest.scenes[h].cloud_path);
        clouds[h].scene_id = manifest.scenes[h].scene_id;
    }
    return clouds;
}

FeatureSet load_scene_features(const std::string& path, const std::string& scene_id, size_t n_points) {
    FeatureSet fs = read_feature_set(path);
    if (fs.rows != n_points)
        fail_pre("feature file for scene '" + scene_id + "' has " + std::to_string(fs.rows) + " rows, expected " +
                 std::to_string(n_points));
    return fs;
}

// Stacks per-scene superpoint mean features into one global matrix in
// manifest order; offsets[h] is scene h's first global row.
struct GlobalFeatures {
    FeatureSet stacked;
    std::vector<size_t> offsets;
    std::vector<std::pair<size_t, size_t>> row_origin;  // (scene, local sp)
};

GlobalFeatures stack_superpoint_features(const std::vector<FeatureSet>& per_scene_means) {
    GlobalFeatures out;
    size_t total = 0;
    const size_t dim = per_scene_means.empty() ? 0 : per_scene_means.front().dim;
    for (const auto& m : per_scene_means) {
        if (m.dim != dim) fail_pre("superpoint features disagree on dim across scenes");
        total += m.rows;
    }
    out.stacked.rows = total;
    out.stacked.dim = dim;
    out.stacked.values.reserve(total * dim);
    out.stacked.valid.reserve(total);
    out.offsets.resize(per_scene_means.size());
    for (size_t h = 0; h < per_scene_means.size(); ++h) {
        out.offsets[h] = out.stacked.valid.size();
        const auto& m = per_scene_means[h];
        out.stacked.values.insert(out.stacked.values.end(), m.values.begin(), m.values.end());
        out.stacked.valid.insert(out.stacked.valid.end(), m.valid.begin(), m.valid.end());
        for (size_t s = 0; s < m.rows; ++s) out.row_origin.emplace_back(h, s);
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (manifest_path.empty()) fail_pre("pipeline config: manifest path required");
    if (output_dir.empty()) fail_pre("pipeline config: output dir required");
    init.validate();
    projection.validate();
    schedule.validate();
    if (s_prime < 1) fail_pre("pipeline config: s_prime must be >= 1");
    if (classes < 1) fail_pre("pipeline config: classes must be >= 1");
    if (bandwidth <= 0.0) fail_pre("pipeline config: bandwidth must be > 0");
    if (threads < 1) fail_pre("pipeline config: threads must be >= 1");
}

namespace {

PipelineConfig load_pipeline_config_impl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail_parse(path + ": invalid JSON: " + e.what());
    }
    const auto base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    PipelineConfig cfg;
    try {
        if (!j.contains("manifest") || !j.contains("output")) fail_parse(path + ": config needs 'manifest' and 'output'");
        cfg.manifest_path = resolve(j["manifest"].get<std::string>());
        cfg.output_dir = resolve(j["output"].get<std::string>());
        if (j.contains("mode")) {
            const std::string mode = j["mode"].get<std::string>();
            if (mode == "indoor") cfg.mode = SceneMode::indoor;
            else if (mode == "outdoor") cfg.mode = SceneMode::outdoor;
            else fail_parse(path + ": mode must be 'indoor' or 'outdoor'");
        }
        cfg.init.mode = cfg.mode;
        if (j.contains("init")) {
            const auto& ji = j["init"];
            if (ji.contains("voxel_resolution")) cfg.init.voxel_resolution = ji["voxel_resolution"].get<double>();
            if (ji.contains("normal_knn")) cfg.init.normal_knn = ji["normal_knn"].get<int>();
            if (ji.contains("angle_threshold_deg")) cfg.init.angle_threshold_deg = ji["angle_threshold_deg"].get<double>();
            if (ji.contains("ransac_distance")) cfg.init.ransac_distance = ji["ransac_distance"].get<double>();
            if (ji.contains("cluster_distance")) cfg.init.cluster_distance = ji["cluster_distance"].get<double>();
            if (ji.contains("ransac_iters")) cfg.init.ransac_iters = ji["ransac_iters"].get<int>();
            if (ji.contains("min_region_size")) cfg.init.min_region_size = ji["min_region_size"].get<int>();
        }
        if (j.contains("projection")) {
            if (j["projection"].is_string()) {
                if (j["projection"].get<std::string>() != "precomputed")
                    fail_parse(path + ": projection must be 'precomputed' or an object");
                cfg.features_precomputed = true;
            } else {
                cfg.features_precomputed = false;
                const auto& jp = j["projection"];
                if (jp.contains("depth_tolerance")) cfg.projection.depth_tolerance = jp["depth_tolerance"].get<double>();
                if (jp.contains("min_views")) cfg.projection.min_views = jp["min_views"].get<int>();
            }
        }
        if (j.contains("schedule")) {
            const auto& js = j["schedule"];
            if (js.contains("m1")) cfg.schedule.m1 = js["m1"].get<int>();
            if (js.contains("mT")) cfg.schedule.mT = js["mT"].get<int>();
            if (js.contains("rounds")) cfg.schedule.rounds = js["rounds"].get<int>();
        }
        if (j.contains("s_prime")) cfg.s_prime = j["s_prime"].get<int>();
        if (j.contains("classes")) cfg.classes = j["classes"].get<int>();
        if (j.contains("kmeans")) {
            const auto& jk = j["kmeans"];
            if (jk.contains("max_iters")) cfg.kmeans.max_iters = jk["max_iters"].get<int>();
            if (jk.contains("tol")) cfg.kmeans.tol = jk["tol"].get<double>();
            if (jk.contains("restarts")) cfg.kmeans.restarts = jk["restarts"].get<int>();
        }
        if (j.contains("bandwidth")) cfg.bandwidth = j["bandwidth"].get<double>();
        if (j.contains("per_round_feature_dirs"))
            for (const auto& d : j["per_round_feature_dirs"]) cfg.per_round_feature_dirs.push_back(resolve(d.get<std::string>()));
        if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
        if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    } catch (const json::exception& e) {
        fail_parse(path + ": bad config value: " + e.what());
    }
    cfg.kmeans.rng_seed = cfg.seed;
    cfg.kmeans.threads = cfg.threads;
    cfg.validate();
    return cfg;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    return with_stage("config", [&] { return load_pipeline_config_impl(path); });
}

// ---------------------------------------------------------------- run

RunResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    const DatasetManifest manifest = with_stage("manifest", [&] { return read_manifest(config.manifest_path); });
    const size_t scene_count = manifest.scenes.size();
    std::vector<PointCloud> clouds = with_stage("load", [&] { return load_clouds(manifest); });

    fs::create_directories(config.output_dir);

    // Stage 1: initial superpoints.
    std::vector<SuperpointPartition> partitions(scene_count);
    with_stage("init-superpoints", [&] {
        InitConfig init = config.init;
        init.mode = config.mode;
        parallel_blocks(scene_count, config.threads, [&](size_t begin, size_t end) {
            for (size_t h = begin; h < end; ++h)
                partitions[h] = init_superpoints(clouds[h], init, Rng::mix(config.seed, 1000, h));
        });
        const std::string dir = (fs::path(config.output_dir) / "superpoints" / "level0").string();
        fs::create_directories(dir);
        for (size_t h = 0; h < scene_count; ++h)
            write_labels(partitions[h].point_to_sp, scene_file(dir, partitions[h].scene_id, ".lgsplbl"));
    });

    // Feature ingestion: precomputed files or depth-checked view projection.
    std::vector<FeatureSet> features(scene_count);
    with_stage("features", [&] {
        if (config.features_precomputed) {
            for (size_t h = 0; h < scene_count; ++h) {
                if (manifest.scenes[h].feature_path.empty())
                    fail_pre("scene '" + manifest.scenes[h].scene_id + "' has no feature file in the manifest");
                features[h] = load_scene_features(manifest.scenes[h].feature_path, manifest.scenes[h].scene_id,
                                                  clouds[h].size());
            }
            return;
        }
        const std::string dir = (fs::path(config.output_dir) / "features").string();
        fs::create_directories(dir);
        for (size_t h = 0; h < scene_count; ++h) {
            const auto& entry = manifest.scenes[h];
            if (entry.view_paths.empty())
                fail_pre("scene '" + entry.scene_id + "' has no views for projection");
            std::vector<CameraView> views;
            views.reserve(entry.view_paths.size());
            for (const auto& vp : entry.view_paths) views.push_back(read_camera_view(vp));
            features[h] = aggregate_views(clouds[h], views, config.projection);
            write_feature_set(features[h], scene_file(dir, entry.scene_id, ".lgspfeat"));
        }
    });

    const std::vector<int> schedule = growth_schedule(config.schedule.m1, config.schedule.mT, config.schedule.rounds);

    RunResult result;
    std::vector<std::vector<int32_t>> final_labels(scene_count);
    for (int round = 1; round <= config.schedule.rounds; ++round) {
        const std::string round_tag = "round " + std::to_string(round);

        // Feature re-ingestion hook.
        if (static_cast<size_t>(round - 1) < config.per_round_feature_dirs.size()) {
            with_stage("features", [&] {
                const std::string& dir = config.per_round_feature_dirs[static_cast<size_t>(round - 1)];
                for (size_t h = 0; h < scene_count; ++h)
                    features[h] = load_scene_features(scene_file(dir, manifest.scenes[h].scene_id, ".lgspfeat"),
                                                      manifest.scenes[h].scene_id, clouds[h].size());
            });
        }

        // Local grouping: grow superpoints toward this round's target.
        with_stage("grow", [&] {
            const int target = schedule[static_cast<size_t>(round - 1)];
            parallel_blocks(scene_count, config.threads, [&](size_t begin, size_t end) {
                for (size_t h = begin; h < end; ++h) {
                    const FeatureSet means = superpoint_mean_features(features[h], partitions[h]);
                    const auto centroids = superpoint_centroids(clouds[h], partitions[h]);
                    KMeansConfig cfg = config.kmeans;
                    cfg.rng_seed = Rng::mix(config.seed, 2000 + static_cast<uint64_t>(round), h);
                    cfg.threads = 1;  // scene-level parallelism is outside
                    std::vector<int32_t> new_of_old;
                    SuperpointPartition grown =
                        grow_superpoints(means, partitions[h], target, cfg, centroids, &new_of_old);
                    for (size_t i = 0; i < grown.size(); ++i)
                        if (grown.point_to_sp[i] != new_of_old[static_cast<size_t>(partitions[h].point_to_sp[i])])
                            fail_numeric("coarsening invariant violated in scene '" + grown.scene_id + "'");
                    partitions[h] = std::move(grown);
                }
            });
            const std::string dir =
                (fs::path(config.output_dir) / "superpoints" / ("level" + std::to_string(round))).string();
            fs::create_directories(dir);
            for (size_t h = 0; h < scene_count; ++h)
                write_labels(partitions[h].point_to_sp, scene_file(dir, partitions[h].scene_id, ".lgsplbl"));
        });

        // Global grouping: graph spectrum over all superpoints.
        LabelAssignment sp_labels;
        GlobalFeatures global;
        with_stage("spectral", [&] {
            std::vector<FeatureSet> means(scene_count);
            parallel_blocks(scene_count, config.threads, [&](size_t begin, size_t end) {
                for (size_t h = begin; h < end; ++h) means[h] = superpoint_mean_features(features[h], partitions[h]);
            });
            global = stack_superpoint_features(means);
            const size_t s = global.stacked.rows;
            for (size_t row = 0; row < s; ++row)
                if (!global.stacked.valid[row])
                    fail_pre("superpoint " + std::to_string(global.row_origin[row].second) + " of scene '" +
                             manifest.scenes[global.row_origin[row].first].scene_id +
                             "' has no valid point features");
            if (static_cast<size_t>(config.s_prime) > s)
                fail_pre("s_prime (" + std::to_string(config.s_prime) + ") exceeds the global superpoint count (" +
                         std::to_string(s) + ")");
            if (static_cast<size_t>(config.classes) > s)
                fail_pre("classes (" + std::to_string(config.classes) + ") exceeds the global superpoint count (" +
                         std::to_string(s) + ")");

            NodeNamer namer = [&](size_t row) {
                return "scene '" + manifest.scenes[global.row_origin[row].first].scene_id + "' superpoint " +
                       std::to_string(global.row_origin[row].second);
            };
            const GlobalGraph graph = build_global_graph(global.stacked, config.bandwidth, config.threads, namer);
            const Matrix laplacian = normalized_laplacian(graph);
            const EigenBasis basis = eigendecompose(laplacian);
            const Matrix freq = gft(basis.u, global.stacked);

            KMeansConfig pattern_cfg = config.kmeans;
            pattern_cfg.rng_seed = Rng::mix(config.seed, 3000, static_cast<uint64_t>(round));
            std::vector<int32_t> pattern_assignments;
            Matrix v;
            group_patterns(basis.u, freq, config.s_prime, pattern_cfg, pattern_assignments, v);

            KMeansConfig label_cfg = config.kmeans;
            label_cfg.rng_seed = Rng::mix(config.seed, 4000, static_cast<uint64_t>(round));
            sp_labels = superpoint_pseudo_labels(v, config.classes, label_cfg);
            result.global_superpoints = s;
        });

        // Expansion: every point inherits its superpoint's class.
        with_stage("expand", [&] {
            const std::string dir =
                (fs::path(config.output_dir) / "labels" / ("round" + std::to_string(round))).string();
            fs::create_directories(dir);
            for (size_t h = 0; h < scene_count; ++h) {
                final_labels[h] = expand_labels_to_points(sp_labels, partitions[h],
                                                          static_cast<int32_t>(global.offsets[h]));
                write_labels(final_labels[h], scene_file(dir, manifest.scenes[h].scene_id, ".lgsplbl"),
                             config.classes);
            }
        });
    }

    with_stage("finalize", [&] {
        const std::string dir = (fs::path(config.output_dir) / "labels" / "final").string();
        fs::create_directories(dir);
        for (size_t h = 0; h < scene_count; ++h) {
            const std::string path = scene_file(dir, manifest.scenes[h].scene_id, ".lgsplbl");
            write_labels(final_labels[h], path, config.classes);
            result.label_files.push_back(path);
        }
    });

    with_stage("evaluate", [&] {
        // Ground truth comes from the manifest label files, falling back to
        // the PLY label property; skip the report if any scene lacks it.
        std::vector<std::vector<int32_t>> gt(scene_count);
        for (size_t h = 0; h < scene_count; ++h) {
            if (!manifest.scenes[h].label_path.empty()) gt[h] = read_labels(manifest.scenes[h].label_path);
            else if (clouds[h].has_gt()) gt[h] = clouds[h].gt_labels;
            else return;
            if (gt[h].size() != clouds[h].size())
                fail_pre("ground truth for scene '" + manifest.scenes[h].scene_id + "' has wrong length");
        }
        int32_t max_label = -1;
        for (const auto& g : gt)
            for (int32_t v : g) max_label = std::max(max_label, v);
        const int32_t metric_classes = std::max<int32_t>(config.classes, max_label + 1);

        ConfusionMatrix confusion(metric_classes);
        for (size_t h = 0; h < scene_count; ++h) confusion.add(final_labels[h], gt[h]);
        result.report = metrics_from_confusion(confusion, /*apply_matching=*/true);
        result.metric_classes = metric_classes;
        write_metric_report_json(*result.report, metric_classes,
                                 (fs::path(config.output_dir) / "report.json").string());
    });

    return result;
}

// ---------------------------------------------------------------- stages

void stage_init_superpoints(const std::string& manifest_path, const InitConfig& init, const std::string& out_dir,
                            uint64_t seed, int threads) {
    with_stage("init-superpoints", [&] {
        const DatasetManifest manifest = read_manifest(manifest_path);
        fs::create_directories(out_dir);
        const size_t scene_count = manifest.scenes.size();
        std::vector<SuperpointPartition> parts(scene_count);
        parallel_blocks(scene_count, threads, [&](size_t begin, size_t end) {
            for (size_t h = begin; h < end; ++h) {
                PointCloud cloud = read_point_cloud(manifest.scenes[h].cloud_path);
                cloud.scene_id = manifest.scenes[h].scene_id;
                parts[h] = init_superpoints(cloud, init, Rng::mix(seed, 1000, h));
            }
        });
        for (size_t h = 0; h < scene_count; ++h)
            write_labels(parts[h].point_to_sp, scene_file(out_dir, parts[h].scene_id, ".lgsplbl"));
    });
}

void stage_project_features(const std::string& manifest_path, const ProjectionConfig& projection,
                            const std::string& out_dir, int threads) {
    with_stage("project-features", [&] {
        const DatasetManifest manifest = read_manifest(manifest_path);
        fs::create_directories(out_dir);
        const size_t scene_count = manifest.scenes.size();
        parallel_blocks(scene_count, threads, [&](size_t begin, size_t end) {
            for (size_t h = begin; h < end; ++h) {
                const auto& entry = manifest.scenes[h];
                if (entry.view_paths.empty()) fail_pre("scene '" + entry.scene_id + "' has no views");
                PointCloud cloud = read_point_cloud(entry.cloud_path);
                std::vector<CameraView> views;
                views.reserve(entry.view_paths.size());
                for (const auto& vp : entry.view_paths) views.push_back(read_camera_view(vp));
                const FeatureSet fsout = aggregate_views(cloud, views, projection);
                write_feature_set(fsout, scene_file(out_dir, entry.scene_id, ".lgspfeat"));
            }
        });
    });
}

void stage_grow(const std::string& manifest_path, const std::string& superpoint_dir,
                const std::string& feature_dir, const GrowthSchedule& schedule_cfg, const KMeansConfig& kmeans,
                const std::string& out_dir, uint64_t seed, int threads) {
    with_stage("grow", [&] {
        const DatasetManifest manifest = read_manifest(manifest_path);
        const auto schedule = growth_schedule(schedule_cfg.m1, schedule_cfg.mT, schedule_cfg.rounds);
        const size_t scene_count = manifest.scenes.size();
        for (int round = 1; round <= schedule_cfg.rounds; ++round)
            fs::create_directories(fs::path(out_dir) / ("level" + std::to_string(round)));

        parallel_blocks(scene_count, threads, [&](size_t begin, size_t end) {
            for (size_t h = begin; h < end; ++h) {
                const auto& entry = manifest.scenes[h];
                PointCloud cloud = read_point_cloud(entry.cloud_path);
                cloud.scene_id = entry.scene_id;
                SuperpointPartition part = partition_from_labels(
                    entry.scene_id, read_labels(scene_file(superpoint_dir, entry.scene_id, ".lgsplbl")));
                if (part.size() != cloud.size()) fail_pre("partition/cloud size mismatch for scene '" + entry.scene_id + "'");
                const FeatureSet feats =
                    load_scene_features(scene_file(feature_dir, entry.scene_id, ".lgspfeat"), entry.scene_id, cloud.size());
                for (int round = 1; round <= schedule_cfg.rounds; ++round) {
                    const FeatureSet means = superpoint_mean_features(feats, part);
                    const auto centroids = superpoint_centroids(cloud, part);
                    KMeansConfig cfg = kmeans;
                    cfg.rng_seed = Rng::mix(seed, 2000 + static_cast<uint64_t>(round), h);
                    cfg.threads = 1;
                    part = grow_superpoints(means, part, schedule[static_cast<size_t>(round - 1)], cfg, centroids);
                    write_labels(part.point_to_sp,
                                 scene_file((fs::path(out_dir) / ("level" + std::to_string(round))).string(),
                                            entry.scene_id, ".lgsplbl"));
                }
            }
        });
    });
}

void stage_spectral_labels(const std::string& manifest_path, const std::string& superpoint_dir,
                           const std::string& feature_dir, int s_prime, int classes, double bandwidth,
                           const KMeansConfig& kmeans, const std::string& out_dir,
                           const std::string& dump_dir, uint64_t seed, int threads) {
    with_stage("spectral-labels", [&] {
        const DatasetManifest manifest = read_manifest(manifest_path);
        const size_t scene_count = manifest.scenes.size();
        fs::create_directories(out_dir);

        std::vector<SuperpointPartition> parts(scene_count);
        std::vector<FeatureSet> means(scene_count);
        parallel_blocks(scene_count, threads, [&](size_t begin, size_t end) {
            for (size_t h = begin; h < end; ++h) {
                const auto& entry = manifest.scenes[h];
                PointCloud cloud = read_point_cloud(entry.cloud_path);
                parts[h] = partition_from_labels(entry.scene_id,
                                                 read_labels(scene_file(superpoint_dir, entry.scene_id, ".lgsplbl")));
                if (parts[h].size() != cloud.size())
                    fail_pre("partition/cloud size mismatch for scene '" + entry.scene_id + "'");
                const FeatureSet feats =
                    load_scene_features(scene_file(feature_dir, entry.scene_id, ".lgspfeat"), entry.scene_id, cloud.size());
                means[h] = superpoint_mean_features(feats, parts[h]);
            }
        });

        GlobalFeatures global = stack_superpoint_features(means);
        for (size_t row = 0; row < global.stacked.rows; ++row)
            if (!global.stacked.valid[row])
                fail_pre("superpoint " + std::to_string(global.row_origin[row].second) + " of scene '" +
                         manifest.scenes[global.row_origin[row].first].scene_id + "' has no valid point features");
        const size_t s = global.stacked.rows;
        if (static_cast<size_t>(s_prime) > s) fail_pre("s_prime exceeds the global superpoint count");
        if (static_cast<size_t>(classes) > s) fail_pre("classes exceeds the global superpoint count");

        NodeNamer namer = [&](size_t row) {
            return "scene '" + manifest.scenes[global.row_origin[row].first].scene_id + "' superpoint " +
                   std::to_string(global.row_origin[row].second);
        };
        const GlobalGraph graph = build_global_graph(global.stacked, bandwidth, threads, namer);
        const Matrix laplacian = normalized_laplacian(graph);
        const EigenBasis basis = eigendecompose(laplacian);
        const Matrix freq = gft(basis.u, global.stacked);

        KMeansConfig pattern_cfg = kmeans;
        pattern_cfg.rng_seed = Rng::mix(seed, 3000, 1);
        pattern_cfg.threads = threads;
        std::vector<int32_t> pattern_assignments;
        Matrix v;
        group_patterns(basis.u, freq, s_prime, pattern_cfg, pattern_assignments, v);

        KMeansConfig label_cfg = kmeans;
        label_cfg.rng_seed = Rng::mix(seed, 4000, 1);
        label_cfg.threads = threads;
        const LabelAssignment sp_labels = superpoint_pseudo_labels(v, classes, label_cfg);

        for (size_t h = 0; h < scene_count; ++h) {
            const auto labels = expand_labels_to_points(sp_labels, parts[h], static_cast<int32_t>(global.offsets[h]));
            write_labels(labels, scene_file(out_dir, manifest.scenes[h].scene_id, ".lgsplbl"), classes);
        }
        write_labels(sp_labels.per_sp, (fs::path(out_dir) / "superpoint_labels.lgsplbl").string(), classes);

        if (!dump_dir.empty()) {
            fs::create_directories(dump_dir);
            auto dump_matrix = [&](const Matrix& m, const std::string& name) {
                FeatureSet f;
                f.rows = m.rows;
                f.dim = m.cols;
                f.values = m.a;
                f.valid.assign(m.rows, 1);
                write_feature_set(f, (fs::path(dump_dir) / name).string());
            };
            Matrix lambda(s, 1);
            for (size_t i = 0; i < s; ++i) lambda.at(i, 0) = basis.eigenvalues[i];
            dump_matrix(lambda, "eigenvalues.lgspfeat");
            dump_matrix(basis.u, "basis_u.lgspfeat");
            dump_matrix(v, "patterns_v.lgspfeat");
        }
    });
}

MetricReport stage_evaluate(const std::string& pred_dir, const std::string& gt_dir, int classes,
                            const std::string& report_path) {
    return with_stage("evaluate", [&] {
        // The ground-truth directory defines the evaluation set; every gt
        // scene must have a prediction, extra prediction files are ignored.
        std::vector<std::string> stems;
        for (const auto& e : fs::directory_iterator(gt_dir))
            if (e.is_regular_file() && e.path().extension() == ".lgsplbl") stems.push_back(e.path().stem().string());
        std::sort(stems.begin(), stems.end());
        if (stems.empty()) fail_pre("evaluate: no .lgsplbl files under " + gt_dir);

        int32_t max_label = -1;
        std::vector<std::vector<int32_t>> preds, gts;
        for (const auto& stem : stems) {
            const std::string pred_path = (fs::path(pred_dir) / (stem + ".lgsplbl")).string();
            if (!fs::exists(pred_path)) fail_io("evaluate: missing prediction for scene '" + stem + "'");
            preds.push_back(read_labels(pred_path));
            gts.push_back(read_labels((fs::path(gt_dir) / (stem + ".lgsplbl")).string()));
            for (int32_t vv : gts.back()) max_label = std::max(max_label, vv);
            for (int32_t vv : preds.back()) max_label = std::max(max_label, vv);
        }
        const int32_t metric_classes = std::max<int32_t>(classes, max_label + 1);
        ConfusionMatrix confusion(metric_classes);
        for (size_t i = 0; i < preds.size(); ++i) confusion.add(preds[i], gts[i]);
        MetricReport report = metrics_from_confusion(confusion, /*apply_matching=*/true);
        if (!report_path.empty()) write_metric_report_json(report, metric_classes, report_path);
        return report;
    });
}

void write_metric_report_json(const MetricReport& report, int classes, const std::string& path) {
    json j;
    j["classes"] = classes;
    j["oa"] = report.oa;
    j["macc"] = report.macc;
    j["miou"] = report.miou;
    j["evaluated_points"] = report.evaluated_points;
    j["ignored_points"] = report.ignored_points;
    j["matching"] = report.matching;
    j["per_class"] = json::array();
    for (int c = 0; c < classes; ++c) {
        json jc;
        jc["class"] = c;
        const double iou = report.per_class_iou[static_cast<size_t>(c)];
        const double acc = report.per_class_acc[static_cast<size_t>(c)];
        if (std::isnan(iou)) jc["iou"] = nullptr;
        else jc["iou"] = iou;
        if (std::isnan(acc)) jc["acc"] = nullptr;
        else jc["acc"] = acc;
        j["per_class"].push_back(jc);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) fail_io("write failed: " + path);
}

}  // namespace logosp
