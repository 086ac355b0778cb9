#include "logosp/logosp.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/io.hpp"
#include "core/pipeline.hpp"
#include "core/synth.hpp"
#include "core/types.hpp"

struct logosp_cloud {
    logosp::PointCloud data;
};
struct logosp_features {
    logosp::FeatureSet data;
};
struct logosp_labels {
    std::vector<int32_t> data;
};
struct logosp_metrics {
    logosp::MetricReport data;
    int32_t classes = 0;
};

namespace {

thread_local std::string t_last_error;

logosp_status status_of(const logosp::Error& e) {
    switch (e.kind()) {
        case logosp::ErrorKind::io: return LOGOSP_ERR_IO;
        case logosp::ErrorKind::parse: return LOGOSP_ERR_PARSE;
        case logosp::ErrorKind::precondition: return LOGOSP_ERR_PRECONDITION;
        case logosp::ErrorKind::numeric: return LOGOSP_ERR_NUMERIC;
    }
    return LOGOSP_ERR_INTERNAL;
}

template <typename F>
logosp_status guarded(F&& f) {
    try {
        t_last_error.clear();
        f();
        return LOGOSP_OK;
    } catch (const logosp::Error& e) {
        t_last_error = e.what();
        return status_of(e);
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return LOGOSP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return LOGOSP_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return LOGOSP_ERR_INTERNAL;
    }
}

logosp_status invalid_argument(const char* msg) {
    t_last_error = msg;
    return LOGOSP_ERR_INVALID_ARGUMENT;
}

logosp::KMeansConfig to_kmeans(const logosp_kmeans_params* p, const logosp_run_opts* opts) {
    logosp::KMeansConfig cfg;
    if (p) {
        cfg.max_iters = p->max_iters;
        cfg.tol = p->tol;
        cfg.restarts = p->restarts;
    }
    if (opts) {
        cfg.rng_seed = opts->seed;
        cfg.threads = opts->threads;
    }
    return cfg;
}

logosp_run_opts opts_or_default(const logosp_run_opts* opts) {
    logosp_run_opts o;
    logosp_run_opts_defaults(&o);
    if (opts) o = *opts;
    return o;
}

}  // namespace

extern "C" {

const char* logosp_version(void) { return "0.1.0"; }

const char* logosp_last_error(void) { return t_last_error.c_str(); }

/* ------------------------------------------------------------------ data */

logosp_status logosp_cloud_read(const char* path, logosp_cloud** out) {
    if (!path || !out) return invalid_argument("logosp_cloud_read: null argument");
    return guarded([&] {
        auto* handle = new logosp_cloud{logosp::read_point_cloud(path)};
        *out = handle;
    });
}

logosp_status logosp_cloud_write(const logosp_cloud* cloud, const char* path, int binary) {
    if (!cloud || !path) return invalid_argument("logosp_cloud_write: null argument");
    return guarded([&] { logosp::write_point_cloud(cloud->data, path, binary != 0); });
}

void logosp_cloud_free(logosp_cloud* cloud) { delete cloud; }

uint64_t logosp_cloud_size(const logosp_cloud* cloud) { return cloud ? cloud->data.size() : 0; }

const double* logosp_cloud_positions(const logosp_cloud* cloud) {
    return cloud ? &cloud->data.positions[0][0] : nullptr;
}

const double* logosp_cloud_colors(const logosp_cloud* cloud) {
    return cloud ? &cloud->data.colors[0][0] : nullptr;
}

const int32_t* logosp_cloud_gt_labels(const logosp_cloud* cloud) {
    if (!cloud || cloud->data.gt_labels.empty()) return nullptr;
    return cloud->data.gt_labels.data();
}

logosp_status logosp_features_read(const char* path, logosp_features** out) {
    if (!path || !out) return invalid_argument("logosp_features_read: null argument");
    return guarded([&] { *out = new logosp_features{logosp::read_feature_set(path)}; });
}

logosp_status logosp_features_write(const logosp_features* features, const char* path) {
    if (!features || !path) return invalid_argument("logosp_features_write: null argument");
    return guarded([&] { logosp::write_feature_set(features->data, path); });
}

void logosp_features_free(logosp_features* features) { delete features; }

uint64_t logosp_features_rows(const logosp_features* features) { return features ? features->data.rows : 0; }

uint32_t logosp_features_dim(const logosp_features* features) {
    return features ? static_cast<uint32_t>(features->data.dim) : 0;
}

const double* logosp_features_values(const logosp_features* features) {
    return features ? features->data.values.data() : nullptr;
}

const uint8_t* logosp_features_mask(const logosp_features* features) {
    return features ? features->data.valid.data() : nullptr;
}

logosp_status logosp_labels_read(const char* path, logosp_labels** out) {
    if (!path || !out) return invalid_argument("logosp_labels_read: null argument");
    return guarded([&] { *out = new logosp_labels{logosp::read_labels(path)}; });
}

logosp_status logosp_labels_write(const int32_t* labels, uint64_t count, int32_t classes, const char* path) {
    if (!labels || !path) return invalid_argument("logosp_labels_write: null argument");
    return guarded([&] {
        logosp::write_labels(std::span<const int32_t>(labels, static_cast<size_t>(count)), path, classes);
    });
}

void logosp_labels_free(logosp_labels* labels) { delete labels; }

uint64_t logosp_labels_size(const logosp_labels* labels) { return labels ? labels->data.size() : 0; }

const int32_t* logosp_labels_data(const logosp_labels* labels) { return labels ? labels->data.data() : nullptr; }

/* ---------------------------------------------------------------- stages */

void logosp_run_opts_defaults(logosp_run_opts* opts) {
    if (!opts) return;
    opts->seed = 42;
    opts->threads = 1;
}

void logosp_init_params_defaults(logosp_init_params* params) {
    if (!params) return;
    const logosp::InitConfig d;
    params->outdoor_mode = 0;
    params->voxel_resolution = d.voxel_resolution;
    params->normal_knn = d.normal_knn;
    params->angle_threshold_deg = d.angle_threshold_deg;
    params->ransac_distance = d.ransac_distance;
    params->cluster_distance = d.cluster_distance;
    params->ransac_iters = d.ransac_iters;
    params->min_region_size = d.min_region_size;
}

void logosp_kmeans_params_defaults(logosp_kmeans_params* params) {
    if (!params) return;
    const logosp::KMeansConfig d;
    params->max_iters = d.max_iters;
    params->tol = d.tol;
    params->restarts = d.restarts;
}

void logosp_synth_params_defaults(logosp_synth_params* params) {
    if (!params) return;
    const logosp::SynthConfig d;
    params->scenes = d.scenes;
    params->classes = d.classes;
    params->objects_per_scene = d.objects_per_scene;
    params->feature_dim = d.feature_dim;
    params->separation = d.separation;
    params->noise_sigma = d.noise_sigma;
    params->rng_seed = d.rng_seed;
}

logosp_status logosp_init_superpoints(const char* manifest_path, const logosp_init_params* params,
                                      const char* out_dir, const logosp_run_opts* opts) {
    if (!manifest_path || !out_dir) return invalid_argument("logosp_init_superpoints: null argument");
    return guarded([&] {
        logosp_init_params p;
        logosp_init_params_defaults(&p);
        if (params) p = *params;
        logosp::InitConfig cfg;
        cfg.mode = p.outdoor_mode ? logosp::SceneMode::outdoor : logosp::SceneMode::indoor;
        cfg.voxel_resolution = p.voxel_resolution;
        cfg.normal_knn = p.normal_knn;
        cfg.angle_threshold_deg = p.angle_threshold_deg;
        cfg.ransac_distance = p.ransac_distance;
        cfg.cluster_distance = p.cluster_distance;
        cfg.ransac_iters = p.ransac_iters;
        cfg.min_region_size = p.min_region_size;
        const logosp_run_opts o = opts_or_default(opts);
        logosp::stage_init_superpoints(manifest_path, cfg, out_dir, o.seed, o.threads);
    });
}

logosp_status logosp_project_features(const char* manifest_path, double depth_tolerance, int min_views,
                                      const char* out_dir, const logosp_run_opts* opts) {
    if (!manifest_path || !out_dir) return invalid_argument("logosp_project_features: null argument");
    return guarded([&] {
        logosp::ProjectionConfig cfg;
        cfg.depth_tolerance = depth_tolerance;
        cfg.min_views = min_views;
        const logosp_run_opts o = opts_or_default(opts);
        logosp::stage_project_features(manifest_path, cfg, out_dir, o.threads);
    });
}

logosp_status logosp_grow(const char* manifest_path, const char* superpoint_dir, const char* feature_dir,
                          int m1, int mT, int rounds, const logosp_kmeans_params* kmeans, const char* out_dir,
                          const logosp_run_opts* opts) {
    if (!manifest_path || !superpoint_dir || !feature_dir || !out_dir)
        return invalid_argument("logosp_grow: null argument");
    return guarded([&] {
        const logosp_run_opts o = opts_or_default(opts);
        logosp::GrowthSchedule schedule{m1, mT, rounds};
        logosp::stage_grow(manifest_path, superpoint_dir, feature_dir, schedule, to_kmeans(kmeans, &o), out_dir,
                           o.seed, o.threads);
    });
}

logosp_status logosp_spectral_labels(const char* manifest_path, const char* superpoint_dir,
                                     const char* feature_dir, int s_prime, int classes, double bandwidth,
                                     const logosp_kmeans_params* kmeans, const char* out_dir,
                                     const char* dump_dir, const logosp_run_opts* opts) {
    if (!manifest_path || !superpoint_dir || !feature_dir || !out_dir)
        return invalid_argument("logosp_spectral_labels: null argument");
    return guarded([&] {
        const logosp_run_opts o = opts_or_default(opts);
        logosp::stage_spectral_labels(manifest_path, superpoint_dir, feature_dir, s_prime, classes, bandwidth,
                                      to_kmeans(kmeans, &o), out_dir, dump_dir ? dump_dir : "", o.seed,
                                      o.threads);
    });
}

logosp_status logosp_evaluate(const char* pred_dir, const char* gt_dir, int classes, const char* report_path,
                              logosp_metrics** out) {
    if (!pred_dir || !gt_dir) return invalid_argument("logosp_evaluate: null argument");
    return guarded([&] {
        logosp::MetricReport report =
            logosp::stage_evaluate(pred_dir, gt_dir, classes, report_path ? report_path : "");
        if (out) {
            auto* handle = new logosp_metrics;
            handle->classes = static_cast<int32_t>(report.per_class_iou.size());
            handle->data = std::move(report);
            *out = handle;
        }
    });
}

logosp_status logosp_synth(const logosp_synth_params* params, const char* out_dir) {
    if (!out_dir) return invalid_argument("logosp_synth: null argument");
    return guarded([&] {
        logosp_synth_params p;
        logosp_synth_params_defaults(&p);
        if (params) p = *params;
        logosp::SynthConfig cfg;
        cfg.scenes = p.scenes;
        cfg.classes = p.classes;
        cfg.objects_per_scene = p.objects_per_scene;
        cfg.feature_dim = p.feature_dim;
        cfg.separation = p.separation;
        cfg.noise_sigma = p.noise_sigma;
        cfg.rng_seed = p.rng_seed;
        logosp::synth_scenes(cfg, out_dir);
    });
}

logosp_status logosp_run(const char* config_path, const uint64_t* seed_override, const int* threads_override,
                         logosp_metrics** out) {
    if (!config_path) return invalid_argument("logosp_run: null argument");
    if (out) *out = nullptr;
    return guarded([&] {
        logosp::PipelineConfig cfg = logosp::load_pipeline_config(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.kmeans.rng_seed = *seed_override;
        }
        if (threads_override) {
            cfg.threads = *threads_override;
            cfg.kmeans.threads = *threads_override;
        }
        logosp::RunResult result = logosp::run_pipeline(cfg);
        if (out && result.report) {
            auto* handle = new logosp_metrics;
            handle->classes = result.metric_classes;
            handle->data = std::move(*result.report);
            *out = handle;
        }
    });
}

/* -------------------------------------------------------------- metrics */

void logosp_metrics_free(logosp_metrics* metrics) { delete metrics; }

double logosp_metrics_oa(const logosp_metrics* metrics) { return metrics ? metrics->data.oa : 0.0; }

double logosp_metrics_macc(const logosp_metrics* metrics) { return metrics ? metrics->data.macc : 0.0; }

double logosp_metrics_miou(const logosp_metrics* metrics) { return metrics ? metrics->data.miou : 0.0; }

int32_t logosp_metrics_classes(const logosp_metrics* metrics) { return metrics ? metrics->classes : 0; }

double logosp_metrics_class_iou(const logosp_metrics* metrics, int32_t cls) {
    if (!metrics || cls < 0 || static_cast<size_t>(cls) >= metrics->data.per_class_iou.size()) return 0.0;
    return metrics->data.per_class_iou[static_cast<size_t>(cls)];
}

int32_t logosp_metrics_matching(const logosp_metrics* metrics, int32_t cls) {
    if (!metrics || cls < 0 || static_cast<size_t>(cls) >= metrics->data.matching.size()) return -1;
    return metrics->data.matching[static_cast<size_t>(cls)];
}

}  // extern "C"
