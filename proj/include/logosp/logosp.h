/* logosp - local-global superpoint grouping for unsupervised point-cloud
 * semantic segmentation. C API of the shared library; all functions return a
 * status code and keep a thread-local error message readable through
 * logosp_last_error(). Handles are opaque and freed with their *_free call.
 */
#ifndef LOGOSP_H
#define LOGOSP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LOGOSP_BUILD)
#define LOGOSP_API __declspec(dllexport)
#else
#define LOGOSP_API __declspec(dllimport)
#endif
#else
#define LOGOSP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum logosp_status {
    LOGOSP_OK = 0,
    LOGOSP_ERR_INVALID_ARGUMENT = 1, /* null pointers, bad parameter values */
    LOGOSP_ERR_IO = 2,               /* missing files, failed writes */
    LOGOSP_ERR_PARSE = 3,            /* malformed file content */
    LOGOSP_ERR_PRECONDITION = 4,     /* operation contract violated */
    LOGOSP_ERR_NUMERIC = 5,          /* solver failure, non-finite data */
    LOGOSP_ERR_INTERNAL = 6
} logosp_status;

LOGOSP_API const char* logosp_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
LOGOSP_API const char* logosp_last_error(void);

/* ------------------------------------------------------------------ data */

typedef struct logosp_cloud logosp_cloud;
typedef struct logosp_features logosp_features;
typedef struct logosp_labels logosp_labels;
typedef struct logosp_metrics logosp_metrics;

/* PLY point cloud (float x,y,z + uchar rgb + optional int label). */
LOGOSP_API logosp_status logosp_cloud_read(const char* path, logosp_cloud** out);
LOGOSP_API logosp_status logosp_cloud_write(const logosp_cloud* cloud, const char* path, int binary);
LOGOSP_API void logosp_cloud_free(logosp_cloud* cloud);
LOGOSP_API uint64_t logosp_cloud_size(const logosp_cloud* cloud);
LOGOSP_API const double* logosp_cloud_positions(const logosp_cloud* cloud); /* N*3 row-major */
LOGOSP_API const double* logosp_cloud_colors(const logosp_cloud* cloud);    /* N*3 in [0,1] */
LOGOSP_API const int32_t* logosp_cloud_gt_labels(const logosp_cloud* cloud); /* NULL when absent */

/* LGSPFEAT feature matrix with validity mask. */
LOGOSP_API logosp_status logosp_features_read(const char* path, logosp_features** out);
LOGOSP_API logosp_status logosp_features_write(const logosp_features* features, const char* path);
LOGOSP_API void logosp_features_free(logosp_features* features);
LOGOSP_API uint64_t logosp_features_rows(const logosp_features* features);
LOGOSP_API uint32_t logosp_features_dim(const logosp_features* features);
LOGOSP_API const double* logosp_features_values(const logosp_features* features); /* rows*dim */
LOGOSP_API const uint8_t* logosp_features_mask(const logosp_features* features);  /* rows */

/* LGSPLBL label vector (-1 = undefined). */
LOGOSP_API logosp_status logosp_labels_read(const char* path, logosp_labels** out);
LOGOSP_API logosp_status logosp_labels_write(const int32_t* labels, uint64_t count, int32_t classes,
                                             const char* path);
LOGOSP_API void logosp_labels_free(logosp_labels* labels);
LOGOSP_API uint64_t logosp_labels_size(const logosp_labels* labels);
LOGOSP_API const int32_t* logosp_labels_data(const logosp_labels* labels);

/* ---------------------------------------------------------------- stages */

typedef struct logosp_run_opts {
    uint64_t seed;
    int threads; /* must not change results */
} logosp_run_opts;
LOGOSP_API void logosp_run_opts_defaults(logosp_run_opts* opts);

typedef struct logosp_init_params {
    int outdoor_mode; /* 0 = indoor region growing, 1 = outdoor RANSAC + clustering */
    double voxel_resolution;
    int normal_knn;
    double angle_threshold_deg;
    double ransac_distance;
    double cluster_distance;
    int ransac_iters;
    int min_region_size;
} logosp_init_params;
LOGOSP_API void logosp_init_params_defaults(logosp_init_params* params);

/* Writes one superpoint-id LGSPLBL per scene into out_dir. */
LOGOSP_API logosp_status logosp_init_superpoints(const char* manifest_path, const logosp_init_params* params,
                                                 const char* out_dir, const logosp_run_opts* opts);

/* Projects per-view feature grids onto points and averages across views. */
LOGOSP_API logosp_status logosp_project_features(const char* manifest_path, double depth_tolerance,
                                                 int min_views, const char* out_dir,
                                                 const logosp_run_opts* opts);

typedef struct logosp_kmeans_params {
    int max_iters;
    double tol;
    int restarts;
} logosp_kmeans_params;
LOGOSP_API void logosp_kmeans_params_defaults(logosp_kmeans_params* params);

/* Grows superpoints along the m1->mT schedule; writes level<t>/ per round. */
LOGOSP_API logosp_status logosp_grow(const char* manifest_path, const char* superpoint_dir,
                                     const char* feature_dir, int m1, int mT, int rounds,
                                     const logosp_kmeans_params* kmeans, const char* out_dir,
                                     const logosp_run_opts* opts);

/* Global spectral grouping into pseudo-labels; dump_dir (optional, may be
 * NULL) receives eigenvalues/basis/pattern matrices as LGSPFEAT files. */
LOGOSP_API logosp_status logosp_spectral_labels(const char* manifest_path, const char* superpoint_dir,
                                                const char* feature_dir, int s_prime, int classes,
                                                double bandwidth, const logosp_kmeans_params* kmeans,
                                                const char* out_dir, const char* dump_dir,
                                                const logosp_run_opts* opts);

/* Hungarian-matched OA/mAcc/mIoU of per-scene predictions against ground
 * truth labels paired by file stem. report_path may be NULL. */
LOGOSP_API logosp_status logosp_evaluate(const char* pred_dir, const char* gt_dir, int classes,
                                         const char* report_path, logosp_metrics** out);

typedef struct logosp_synth_params {
    int scenes;
    int classes;
    int objects_per_scene;
    int feature_dim;
    double separation;
    double noise_sigma;
    uint64_t rng_seed;
} logosp_synth_params;
LOGOSP_API void logosp_synth_params_defaults(logosp_synth_params* params);

/* Generates a synthetic labeled dataset (clouds/features/gt + manifest). */
LOGOSP_API logosp_status logosp_synth(const logosp_synth_params* params, const char* out_dir);

/* Runs the whole pipeline from a JSON config. seed_override/threads_override
 * replace the config values when non-NULL; *out receives a metrics handle
 * when ground truth was available, NULL otherwise. */
LOGOSP_API logosp_status logosp_run(const char* config_path, const uint64_t* seed_override,
                                    const int* threads_override, logosp_metrics** out);

/* -------------------------------------------------------------- metrics */

LOGOSP_API void logosp_metrics_free(logosp_metrics* metrics);
LOGOSP_API double logosp_metrics_oa(const logosp_metrics* metrics);
LOGOSP_API double logosp_metrics_macc(const logosp_metrics* metrics);
LOGOSP_API double logosp_metrics_miou(const logosp_metrics* metrics);
LOGOSP_API int32_t logosp_metrics_classes(const logosp_metrics* metrics);
/* Per-class IoU; NaN for classes absent from the ground truth. */
LOGOSP_API double logosp_metrics_class_iou(const logosp_metrics* metrics, int32_t cls);
/* Predicted label matched to ground-truth class cls. */
LOGOSP_API int32_t logosp_metrics_matching(const logosp_metrics* metrics, int32_t cls);

#ifdef __cplusplus
}
#endif

#endif /* LOGOSP_H */
