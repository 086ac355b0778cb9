#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/evaluation.hpp"
#include "core/geometry.hpp"
#include "core/growing.hpp"
#include "core/kmeans.hpp"
#include "core/projection.hpp"
#include "core/synth.hpp"
#include "core/types.hpp"

namespace logosp {

struct PipelineConfig {
    std::string manifest_path;
    std::string output_dir;
    SceneMode mode = SceneMode::indoor;
    InitConfig init;
    bool features_precomputed = true;
    ProjectionConfig projection;
    GrowthSchedule schedule;
    int s_prime = 50;
    int classes = 20;
    KMeansConfig kmeans;  // k is filled per use
    double bandwidth = 1.0;
    std::vector<std::string> per_round_feature_dirs;  // feature re-ingestion hook
    uint64_t seed = 42;
    int threads = 1;

    void validate() const;
};

// JSON config; relative paths resolve against the config file directory.
PipelineConfig load_pipeline_config(const std::string& path);

struct RunResult {
    std::optional<MetricReport> report;  // present when every scene has ground truth
    int metric_classes = 0;
    std::vector<std::string> label_files;  // final per-scene label paths
    size_t global_superpoints = 0;         // S at the last round
};

// Full orchestration: init superpoints -> ingest (or project) features ->
// per round: grow, global spectral grouping, label expansion -> evaluation.
// Writes superpoints/level<t>/, labels/round<r>/, labels/final/ and
// report.json under output_dir. Deterministic for a fixed seed, independent
// of the thread count. Errors carry a "[stage]" tag.
RunResult run_pipeline(const PipelineConfig& config);

// CLI-grade single stages operating on directories of per-scene files.
void stage_init_superpoints(const std::string& manifest_path, const InitConfig& init, const std::string& out_dir,
                            uint64_t seed, int threads);
void stage_project_features(const std::string& manifest_path, const ProjectionConfig& projection,
                            const std::string& out_dir, int threads);
void stage_grow(const std::string& manifest_path, const std::string& superpoint_dir,
                const std::string& feature_dir, const GrowthSchedule& schedule, const KMeansConfig& kmeans,
                const std::string& out_dir, uint64_t seed, int threads);
void stage_spectral_labels(const std::string& manifest_path, const std::string& superpoint_dir,
                           const std::string& feature_dir, int s_prime, int classes, double bandwidth,
                           const KMeansConfig& kmeans, const std::string& out_dir,
                           const std::string& dump_dir, uint64_t seed, int threads);
MetricReport stage_evaluate(const std::string& pred_dir, const std::string& gt_dir, int classes,
                            const std::string& report_path);

void write_metric_report_json(const MetricReport& report, int classes, const std::string& path);

}  // namespace logosp
