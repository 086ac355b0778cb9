// Command line front end for the logosp shared library. Everything here goes
// through the public C API in logosp/logosp.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "logosp/logosp.h"

namespace {

int fail_with_last_error(const char* what) {
    std::fprintf(stderr, "logosp %s: error: %s\n", what, logosp_last_error());
    return 1;
}

void print_metrics(const logosp_metrics* metrics) {
    std::printf("classes: %d\n", logosp_metrics_classes(metrics));
    std::printf("oa:      %.6f\n", logosp_metrics_oa(metrics));
    std::printf("macc:    %.6f\n", logosp_metrics_macc(metrics));
    std::printf("miou:    %.6f\n", logosp_metrics_miou(metrics));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"logosp - local-global superpoint grouping for unsupervised 3D semantic segmentation"};
    app.require_subcommand(1);
    app.fallthrough(true);

    logosp_run_opts opts;
    logosp_run_opts_defaults(&opts);
    std::string config_path;
    app.add_option("--config", config_path, "pipeline config JSON (used by `run`)");
    app.add_option("--seed", opts.seed, "RNG seed");
    app.add_option("--threads", opts.threads, "worker threads (never changes results)")->check(CLI::PositiveNumber);

    // init-superpoints
    auto* cmd_init = app.add_subcommand("init-superpoints", "create initial superpoints per scene");
    std::string init_manifest, init_out, init_mode = "indoor";
    logosp_init_params init_params;
    logosp_init_params_defaults(&init_params);
    cmd_init->add_option("--manifest", init_manifest, "dataset manifest JSON")->required();
    cmd_init->add_option("--mode", init_mode, "indoor|outdoor")->check(CLI::IsMember({"indoor", "outdoor"}));
    cmd_init->add_option("--resolution", init_params.voxel_resolution, "indoor voxel resolution (m)");
    cmd_init->add_option("--normal-knn", init_params.normal_knn, "neighborhood size for normals");
    cmd_init->add_option("--angle-threshold", init_params.angle_threshold_deg, "region growing angle (deg)");
    cmd_init->add_option("--ransac-distance", init_params.ransac_distance, "outdoor plane threshold (m)");
    cmd_init->add_option("--cluster-distance", init_params.cluster_distance, "outdoor cluster threshold (m)");
    cmd_init->add_option("--ransac-iters", init_params.ransac_iters, "RANSAC hypothesis count");
    cmd_init->add_option("--min-region-size", init_params.min_region_size, "smallest kept region");
    cmd_init->add_option("--out", init_out, "output directory")->required();

    // project-features
    auto* cmd_project = app.add_subcommand("project-features", "lift 2D feature grids onto 3D points");
    std::string project_manifest, project_out;
    double tolerance = 0.05;
    int min_views = 1;
    cmd_project->add_option("--manifest", project_manifest, "dataset manifest JSON")->required();
    cmd_project->add_option("--tolerance", tolerance, "depth occlusion tolerance (m)");
    cmd_project->add_option("--min-views", min_views, "hits required for a valid point");
    cmd_project->add_option("--out", project_out, "output directory")->required();

    // grow
    auto* cmd_grow = app.add_subcommand("grow", "coarsen superpoints along the growth schedule");
    std::string grow_manifest, grow_sp, grow_feat, grow_out;
    int m1 = 80, mT = 40, rounds = 5;
    logosp_kmeans_params kmeans_params;
    logosp_kmeans_params_defaults(&kmeans_params);
    cmd_grow->add_option("--manifest", grow_manifest, "dataset manifest JSON")->required();
    cmd_grow->add_option("--superpoints", grow_sp, "directory of initial superpoint files")->required();
    cmd_grow->add_option("--features", grow_feat, "directory of per-point feature files")->required();
    cmd_grow->add_option("--m1", m1, "superpoints after the first round");
    cmd_grow->add_option("--mT", mT, "superpoints after the last round");
    cmd_grow->add_option("--rounds", rounds, "growth rounds");
    cmd_grow->add_option("--out", grow_out, "output directory")->required();

    // spectral-labels
    auto* cmd_spectral = app.add_subcommand("spectral-labels", "global frequency-domain pseudo-labels");
    std::string spectral_manifest, spectral_sp, spectral_feat, spectral_out, spectral_dump;
    int s_prime = 50, classes = 20;
    double bandwidth = 1.0;
    cmd_spectral->add_option("--manifest", spectral_manifest, "dataset manifest JSON")->required();
    cmd_spectral->add_option("--superpoints", spectral_sp, "directory of superpoint files")->required();
    cmd_spectral->add_option("--features", spectral_feat, "directory of per-point feature files")->required();
    cmd_spectral->add_option("--s-prime", s_prime, "grouped pattern count");
    cmd_spectral->add_option("--classes", classes, "pseudo-label class count");
    cmd_spectral->add_option("--bandwidth", bandwidth, "edge weight bandwidth");
    cmd_spectral->add_option("--dump-basis", spectral_dump, "directory for eigenvalue/basis dumps");
    cmd_spectral->add_option("--out", spectral_out, "output directory")->required();

    // evaluate
    auto* cmd_eval = app.add_subcommand("evaluate", "Hungarian-matched OA/mAcc/mIoU");
    std::string eval_pred, eval_gt, eval_report;
    int eval_classes = 20;
    cmd_eval->add_option("--pred", eval_pred, "directory of predicted label files")->required();
    cmd_eval->add_option("--gt", eval_gt, "directory of ground-truth label files")->required();
    cmd_eval->add_option("--classes", eval_classes, "class count");
    cmd_eval->add_option("--report", eval_report, "metric report JSON path");

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    logosp_synth_params synth_params;
    logosp_synth_params_defaults(&synth_params);
    std::string synth_out;
    cmd_synth->add_option("--scenes", synth_params.scenes, "scene count");
    cmd_synth->add_option("--classes", synth_params.classes, "class count");
    cmd_synth->add_option("--objects", synth_params.objects_per_scene, "objects per scene");
    cmd_synth->add_option("--dim", synth_params.feature_dim, "feature dimension");
    cmd_synth->add_option("--separation", synth_params.separation, "class mean separation");
    cmd_synth->add_option("--sigma", synth_params.noise_sigma, "feature noise sigma");
    cmd_synth->add_option("--out", synth_out, "output directory")->required();

    // run
    auto* cmd_run = app.add_subcommand("run", "full pipeline from a config JSON");

    CLI11_PARSE(app, argc, argv);

    if (cmd_init->parsed()) {
        init_params.outdoor_mode = (init_mode == "outdoor") ? 1 : 0;
        if (logosp_init_superpoints(init_manifest.c_str(), &init_params, init_out.c_str(), &opts) != LOGOSP_OK)
            return fail_with_last_error("init-superpoints");
        return 0;
    }
    if (cmd_project->parsed()) {
        if (logosp_project_features(project_manifest.c_str(), tolerance, min_views, project_out.c_str(), &opts) !=
            LOGOSP_OK)
            return fail_with_last_error("project-features");
        return 0;
    }
    if (cmd_grow->parsed()) {
        if (logosp_grow(grow_manifest.c_str(), grow_sp.c_str(), grow_feat.c_str(), m1, mT, rounds, &kmeans_params,
                        grow_out.c_str(), &opts) != LOGOSP_OK)
            return fail_with_last_error("grow");
        return 0;
    }
    if (cmd_spectral->parsed()) {
        if (logosp_spectral_labels(spectral_manifest.c_str(), spectral_sp.c_str(), spectral_feat.c_str(), s_prime,
                                   classes, bandwidth, &kmeans_params, spectral_out.c_str(),
                                   spectral_dump.empty() ? nullptr : spectral_dump.c_str(), &opts) != LOGOSP_OK)
            return fail_with_last_error("spectral-labels");
        return 0;
    }
    if (cmd_eval->parsed()) {
        logosp_metrics* metrics = nullptr;
        if (logosp_evaluate(eval_pred.c_str(), eval_gt.c_str(), eval_classes,
                            eval_report.empty() ? nullptr : eval_report.c_str(), &metrics) != LOGOSP_OK)
            return fail_with_last_error("evaluate");
        print_metrics(metrics);
        logosp_metrics_free(metrics);
        return 0;
    }
    if (cmd_synth->parsed()) {
        synth_params.rng_seed = opts.seed;
        if (logosp_synth(&synth_params, synth_out.c_str()) != LOGOSP_OK) return fail_with_last_error("synth");
        return 0;
    }
    if (cmd_run->parsed()) {
        if (config_path.empty()) {
            std::fprintf(stderr, "logosp run: error: --config is required\n");
            return 1;
        }
        logosp_metrics* metrics = nullptr;
        const uint64_t* seed_override = app.count("--seed") > 0 ? &opts.seed : nullptr;
        const int* threads_override = app.count("--threads") > 0 ? &opts.threads : nullptr;
        if (logosp_run(config_path.c_str(), seed_override, threads_override, &metrics) != LOGOSP_OK)
            return fail_with_last_error("run");
        if (metrics) {
            print_metrics(metrics);
            logosp_metrics_free(metrics);
        } else {
            std::printf("run complete (no ground truth, metrics skipped)\n");
        }
        return 0;
    }
    return 0;
}
