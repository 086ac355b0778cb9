#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace logosp {

struct KMeansConfig {
    int k = 1;
    int max_iters = 300;
    double tol = 1e-6;  // relative objective change
    uint64_t rng_seed = 42;
    int restarts = 1;
    int threads = 1;  // assignment-step parallelism; never changes the result
};

struct KMeansResult {
    std::vector<int32_t> assignments;     // rows, in [0,k)
    std::vector<double> centroids;        // k*dim row-major
    double objective = 0.0;               // within-cluster sum of squared distances
    int iters_run = 0;
    std::vector<double> objective_trace;  // objective after each assignment step
};

// k-means++ seeding: first centroid uniform over rows, the rest sampled with
// probability proportional to squared distance to the nearest chosen one.
std::vector<double> kmeans_init(std::span<const double> data, size_t rows, size_t dim, int k,
                                uint64_t rng_seed);

// Lloyd iterations until the relative objective change drops to tol or
// max_iters is hit. Ties in the assignment step go to the lowest centroid
// index; centroid updates sum in ascending point index; empty clusters are
// reseeded with the point farthest from its centroid. Bit-deterministic for
// a fixed seed regardless of thread count.
KMeansResult kmeans_fit(std::span<const double> data, size_t rows, size_t dim, const KMeansConfig& config);

}  // namespace logosp
