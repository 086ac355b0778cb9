#include "core/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace logosp {

namespace {

double dist2_row(const double* a, const double* b, size_t dim) {
    double acc = 0.0;
    for (size_t c = 0; c < dim; ++c) {
        const double d = a[c] - b[c];
        acc += d * d;
    }
    return acc;
}

void validate_inputs(std::span<const double> data, size_t rows, size_t dim, int k) {
    if (k < 1) fail_pre("kmeans: k must be >= 1");
    if (rows < static_cast<size_t>(k))
        fail_pre("kmeans: rows (" + std::to_string(rows) + ") < k (" + std::to_string(k) + ")");
    if (data.size() != rows * dim) fail_pre("kmeans: data size != rows*dim");
    for (size_t i = 0; i < data.size(); ++i)
        if (!std::isfinite(data[i])) fail_pre("kmeans: non-finite value at index " + std::to_string(i));
}

}  // namespace

std::vector<double> kmeans_init(std::span<const double> data, size_t rows, size_t dim, int k,
                                uint64_t rng_seed) {
    validate_inputs(data, rows, dim, k);
    Rng rng(rng_seed);
    std::vector<double> centroids(static_cast<size_t>(k) * dim);
    std::vector<uint8_t> chosen(rows, 0);

    const size_t first = rng.bounded(rows);
    std::copy_n(data.data() + first * dim, dim, centroids.begin());
    chosen[first] = 1;

    std::vector<double> d2(rows);
    for (size_t i = 0; i < rows; ++i) d2[i] = dist2_row(data.data() + i * dim, centroids.data(), dim);

    for (int t = 1; t < k; ++t) {
        double total = 0.0;
        for (size_t i = 0; i < rows; ++i) total += d2[i];
        size_t next = rows;
        if (total > 0.0) {
            const double u = rng.next_double() * total;
            double cum = 0.0;
            size_t last_positive = rows;
            for (size_t i = 0; i < rows; ++i) {
                if (d2[i] <= 0.0) continue;
                last_positive = i;
                cum += d2[i];
                if (cum > u) {
                    next = i;
                    break;
                }
            }
            if (next == rows) next = last_positive;  // rounding ran off the end
        } else {
            // All remaining rows coincide with chosen centroids; take the
            // lowest unchosen index so seeding still yields k rows.
            for (size_t i = 0; i < rows; ++i)
                if (!chosen[i]) {
                    next = i;
                    break;
                }
            if (next == rows) next = 0;
        }
        chosen[next] = 1;
        std::copy_n(data.data() + next * dim, dim, centroids.begin() + static_cast<size_t>(t) * dim);
        for (size_t i = 0; i < rows; ++i)
            d2[i] = std::min(d2[i], dist2_row(data.data() + i * dim,
                                              centroids.data() + static_cast<size_t>(t) * dim, dim));
    }
    return centroids;
}

namespace {

KMeansResult lloyd(std::span<const double> data, size_t rows, size_t dim, const KMeansConfig& cfg,
                   uint64_t seed) {
    const size_t k = static_cast<size_t>(cfg.k);
    KMeansResult res;
    res.centroids = kmeans_init(data, rows, dim, cfg.k, seed);
    res.assignments.assign(rows, 0);

    std::vector<double> sums(k * dim);
    std::vector<int64_t> counts(k);
    double prev_obj = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        // Assignment: per-row independent, safe to parallelize.
        parallel_blocks(rows, cfg.threads, [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i) {
                const double* x = data.data() + i * dim;
                int32_t best = 0;
                double best_d2 = dist2_row(x, res.centroids.data(), dim);
                for (size_t c = 1; c < k; ++c) {
                    const double d2 = dist2_row(x, res.centroids.data() + c * dim, dim);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = static_cast<int32_t>(c);
                    }
                }
                res.assignments[i] = best;
            }
        });

        double obj = 0.0;
        for (size_t i = 0; i < rows; ++i)
            obj += dist2_row(data.data() + i * dim,
                             res.centroids.data() + static_cast<size_t>(res.assignments[i]) * dim, dim);
        res.objective_trace.push_back(obj);
        res.iters_run = iter + 1;

        const bool converged =
            prev_obj == 0.0 || (std::isfinite(prev_obj) && prev_obj - obj <= cfg.tol * prev_obj);
        if (converged) {
            res.objective = obj;
            break;
        }
        prev_obj = obj;
        res.objective = obj;

        // Update: cluster means, ascending point index.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < rows; ++i) {
            const size_t c = static_cast<size_t>(res.assignments[i]);
            const double* x = data.data() + i * dim;
            double* s = sums.data() + c * dim;
            for (size_t d = 0; d < dim; ++d) s[d] += x[d];
            ++counts[c];
        }
        for (size_t c = 0; c < k; ++c)
            if (counts[c] > 0)
                for (size_t d = 0; d < dim; ++d)
                    res.centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);

        // Empty clusters: reseed with the point farthest from its centroid.
        // The current objective is untouched (no members), and the next
        // assignment step can only decrease it.
        std::vector<uint8_t> donated(rows, 0);
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            size_t pick = rows;
            for (size_t i = 0; i < rows; ++i) {
                if (donated[i]) continue;
                const double d2 = dist2_row(data.data() + i * dim,
                                            res.centroids.data() + static_cast<size_t>(res.assignments[i]) * dim, dim);
                if (d2 > worst) {
                    worst = d2;
                    pick = i;
                }
            }
            if (pick < rows) {
                donated[pick] = 1;
                std::copy_n(data.data() + pick * dim, dim, res.centroids.begin() + c * dim);
            }
        }
    }

    // Guarantee non-empty clusters even for pathological duplicate-heavy
    // inputs: move the lowest-index member out of the largest cluster.
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < rows; ++i) ++counts[static_cast<size_t>(res.assignments[i])];
    bool moved = false;
    for (size_t c = 0; c < k; ++c) {
        while (counts[c] == 0) {
            size_t donor = 0;
            for (size_t c2 = 1; c2 < k; ++c2)
                if (counts[c2] > counts[donor]) donor = c2;
            if (counts[donor] <= 1) fail_numeric("kmeans: cannot populate all clusters");
            for (size_t i = 0; i < rows; ++i) {
                if (static_cast<size_t>(res.assignments[i]) == donor) {
                    res.assignments[i] = static_cast<int32_t>(c);
                    break;
                }
            }
            --counts[donor];
            ++counts[c];
            moved = true;
        }
    }
    if (moved) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (size_t i = 0; i < rows; ++i) {
            const size_t c = static_cast<size_t>(res.assignments[i]);
            for (size_t d = 0; d < dim; ++d) sums[c * dim + d] += data[i * dim + d];
        }
        for (size_t c = 0; c < k; ++c)
            for (size_t d = 0; d < dim; ++d)
                res.centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
        double obj = 0.0;
        for (size_t i = 0; i < rows; ++i)
            obj += dist2_row(data.data() + i * dim,
                             res.centroids.data() + static_cast<size_t>(res.assignments[i]) * dim, dim);
        res.objective = obj;
    }
    return res;
}

}  // namespace

KMeansResult kmeans_fit(std::span<const double> data, size_t rows, size_t dim, const KMeansConfig& cfg) {
    validate_inputs(data, rows, dim, cfg.k);
    if (cfg.max_iters < 1) fail_pre("kmeans: max_iters must be >= 1");
    if (cfg.tol < 0.0) fail_pre("kmeans: tol must be >= 0");
    if (cfg.restarts < 1) fail_pre("kmeans: restarts must be >= 1");

    KMeansResult best;
    bool have = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        const uint64_t seed = (r == 0) ? cfg.rng_seed : Rng::mix(cfg.rng_seed, static_cast<uint64_t>(r));
        KMeansResult res = lloyd(data, rows, dim, cfg, seed);
        if (!have || res.objective < best.objective) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

}  // namespace logosp
