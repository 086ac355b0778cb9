#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/eigen_sym.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"

namespace logosp {

GlobalGraph build_global_graph(const FeatureSet& sp_features, double bandwidth, int threads,
                               const NodeNamer& namer) {
    if (bandwidth <= 0.0) fail_pre("build_global_graph: bandwidth must be > 0");
    const size_t s = sp_features.rows;
    const size_t dim = sp_features.dim;
    auto name_of = [&](size_t i) { return namer ? namer(i) : "row " + std::to_string(i); };
    for (size_t i = 0; i < s; ++i) {
        if (!sp_features.row_valid(i)) fail_pre("build_global_graph: invalid feature row for " + name_of(i));
        for (size_t d = 0; d < dim; ++d)
            if (!std::isfinite(sp_features.values[i * dim + d]))
                fail_pre("build_global_graph: non-finite feature for " + name_of(i));
    }

    GlobalGraph g;
    g.node_count = s;
    g.adjacency = Matrix(s, s);
    // Each worker fills whole rows; the mirrored entry is computed from the
    // same pairwise distance, so the matrix is exactly symmetric.
    parallel_blocks(s, threads, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const double* fi = sp_features.values.data() + i * dim;
            double* row = g.adjacency.row_ptr(i);
            row[i] = 1.0;
            for (size_t j = 0; j < s; ++j) {
                if (j == i) continue;
                const double* fj = sp_features.values.data() + j * dim;
                double acc = 0.0;
                for (size_t d = 0; d < dim; ++d) {
                    const double diff = fi[d] - fj[d];
                    acc += diff * diff;
                }
                row[j] = std::exp(-bandwidth * std::sqrt(acc));
            }
        }
    });

    g.degrees.assign(s, 0.0);
    for (size_t i = 0; i < s; ++i) {
        double acc = 0.0;
        const double* row = g.adjacency.row_ptr(i);
        for (size_t j = 0; j < s; ++j) acc += row[j];
        g.degrees[i] = acc;
    }
    return g;
}

Matrix normalized_laplacian(const GlobalGraph& graph) {
    const size_t s = graph.node_count;
    for (size_t i = 0; i < s; ++i)
        if (!(graph.degrees[i] > 0.0)) fail_pre("normalized_laplacian: nonpositive degree at node " + std::to_string(i));

    std::vector<double> inv_sqrt(s);
    for (size_t i = 0; i < s; ++i) inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees[i]);

    Matrix l(s, s);
    for (size_t i = 0; i < s; ++i) {
        for (size_t j = 0; j < s; ++j) {
            const double scaled = graph.adjacency.at(i, j) * inv_sqrt[i] * inv_sqrt[j];
            l.at(i, j) = (i == j ? 1.0 : 0.0) - scaled;
        }
    }
    return l;
}

EigenBasis eigendecompose(const Matrix& laplacian) {
    SymEigen eig = eigendecompose_symmetric_checked(laplacian, 1e-9);
    EigenBasis basis;
    basis.eigenvalues = std::move(eig.values);
    basis.u = std::move(eig.vectors);
    return basis;
}

Matrix gft(const Matrix& u, const FeatureSet& sp_features) {
    if (u.rows != sp_features.rows)
        fail_pre("gft: U rows (" + std::to_string(u.rows) + ") != feature rows (" +
                 std::to_string(sp_features.rows) + ")");
    Matrix f(sp_features.rows, sp_features.dim);
    f.a = sp_features.values;
    return matmul_at_b(u, f);
}

void group_patterns(const Matrix& u, const Matrix& freq, int s_prime, const KMeansConfig& kmeans_cfg,
                    std::vector<int32_t>& pattern_assignments, Matrix& v) {
    const size_t s = u.rows;
    if (freq.rows != s) fail_pre("group_patterns: frequency rows != S");
    if (s_prime < 1 || static_cast<size_t>(s_prime) > s)
        fail_pre("group_patterns: s_prime must be in [1, S]");

    KMeansConfig cfg = kmeans_cfg;
    cfg.k = s_prime;
    const KMeansResult km = kmeans_fit(freq.a, freq.rows, freq.cols, cfg);

    // Order clusters by their smallest member eigenvalue index.
    std::vector<int32_t> first_member(static_cast<size_t>(s_prime), -1);
    for (size_t i = 0; i < s; ++i) {
        const auto c = static_cast<size_t>(km.assignments[i]);
        if (first_member[c] < 0) first_member[c] = static_cast<int32_t>(i);
    }
    std::vector<int32_t> order(static_cast<size_t>(s_prime));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int32_t a, int32_t b) { return first_member[static_cast<size_t>(a)] < first_member[static_cast<size_t>(b)]; });
    std::vector<int32_t> new_of_old(static_cast<size_t>(s_prime));
    for (int32_t pos = 0; pos < s_prime; ++pos) new_of_old[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos;

    pattern_assignments.resize(s);
    for (size_t i = 0; i < s; ++i)
        pattern_assignments[i] = new_of_old[static_cast<size_t>(km.assignments[i])];

    // V column s' = mean of its assigned U columns (ascending column index).
    v = Matrix(s, static_cast<size_t>(s_prime));
    std::vector<int64_t> counts(static_cast<size_t>(s_prime), 0);
    for (size_t col = 0; col < s; ++col) {
        const auto c = static_cast<size_t>(pattern_assignments[col]);
        ++counts[c];
        for (size_t row = 0; row < s; ++row) v.at(row, c) += u.at(row, col);
    }
    for (size_t c = 0; c < static_cast<size_t>(s_prime); ++c) {
        const double inv = 1.0 / static_cast<double>(counts[c]);
        for (size_t row = 0; row < s; ++row) v.at(row, c) *= inv;
    }
}

LabelAssignment superpoint_pseudo_labels(const Matrix& v, int classes, const KMeansConfig& kmeans_cfg) {
    if (classes < 1 || static_cast<size_t>(classes) > v.rows)
        fail_pre("superpoint_pseudo_labels: classes must be in [1, S]");
    KMeansConfig cfg = kmeans_cfg;
    cfg.k = classes;
    const KMeansResult km = kmeans_fit(v.a, v.rows, v.cols, cfg);
    LabelAssignment out;
    out.classes = classes;
    out.per_sp = km.assignments;
    out.validate();
    return out;
}

std::vector<int32_t> expand_labels_to_points(const LabelAssignment& labels, const SuperpointPartition& partition,
                                             int32_t label_offset, const std::vector<uint8_t>* excluded) {
    if (excluded && excluded->size() != partition.size())
        fail_pre("expand_labels_to_points: exclusion mask size mismatch");
    std::vector<int32_t> out(partition.size());
    for (size_t i = 0; i < partition.size(); ++i) {
        if (excluded && (*excluded)[i]) {
            out[i] = -1;
            continue;
        }
        const size_t sp = static_cast<size_t>(label_offset) + static_cast<size_t>(partition.point_to_sp[i]);
        if (sp >= labels.per_sp.size())
            fail_pre("expand_labels_to_points: unlabeled superpoint " + std::to_string(partition.point_to_sp[i]) +
                     " in scene '" + partition.scene_id + "'");
        out[i] = labels.per_sp[sp];
    }
    return out;
}

}  // namespace logosp
