#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/kmeans.hpp"
#include "core/matrix.hpp"
#include "core/types.hpp"

namespace logosp {

// Fully connected graph over all superpoints in the dataset with Gaussian
// feature-distance edge weights a_ij = exp(-beta * |f_i - f_j|_2).
struct GlobalGraph {
    size_t node_count = 0;
    Matrix adjacency;             // symmetric, a_ii = 1, entries in (0,1]
    std::vector<double> degrees;  // row sums, all > 0
};

// Eigenbasis of the normalized Laplacian plus the grouped-pattern matrix:
// column s of U is one global pattern, V column s' averages the U columns of
// cluster s'.
struct GlobalPatternBasis {
    std::vector<double> eigenvalues;          // ascending
    Matrix u;                                 // S x S
    int s_prime = 0;
    std::vector<int32_t> pattern_assignments; // S entries in [0, s_prime)
    Matrix v;                                 // S x S'
};

// Names a graph node in error messages; defaults to "row <i>".
using NodeNamer = std::function<std::string(size_t)>;

GlobalGraph build_global_graph(const FeatureSet& sp_features, double bandwidth = 1.0, int threads = 1,
                               const NodeNamer& namer = nullptr);

// L = D^{-1/2} (D - A) D^{-1/2}, symmetric with a zero mode along D^{1/2} 1.
Matrix normalized_laplacian(const GlobalGraph& graph);

struct EigenBasis {
    std::vector<double> eigenvalues;  // ascending
    Matrix u;                         // columns orthonormal, signs canonicalized
};

// Symmetric eigendecomposition with the spectral-module contracts: symmetry
// precheck at 1e-9, ascending eigenvalues, largest-magnitude entry of every
// column positive.
EigenBasis eigendecompose(const Matrix& laplacian);

// Frequency-domain features U^T F (row s corresponds to global pattern s).
Matrix gft(const Matrix& u, const FeatureSet& sp_features);

// K-means over the rows of the frequency features into s_prime clusters, then
// averages each cluster's U columns into a grouped pattern. V columns are
// ordered by the smallest member eigenvalue index of the cluster and
// pattern_assignments is relabeled to match.
void group_patterns(const Matrix& u, const Matrix& freq, int s_prime, const KMeansConfig& kmeans_cfg,
                    std::vector<int32_t>& pattern_assignments, Matrix& v);

// K-means over the rows of V into C classes; each superpoint's label is its
// cluster.
LabelAssignment superpoint_pseudo_labels(const Matrix& v, int classes, const KMeansConfig& kmeans_cfg);

// Each point inherits its superpoint's label; points flagged in `excluded`
// (optional, per point) get -1.
std::vector<int32_t> expand_labels_to_points(const LabelAssignment& labels, const SuperpointPartition& partition,
                                             int32_t label_offset = 0,
                                             const std::vector<uint8_t>* excluded = nullptr);

}  // namespace logosp
