#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace logosp {

// Row = ground-truth class, column = predicted class. Points whose ground
// truth is -1 are tallied in `ignored` and never scored.
struct ConfusionMatrix {
    int32_t classes = 0;
    std::vector<int64_t> counts;  // classes*classes row-major
    int64_t ignored = 0;

    explicit ConfusionMatrix(int32_t c = 0)
        : classes(c), counts(static_cast<size_t>(c) * static_cast<size_t>(c), 0) {}

    int64_t& at(int32_t gt, int32_t pred) { return counts[static_cast<size_t>(gt) * classes + pred]; }
    int64_t at(int32_t gt, int32_t pred) const { return counts[static_cast<size_t>(gt) * classes + pred]; }
    int64_t total() const;

    void add(std::span<const int32_t> pred, std::span<const int32_t> gt);
    void merge(const ConfusionMatrix& other);
};

// Permutation pi maximizing sum_c counts[c][pi(c)]; among optimal matchings
// the lexicographically smallest one is returned.
std::vector<int32_t> hungarian_match(const ConfusionMatrix& confusion);

struct MetricReport {
    double oa = 0.0;
    double macc = 0.0;
    double miou = 0.0;
    std::vector<double> per_class_iou;  // NaN for classes absent from ground truth
    std::vector<double> per_class_acc;  // NaN likewise
    std::vector<int32_t> matching;      // matching[gt_class] = predicted label
    int64_t evaluated_points = 0;
    int64_t ignored_points = 0;
};

// Scores with Hungarian matching applied first (apply_matching=false keeps
// the identity mapping, used by the purity measure whose voted labels already
// live in ground-truth space). Classes absent from the ground truth are
// dropped from the mIoU/mAcc means.
MetricReport metrics_from_confusion(const ConfusionMatrix& confusion, bool apply_matching = true);

MetricReport compute_metrics(std::span<const int32_t> pred, std::span<const int32_t> gt, int32_t classes);

// Majority ground-truth label per superpoint (-1 ground truth excluded, ties
// to the smallest class id); superpoints containing no defined point get -1.
std::vector<int32_t> vote_superpoint_labels(const SuperpointPartition& partition, std::span<const int32_t> gt,
                                            int32_t classes);

// mIoU of the voted per-point labels against the ground truth, without
// Hungarian matching.
double superpoint_purity(const SuperpointPartition& partition, std::span<const int32_t> gt, int32_t classes);

}  // namespace logosp
