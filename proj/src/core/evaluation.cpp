#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"

namespace logosp {

int64_t ConfusionMatrix::total() const {
    int64_t acc = 0;
    for (int64_t v : counts) acc += v;
    return acc;
}

void ConfusionMatrix::add(std::span<const int32_t> pred, std::span<const int32_t> gt) {
    if (pred.size() != gt.size())
        fail_pre("confusion: pred length " + std::to_string(pred.size()) + " != gt length " +
                 std::to_string(gt.size()));
    for (size_t i = 0; i < gt.size(); ++i) {
        const int32_t g = gt[i];
        const int32_t p = pred[i];
        if (g == -1) {
            ++ignored;
            continue;
        }
        if (g < 0 || g >= classes)
            fail_pre("confusion: ground-truth label " + std::to_string(g) + " at point " + std::to_string(i) +
                     " outside [0," + std::to_string(classes) + ") u {-1}");
        if (p < 0 || p >= classes)
            fail_pre("confusion: prediction " + std::to_string(p) + " at point " + std::to_string(i) +
                     " outside [0," + std::to_string(classes) + ") on an evaluable point");
        ++at(g, p);
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes != classes) fail_pre("confusion: class count mismatch in merge");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    ignored += other.ignored;
}

namespace {

// Jonker-Volgenant style shortest augmenting path assignment, minimizing.
// cost is n x n row-major; returns column assigned to each row.
std::vector<int> solve_min_assignment(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost[static_cast<size_t>(i0 - 1) * n + (j - 1)] - u[static_cast<size_t>(i0)] -
                                   v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<size_t>(j)] > 0) row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

// Maximum matched total over a square sub-problem given by row/col id lists.
int64_t max_assignment_total(const ConfusionMatrix& m, const std::vector<int32_t>& rows,
                             const std::vector<int32_t>& cols) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) return 0;
    std::vector<double> cost(static_cast<size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            cost[static_cast<size_t>(r) * n + c] = -static_cast<double>(m.at(rows[static_cast<size_t>(r)], cols[static_cast<size_t>(c)]));
    const auto row_to_col = solve_min_assignment(cost, n);
    int64_t total = 0;
    for (int r = 0; r < n; ++r) total += m.at(rows[static_cast<size_t>(r)], cols[static_cast<size_t>(row_to_col[static_cast<size_t>(r)])]);
    return total;
}

}  // namespace

std::vector<int32_t> hungarian_match(const ConfusionMatrix& confusion) {
    const int32_t c = confusion.classes;
    if (c <= 0) fail_pre("hungarian_match: confusion matrix must be square and non-empty");
    if (confusion.counts.size() != static_cast<size_t>(c) * static_cast<size_t>(c))
        fail_pre("hungarian_match: confusion matrix must be square");

    std::vector<int32_t> all(static_cast<size_t>(c));
    for (int32_t i = 0; i < c; ++i) all[static_cast<size_t>(i)] = i;
    const int64_t target = max_assignment_total(confusion, all, all);

    // Fix rows in order, choosing the smallest column that still allows an
    // optimal completion; this pins the lexicographically smallest optimum.
    std::vector<int32_t> perm(static_cast<size_t>(c), -1);
    std::vector<char> used(static_cast<size_t>(c), 0);
    int64_t prefix = 0;
    for (int32_t r = 0; r < c; ++r) {
        std::vector<int32_t> tail_rows;
        for (int32_t r2 = r + 1; r2 < c; ++r2) tail_rows.push_back(r2);
        bool fixed = false;
        for (int32_t cand = 0; cand < c && !fixed; ++cand) {
            if (used[static_cast<size_t>(cand)]) continue;
            std::vector<int32_t> tail_cols;
            for (int32_t c2 = 0; c2 < c; ++c2)
                if (!used[static_cast<size_t>(c2)] && c2 != cand) tail_cols.push_back(c2);
            const int64_t sub = max_assignment_total(confusion, tail_rows, tail_cols);
            if (prefix + confusion.at(r, cand) + sub == target) {
                perm[static_cast<size_t>(r)] = cand;
                used[static_cast<size_t>(cand)] = 1;
                prefix += confusion.at(r, cand);
                fixed = true;
            }
        }
        if (!fixed) fail_numeric("hungarian_match: internal inconsistency fixing row " + std::to_string(r));
    }
    return perm;
}

MetricReport metrics_from_confusion(const ConfusionMatrix& confusion, bool apply_matching) {
    const int32_t c = confusion.classes;
    const int64_t total = confusion.total();
    if (total == 0) fail_pre("metrics: no evaluable points");

    MetricReport rep;
    rep.ignored_points = confusion.ignored;
    rep.evaluated_points = total;
    if (apply_matching) {
        rep.matching = hungarian_match(confusion);
    } else {
        rep.matching.resize(static_cast<size_t>(c));
        for (int32_t i = 0; i < c; ++i) rep.matching[static_cast<size_t>(i)] = i;
    }

    std::vector<int64_t> row_sum(static_cast<size_t>(c), 0), col_sum(static_cast<size_t>(c), 0);
    for (int32_t g = 0; g < c; ++g)
        for (int32_t p = 0; p < c; ++p) {
            row_sum[static_cast<size_t>(g)] += confusion.at(g, p);
            col_sum[static_cast<size_t>(p)] += confusion.at(g, p);
        }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.per_class_iou.assign(static_cast<size_t>(c), nan);
    rep.per_class_acc.assign(static_cast<size_t>(c), nan);
    int64_t diag = 0;
    double iou_sum = 0.0, acc_sum = 0.0;
    int present = 0;
    for (int32_t g = 0; g < c; ++g) {
        const int32_t p = rep.matching[static_cast<size_t>(g)];
        const int64_t tp = confusion.at(g, p);
        diag += tp;
        if (row_sum[static_cast<size_t>(g)] == 0) continue;  // class absent from ground truth
        const int64_t denom = row_sum[static_cast<size_t>(g)] + col_sum[static_cast<size_t>(p)] - tp;
        const double iou = denom > 0 ? static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
        const double acc = static_cast<double>(tp) / static_cast<double>(row_sum[static_cast<size_t>(g)]);
        rep.per_class_iou[static_cast<size_t>(g)] = iou;
        rep.per_class_acc[static_cast<size_t>(g)] = acc;
        iou_sum += iou;
        acc_sum += acc;
        ++present;
    }
    rep.oa = static_cast<double>(diag) / static_cast<double>(total);
    rep.miou = present > 0 ? iou_sum / present : 0.0;
    rep.macc = present > 0 ? acc_sum / present : 0.0;
    return rep;
}

MetricReport compute_metrics(std::span<const int32_t> pred, std::span<const int32_t> gt, int32_t classes) {
    if (classes < 1) fail_pre("metrics: class count must be >= 1");
    ConfusionMatrix confusion(classes);
    confusion.add(pred, gt);
    return metrics_from_confusion(confusion, /*apply_matching=*/true);
}

std::vector<int32_t> vote_superpoint_labels(const SuperpointPartition& partition, std::span<const int32_t> gt,
                                            int32_t classes) {
    if (gt.size() != partition.size()) fail_pre("vote_superpoint_labels: gt length != partition size");
    if (classes < 1) fail_pre("vote_superpoint_labels: class count must be >= 1");
    const size_t m = static_cast<size_t>(partition.count);
    std::vector<int64_t> votes(m * static_cast<size_t>(classes), 0);
    for (size_t i = 0; i < gt.size(); ++i) {
        const int32_t g = gt[i];
        if (g == -1) continue;
        if (g < 0 || g >= classes)
            fail_pre("vote_superpoint_labels: ground-truth label " + std::to_string(g) + " outside range");
        ++votes[static_cast<size_t>(partition.point_to_sp[i]) * classes + g];
    }
    std::vector<int32_t> voted(m, -1);
    for (size_t sp = 0; sp < m; ++sp) {
        int64_t best = 0;
        int32_t arg = -1;
        for (int32_t cls = 0; cls < classes; ++cls) {
            const int64_t n = votes[sp * classes + cls];
            if (n > best) {  // ties keep the smallest class id
                best = n;
                arg = cls;
            }
        }
        voted[sp] = arg;
    }
    return voted;
}

double superpoint_purity(const SuperpointPartition& partition, std::span<const int32_t> gt, int32_t classes) {
    const auto voted = vote_superpoint_labels(partition, gt, classes);
    std::vector<int32_t> per_point(partition.size());
    for (size_t i = 0; i < partition.size(); ++i)
        per_point[i] = voted[static_cast<size_t>(partition.point_to_sp[i])];

    // A -1 voted label implies every member point has -1 ground truth, so
    // those points are already excluded by the ground-truth rule.
    ConfusionMatrix confusion(classes);
    std::vector<int32_t> pred_clean;
    std::vector<int32_t> gt_clean;
    pred_clean.reserve(gt.size());
    gt_clean.reserve(gt.size());
    for (size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] == -1) {
            ++confusion.ignored;
            continue;
        }
        pred_clean.push_back(per_point[i]);
        gt_clean.push_back(gt[i]);
    }
    confusion.add(pred_clean, gt_clean);
    return metrics_from_confusion(confusion, /*apply_matching=*/false).miou;
}

}  // namespace logosp
