#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "clustfill/core.hpp"

namespace clustfill {

/// One benchmark measurement: partition-agreement scores, imputation error
/// over the masked cells (absent when nothing was masked), and wall time.
struct MetricsRecord {
    double nmi = 0.0;
    double f_score = 0.0;
    double rand_index = 0.0;
    std::optional<double> rmse_missing;
    double runtime_seconds = 0.0;
};

/// Normalized mutual information with geometric-mean normalization
/// MI / sqrt(H(a) * H(b)). Returns 1 when both entropies are zero, 0 when
/// exactly one is, and exactly 1 for partitions identical up to relabeling.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

/// Fraction of instance pairs the two partitions agree on (together in both
/// or separated in both).
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Pair-counting F1 with `a` as truth: precision = shared same-cluster pairs
/// over predicted same-cluster pairs, recall over true same-cluster pairs.
/// Returns 1 when neither side has same-cluster pairs, 0 when only one side
/// has none.
double pairwise_f(const std::vector<int>& a, const std::vector<int>& b);

/// Root mean squared error restricted to masked cells (mask == 0).
double rmse_missing(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& filled,
                    const MaskMatrix& mask);

}  // namespace clustfill
