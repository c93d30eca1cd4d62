#include "clustfill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace clustfill {

namespace {

struct Contingency {
    std::vector<std::vector<long>> table;  // clusters of a x clusters of b
    std::vector<long> row_sums;
    std::vector<long> col_sums;
    long total = 0;
};

int compact_labels(const std::vector<int>& labels, std::vector<int>& out) {
    std::map<int, int> ids;
    out.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
        out[i] = it->second;
    }
    return static_cast<int>(ids.size());
}

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> ca, cb;
    const int ka = compact_labels(a, ca);
    const int kb = compact_labels(b, cb);
    Contingency t;
    t.table.assign(static_cast<std::size_t>(ka), std::vector<long>(static_cast<std::size_t>(kb), 0));
    t.row_sums.assign(static_cast<std::size_t>(ka), 0);
    t.col_sums.assign(static_cast<std::size_t>(kb), 0);
    t.total = static_cast<long>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++t.table[static_cast<std::size_t>(ca[i])][static_cast<std::size_t>(cb[i])];
        ++t.row_sums[static_cast<std::size_t>(ca[i])];
        ++t.col_sums[static_cast<std::size_t>(cb[i])];
    }
    return t;
}

void check_lengths(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DimensionError("partition metric: label vectors differ in length");
}

double entropy(const std::vector<long>& sums, long total) {
    double h = 0.0;
    for (long s : sums) {
        if (s == 0) continue;
        const double p = static_cast<double>(s) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

// identical partitions up to relabeling show a contingency table with exactly
// one nonzero cell per row and per column
bool is_relabeling(const Contingency& t) {
    for (const auto& row : t.table) {
        int nonzero = 0;
        for (long v : row) nonzero += v != 0;
        if (nonzero != 1) return false;
    }
    std::vector<int> col_nonzero(t.col_sums.size(), 0);
    for (const auto& row : t.table)
        for (std::size_t j = 0; j < row.size(); ++j) col_nonzero[j] += row[j] != 0;
    return std::all_of(col_nonzero.begin(), col_nonzero.end(), [](int c) { return c == 1; });
}

long pairs_of(long count) { return count * (count - 1) / 2; }

}  // namespace

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    check_lengths(a, b);
    if (a.empty()) throw DimensionError("nmi: empty label vectors");

    const Contingency t = contingency(a, b);
    const double ha = entropy(t.row_sums, t.total);
    const double hb = entropy(t.col_sums, t.total);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    if (is_relabeling(t)) return 1.0;

    double mi = 0.0;
    const double n = static_cast<double>(t.total);
    for (std::size_t i = 0; i < t.table.size(); ++i) {
        for (std::size_t j = 0; j < t.table[i].size(); ++j) {
            const long c = t.table[i][j];
            if (c == 0) continue;
            const double p = static_cast<double>(c) / n;
            mi += p * std::log(n * static_cast<double>(c) /
                               (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
        }
    }
    mi = std::max(mi, 0.0);
    return std::min(1.0, mi / std::sqrt(ha * hb));
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    check_lengths(a, b);
    if (a.size() < 2) throw ConfigError("rand_index: need at least two instances");

    const Contingency t = contingency(a, b);
    long same_a = 0, same_b = 0, same_both = 0;
    for (long s : t.row_sums) same_a += pairs_of(s);
    for (long s : t.col_sums) same_b += pairs_of(s);
    for (const auto& row : t.table)
        for (long c : row) same_both += pairs_of(c);

    const long total_pairs = pairs_of(t.total);
    const long disagreements = (same_a - same_both) + (same_b - same_both);
    return static_cast<double>(total_pairs - disagreements) / static_cast<double>(total_pairs);
}

double pairwise_f(const std::vector<int>& a, const std::vector<int>& b) {
    check_lengths(a, b);
    if (a.size() < 2) throw ConfigError("pairwise_f: need at least two instances");

    const Contingency t = contingency(a, b);
    long same_truth = 0, same_pred = 0, shared = 0;
    for (long s : t.row_sums) same_truth += pairs_of(s);
    for (long s : t.col_sums) same_pred += pairs_of(s);
    for (const auto& row : t.table)
        for (long c : row) shared += pairs_of(c);

    if (same_truth == 0 && same_pred == 0) return 1.0;
    if (same_truth == 0 || same_pred == 0) return 0.0;
    const double precision = static_cast<double>(shared) / static_cast<double>(same_pred);
    const double recall = static_cast<double>(shared) / static_cast<double>(same_truth);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double rmse_missing(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& filled,
                    const MaskMatrix& mask) {
    if (truth.rows() != filled.rows() || truth.cols() != filled.cols() ||
        truth.rows() != mask.rows() || truth.cols() != mask.cols())
        throw DimensionError("rmse_missing: shapes differ");

    double acc = 0.0;
    long count = 0;
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) {
            if (mask(i, j) == 0) {
                const double err = truth(i, j) - filled(i, j);
                acc += err * err;
                ++count;
            }
        }
    }
    if (count == 0) throw ConfigError("rmse_missing: no masked cells");
    return std::sqrt(acc / static_cast<double>(count));
}

}  // namespace clustfill
