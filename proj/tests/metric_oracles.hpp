#pragma once

// Direct-from-definition partition metrics, independent of the library
// implementations. Deliberately naive: explicit O(n^2) pair enumeration and
// map-based distributions.

#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    long agree = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            const bool same_a = a[i] == a[j];
            const bool same_b = b[i] == b[j];
            if (same_a == same_b) ++agree;
        }
    return static_cast<double>(agree) / static_cast<double>(total);
}

inline double pairwise_f(const std::vector<int>& truth, const std::vector<int>& pred) {
    const std::size_t n = truth.size();
    long same_truth = 0, same_pred = 0, shared = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool st = truth[i] == truth[j];
            const bool sp = pred[i] == pred[j];
            same_truth += st;
            same_pred += sp;
            shared += st && sp;
        }
    if (same_truth == 0 && same_pred == 0) return 1.0;
    if (same_truth == 0 || same_pred == 0) return 0.0;
    const double precision = static_cast<double>(shared) / static_cast<double>(same_pred);
    const double recall = static_cast<double>(shared) / static_cast<double>(same_truth);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0 / n;
        pb[b[i]] += 1.0 / n;
        pab[{a[i], b[i]}] += 1.0 / n;
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [label, p] : pa) ha -= p * std::log(p);
    for (const auto& [label, p] : pb) hb -= p * std::log(p);
    for (const auto& [key, p] : pab) mi += p * std::log(p / (pa[key.first] * pb[key.second]));
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    return mi / std::sqrt(ha * hb);
}

/// All canonical label vectors of length n over at most max_labels clusters
/// (first occurrence gets the lowest unused label). Canonical forms cover all
/// partitions; the metrics are relabeling-invariant.
inline std::vector<std::vector<int>> canonical_partitions(int n, int max_labels) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(static_cast<std::size_t>(n), 0);
    const auto walk = [&](auto&& self, int pos, int used) -> void {
        if (pos == n) {
            out.push_back(current);
            return;
        }
        const int limit = std::min(used + 1, max_labels);
        for (int label = 0; label < limit; ++label) {
            current[static_cast<std::size_t>(pos)] = label;
            self(self, pos + 1, std::max(used, label + 1));
        }
    };
    walk(walk, 0, 0);
    return out;
}

}  // namespace oracle
