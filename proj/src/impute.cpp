#include "clustfill/impute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clustfill/rng.hpp"

namespace clustfill {

namespace {

constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110;

struct MissingLayout {
    std::vector<int> instances;              // instances with at least one missing cell
    std::vector<std::vector<int>> cells;     // missing coordinates, indexed by instance
};

MissingLayout missing_layout(const MaskedDataset& ds) {
    MissingLayout layout;
    layout.cells.resize(static_cast<std::size_t>(ds.size()));
    for (Eigen::Index j = 0; j < ds.size(); ++j) {
        for (Eigen::Index i = 0; i < ds.dims(); ++i)
            if (ds.mask(i, j) == 0)
                layout.cells[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
        if (!layout.cells[static_cast<std::size_t>(j)].empty())
            layout.instances.push_back(static_cast<int>(j));
    }
    return layout;
}

void check_dataset(const MaskedDataset& ds) {
    if (ds.dims() == 0 || ds.size() == 0) throw DimensionError("imputer: empty dataset");
    if (ds.values.rows() != ds.mask.rows() || ds.values.cols() != ds.mask.cols())
        throw DimensionError("imputer: values and mask shapes differ");
}

void check_config(const ImputerConfig& cfg) {
    if (cfg.max_iter < 1) throw ConfigError("imputer: max_iter must be at least 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("imputer: tol must be positive");
    if (cfg.k_neighbors < 1) throw ConfigError("imputer: k_neighbors must be at least 1");
    if (cfg.nn_samples < 1) throw ConfigError("imputer: nn_samples must be at least 1");
    if (cfg.rank && *cfg.rank < 1) throw ConfigError("imputer: rank must be at least 1");
    if (cfg.sample_cap && *cfg.sample_cap < 1)
        throw ConfigError("imputer: sample_cap must be at least 1");
}

void note_fully_masked(const DistributionParams& params, ImputationResult& result) {
    const auto rows = fully_masked_rows(params);
    if (rows.empty()) return;
    std::ostringstream msg;
    msg << rows.size() << " feature(s) without observed values, filled with 0:";
    for (auto r : rows) msg << ' ' << r;
    result.diagnostics["fully_masked_features"] = msg.str();
}

Eigen::MatrixXd mean_filled(const MaskedDataset& ds, const DistributionParams& params,
                            const MissingLayout& layout) {
    Eigen::MatrixXd filled = ds.values;
    for (int j : layout.instances)
        for (int q : layout.cells[static_cast<std::size_t>(j)]) filled(q, j) = params.mean(q);
    return filled;
}

ImputationResult identity_result(const MaskedDataset& ds) {
    ImputationResult result;
    result.filled = ds.values;
    result.iterations = 1;
    result.converged = true;
    result.objective_trace = {0.0};
    return result;
}

}  // namespace

int resolved_rank(const ImputerConfig& cfg, Eigen::Index d, Eigen::Index n) {
    const int limit = static_cast<int>(std::min(d, n));
    const int rank = cfg.rank ? *cfg.rank : std::max(1, limit / 2);
    if (rank < 1 || rank > limit) {
        std::ostringstream msg;
        msg << "imputer: rank " << rank << " out of range for " << d << "x" << n << " data";
        throw ConfigError(msg.str());
    }
    return rank;
}

double root_select(std::pair<double, double> roots, double reference) {
    const double lo = std::min(roots.first, roots.second);
    const double hi = std::max(roots.first, roots.second);
    return std::abs(lo - reference) <= std::abs(hi - reference) ? lo : hi;
}

ImputationResult impute_mean(const MaskedDataset& ds) {
    check_dataset(ds);
    const MissingLayout layout = missing_layout(ds);
    const DistributionParams params = masked_mean_and_counts(ds);

    ImputationResult result;
    result.filled = mean_filled(ds, params, layout);
    result.iterations = 1;
    result.converged = true;
    result.objective_trace = {0.0};
    note_fully_masked(params, result);
    return result;
}

ImputationResult impute_nn(const MaskedDataset& ds, const ImputerConfig& cfg) {
    check_dataset(ds);
    check_config(cfg);
    const Eigen::Index n = ds.size();
    if (n < cfg.nn_samples + 1) {
        std::ostringstream msg;
        msg << "imputer: need at least " << cfg.nn_samples + 1 << " instances, have " << n;
        throw ConfigError(msg.str());
    }

    const MissingLayout layout = missing_layout(ds);
    if (layout.instances.empty()) return identity_result(ds);

    const DistributionParams params = masked_mean_and_counts(ds);
    ImputationResult result;
    result.filled = ds.values;
    Rng rng(cfg.seed);
    int fallbacks = 0;

    for (int j : layout.instances) {
        // distinct draws over the other n-1 instances
        std::vector<int> drawn = rng.sample_distinct(cfg.nn_samples, static_cast<int>(n) - 1);
        for (int& id : drawn)
            if (id >= j) ++id;
        for (int q : layout.cells[static_cast<std::size_t>(j)]) {
            double sum = 0.0;
            int count = 0;
            for (int nb : drawn) {
                if (ds.mask(q, nb) == 1) {
                    sum += ds.values(q, nb);
                    ++count;
                }
            }
            if (count > 0) {
                result.filled(q, j) = sum / count;
            } else {
                result.filled(q, j) = params.mean(q);
                ++fallbacks;
            }
        }
    }

    result.iterations = 1;
    result.converged = true;
    result.objective_trace = {0.0};
    if (fallbacks > 0)
        result.diagnostics["nn_mean_fallback"] = std::to_string(fallbacks) + " cell(s) had no valid neighbor";
    note_fully_masked(params, result);
    return result;
}

ImputationResult impute_pc(const MaskedDataset& ds, const ImputerConfig& cfg) {
    check_dataset(ds);
    check_config(cfg);
    const int rank = resolved_rank(cfg, ds.dims(), ds.size());

    const MissingLayout layout = missing_layout(ds);
    if (layout.instances.empty()) return identity_result(ds);

    const DistributionParams params = masked_mean_and_counts(ds);
    ImputationResult result;
    result.filled = mean_filled(ds, params, layout);
    note_fully_masked(params, result);

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const Eigen::VectorXd center = result.filled.rowwise().mean();
        const Eigen::MatrixXd centered = result.filled.colwise() - center;
        const Basis basis = top_r_basis(centered, rank);
        const Eigen::MatrixXd recon =
            (basis.columns * (basis.columns.transpose() * centered)).colwise() + center;

        result.objective_trace.push_back((result.filled - recon).squaredNorm());
        double change = 0.0;
        for (int j : layout.instances) {
            for (int q : layout.cells[static_cast<std::size_t>(j)]) {
                change = std::max(change, std::abs(recon(q, j) - result.filled(q, j)));
                result.filled(q, j) = recon(q, j);
            }
        }
        result.iterations = iter;
        if (change <= cfg.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

namespace {

double kernel_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Similarity sim) {
    if (sim == Similarity::Euclidean) return (a - b).squaredNorm();
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return 1.0 - a.dot(b) / (na * nb);
}

std::vector<int> nearest_neighbors(const Eigen::MatrixXd& filled, int instance, int k,
                                   Similarity sim) {
    const Eigen::Index n = filled.cols();
    std::vector<std::pair<double, int>> dist;
    dist.reserve(static_cast<std::size_t>(n) - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == instance) continue;
        dist.emplace_back(kernel_similarity(filled.col(instance), filled.col(j), sim),
                          static_cast<int>(j));
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<int> ids(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) ids[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(t)].second;
    return ids;
}

}  // namespace

double ivp_volume(const MaskedDataset& ds, int instance, std::span<const int> neighbors,
                  const ImputerConfig& cfg, bool* empty_overlap) {
    check_dataset(ds);
    if (instance < 0 || instance >= ds.size())
        throw DimensionError("ivp_volume: instance index out of range");
    if (static_cast<Eigen::Index>(neighbors.size()) > ds.size() - 1)
        throw ConfigError("ivp_volume: more neighbors than other instances");

    const MaskVector li = ds.mask.col(instance);
    double volume = 0.0;
    bool any_overlap = false;
    for (int j : neighbors) {
        if (j < 0 || j >= ds.size()) throw DimensionError("ivp_volume: neighbor index out of range");
        const MaskVector lj = ds.mask.col(j);
        if ((li.array() * lj.array()).sum() == 0) continue;
        any_overlap = true;
        const Eigen::VectorXd a = masked_hadamard(ds.values.col(instance), li, lj);
        const Eigen::VectorXd b = masked_hadamard(ds.values.col(j), lj, li);
        volume += kernel_similarity(a, b, cfg.similarity);
    }
    if (empty_overlap) *empty_overlap = !any_overlap && !neighbors.empty();
    return volume;
}

ImputationResult impute_ivp(const MaskedDataset& ds, const ImputerConfig& cfg) {
    check_dataset(ds);
    check_config(cfg);
    const Eigen::Index n = ds.size();
    const int k = cfg.k_neighbors;
    if (k > n - 1) {
        std::ostringstream msg;
        msg << "imputer: k_neighbors " << k << " exceeds other-instance count " << n - 1;
        throw ConfigError(msg.str());
    }

    const MissingLayout layout = missing_layout(ds);
    if (layout.instances.empty()) return identity_result(ds);

    const DistributionParams params = masked_mean_and_counts(ds);
    ImputationResult result;
    result.filled = mean_filled(ds, params, layout);
    note_fully_masked(params, result);

    const int total = static_cast<int>(layout.instances.size());
    const int cap = cfg.sample_cap ? std::min(*cfg.sample_cap, total) : total;
    Rng rng(cfg.seed);
    long negative_disc = 0;
    long empty_overlaps = 0;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        std::vector<int> visit;
        if (cap >= total) {
            visit = layout.instances;
        } else {
            std::vector<int> picks = rng.sample_distinct(cap, total);
            std::sort(picks.begin(), picks.end());
            visit.reserve(static_cast<std::size_t>(cap));
            for (int p : picks) visit.push_back(layout.instances[static_cast<std::size_t>(p)]);
        }

        double change = 0.0;
        double objective = 0.0;
        for (int i : visit) {
            const std::vector<int> neighbors = nearest_neighbors(result.filled, i, k, cfg.similarity);
            bool empty = false;
            const double volume = ivp_volume(ds, i, neighbors, cfg, &empty);
            if (empty) ++empty_overlaps;

            const auto& miss = layout.cells[static_cast<std::size_t>(i)];
            const double per_cell = volume / static_cast<double>(miss.size());
            for (int q : miss) {
                double sum = 0.0;
                double sum_sq = 0.0;
                for (int nb : neighbors) {
                    const double x = result.filled(q, nb);
                    sum += x;
                    sum_sq += x * x;
                }
                // k v^2 - 2 v sum + (sum_sq - per_cell) = 0
                const double disc = sum * sum - static_cast<double>(k) * (sum_sq - per_cell);
                double value;
                if (disc < 0.0) {
                    value = sum / static_cast<double>(k);  // vertex: nearest real point
                    ++negative_disc;
                } else {
                    const double root = std::sqrt(disc);
                    value = root_select({(sum - root) / k, (sum + root) / k}, result.filled(q, i));
                }
                const double old = result.filled(q, i);
                change = std::max(change, std::abs(value - old) / (1.0 + std::abs(old)));
                result.filled(q, i) = value;
            }

            double fulfilled_volume = 0.0;
            for (int nb : neighbors)
                fulfilled_volume +=
                    kernel_similarity(result.filled.col(i), result.filled.col(nb), cfg.similarity);
            objective += std::abs(fulfilled_volume - volume);
        }

        result.objective_trace.push_back(objective);
        result.iterations = iter;
        if (change <= cfg.tol) {
            result.converged = true;
            break;
        }
    }

    if (negative_disc > 0)
        result.diagnostics["ivp_negative_discriminant"] =
            std::to_string(negative_disc) + " quadratic(s) clamped to the vertex";
    if (empty_overlaps > 0)
        result.diagnostics["ivp_empty_overlap"] =
            std::to_string(empty_overlaps) + " volume(s) had no observed overlap";
    return result;
}

namespace {

// Mean and pooled variance of complete columns (a group of filled instances).
DistributionParams complete_params(const Eigen::MatrixXd& filled, const std::vector<int>& members) {
    DistributionParams p;
    p.mean = Eigen::VectorXd::Zero(filled.rows());
    for (int j : members) p.mean += filled.col(j);
    p.mean /= static_cast<double>(members.size());
    double acc = 0.0;
    for (int j : members) acc += (filled.col(j) - p.mean).squaredNorm();
    p.variance = std::max(acc / (static_cast<double>(members.size()) * filled.rows()), variance_floor());
    p.valid_count = Eigen::VectorXi::Constant(filled.rows(), static_cast<int>(members.size()));
    return p;
}

DistributionParams masked_params_of(const MaskedDataset& ds, const std::vector<int>& members) {
    DistributionParams p;
    const Eigen::Index d = ds.dims();
    p.mean = Eigen::VectorXd::Zero(d);
    p.valid_count = Eigen::VectorXi::Zero(d);
    double dev_acc = 0.0;
    Eigen::Index observed = 0;
    for (int j : members)
        for (Eigen::Index i = 0; i < d; ++i)
            if (ds.mask(i, j) == 1) {
                p.mean(i) += ds.values(i, j);
                ++p.valid_count(i);
            }
    for (Eigen::Index i = 0; i < d; ++i)
        if (p.valid_count(i) > 0) p.mean(i) /= p.valid_count(i);
    for (int j : members)
        for (Eigen::Index i = 0; i < d; ++i)
            if (ds.mask(i, j) == 1) {
                const double dev = ds.values(i, j) - p.mean(i);
                dev_acc += dev * dev;
                ++observed;
            }
    if (observed == 0) throw ConfigError("impute_bayes_align: a parameter group has no observed cells");
    p.variance = std::max(dev_acc / static_cast<double>(observed), variance_floor());
    return p;
}

}  // namespace

ImputationResult impute_bayes_align(const MaskedDataset& ds, const ImputerConfig& cfg,
                                    const Partition* partition) {
    check_dataset(ds);
    check_config(cfg);
    const Eigen::Index n = ds.size();
    const Eigen::Index d = ds.dims();

    const MissingLayout layout = missing_layout(ds);
    if (layout.instances.empty()) {
        ImputationResult result = identity_result(ds);
        return result;
    }

    // parameter groups: per cluster when recycling a partition, else global
    BayesAlignmentInfo info;
    std::vector<int> group_of(static_cast<std::size_t>(n), 0);
    const bool per_cluster = cfg.recycle_partitions && partition != nullptr &&
                             partition->labels.size() == static_cast<std::size_t>(n) &&
                             partition->num_clusters >= 1;
    if (per_cluster) {
        info.groups.resize(static_cast<std::size_t>(partition->num_clusters));
        for (Eigen::Index j = 0; j < n; ++j) {
            const int g = partition->labels[static_cast<std::size_t>(j)];
            info.groups[static_cast<std::size_t>(g)].members.push_back(static_cast<int>(j));
            group_of[static_cast<std::size_t>(j)] = g;
        }
    } else {
        info.groups.resize(1);
        info.groups[0].members.resize(static_cast<std::size_t>(n));
        std::iota(info.groups[0].members.begin(), info.groups[0].members.end(), 0);
    }

    ImputationResult result;
    const DistributionParams global_source = masked_mean_and_counts(ds);
    int degenerate_groups = 0;
    for (auto& group : info.groups) {
        if (group.members.empty()) {
            ++degenerate_groups;
            continue;
        }
        try {
            group.source = masked_params_of(ds, group.members);
        } catch (const ConfigError&) {
            // no observed cells in the cluster; fall back to the global fit
            DistributionParams fallback = global_source;
            fallback.variance = pooled_variance(ds, fallback.mean);
            group.source = std::move(fallback);
            ++degenerate_groups;
        }
    }
    if (degenerate_groups > 0)
        result.diagnostics["degenerate_groups"] =
            std::to_string(degenerate_groups) + " group(s) fell back to global parameters";

    info.log_density_target = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& src = info.groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(j)])].source;
        info.log_density_target(j) = log_gaussian_density(ds.values.col(j), ds.mask.col(j), src);
    }
    info.cell_target = Eigen::VectorXd::Zero(n);

    result.filled = mean_filled(ds, global_source, layout);
    note_fully_masked(global_source, result);

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        for (auto& group : info.groups)
            if (!group.members.empty()) group.filled = complete_params(result.filled, group.members);

        double change = 0.0;
        for (int i : layout.instances) {
            const auto& group = info.groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])];
            const DistributionParams& fit = group.filled;
            const double sigma = std::sqrt(fit.variance);

            const double budget =
                2.0 * fit.variance * tau(std::log(kSqrtTwoPi * sigma) + info.log_density_target(i));
            double observed_part = 0.0;
            for (Eigen::Index q = 0; q < d; ++q)
                if (ds.mask(q, i) == 1) {
                    const double dev = ds.values(q, i) - fit.mean(q);
                    observed_part += dev * dev;
                }

            const auto& miss = layout.cells[static_cast<std::size_t>(i)];
            const double per_cell = std::max(0.0, budget - observed_part) / miss.size();
            info.cell_target(i) = per_cell;
            // express the per-cell share as an aligned density target so the
            // scalar quadratic solves (v - mean_q)^2 = per_cell exactly
            const double log_target = -std::log(kSqrtTwoPi * sigma) - per_cell / (2.0 * fit.variance);

            for (int q : miss) {
                const auto roots = solve_alignment_quadratic_log(fit.mean(q), fit.variance, log_target);
                const double ref = iter == 1 ? fit.mean(q) : result.filled(q, i);
                const double value = root_select(roots, ref);
                change = std::max(change,
                                  std::abs(value - result.filled(q, i)) /
                                      (1.0 + std::abs(result.filled(q, i))));
                result.filled(q, i) = value;
            }
        }

        double alignment_gap = 0.0;
        for (int i : layout.instances) {
            const auto& group = info.groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])];
            const double sigma = std::sqrt(group.filled.variance);
            const double log_filled = -std::log(kSqrtTwoPi * sigma) -
                                      (result.filled.col(i) - group.filled.mean).squaredNorm() /
                                          (2.0 * group.filled.variance);
            alignment_gap += std::abs(std::exp(log_filled) - std::exp(info.log_density_target(i)));
        }
        result.objective_trace.push_back(alignment_gap);
        result.iterations = iter;
        if (change <= cfg.tol) {
            result.converged = true;
            break;
        }
    }

    for (const auto& group : info.groups) {
        if (group.members.empty()) continue;
        if (group.filled.variance <= variance_floor() * (1.0 + 1e-9) &&
            !result.objective_trace.empty() && result.objective_trace.back() > 1e-9) {
            result.converged = false;
            result.diagnostics["variance_floor"] =
                "filled variance at floor with unmet density target";
        }
    }

    result.bayes = std::move(info);
    return result;
}

ImputationResult impute(const MaskedDataset& ds, const ImputerConfig& cfg,
                        const Partition* partition) {
    switch (cfg.method) {
        case ImputeMethod::Mean: return impute_mean(ds);
        case ImputeMethod::NearestNeighbor: return impute_nn(ds, cfg);
        case ImputeMethod::PrincipalComponent: return impute_pc(ds, cfg);
        case ImputeMethod::InfoVolume: return impute_ivp(ds, cfg);
        case ImputeMethod::BayesAlign: return impute_bayes_align(ds, cfg, partition);
    }
    throw ConfigError("impute: unknown method");
}

}  // namespace clustfill
