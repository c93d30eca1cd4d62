#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clustfill/cluster.hpp"
#include "clustfill/core.hpp"

namespace clustfill {

enum class ImputeMethod { Mean, NearestNeighbor, PrincipalComponent, InfoVolume, BayesAlign };

enum class Similarity { Euclidean, Cosine };

struct ImputerConfig {
    ImputeMethod method = ImputeMethod::Mean;
    int max_iter = 50;
    double tol = 1e-6;                 // relative per-cell change
    int k_neighbors = 5;               // info-volume neighbor count
    int nn_samples = 3;                // random neighbors averaged by the NN imputer
    std::optional<int> rank;           // principal-component rank; default min(d,n)/2, at least 1
    std::optional<int> sample_cap;     // info-volume instances revisited per iteration; default all
    std::uint64_t seed = 0;
    bool recycle_partitions = false;   // Bayes: fit per-cluster parameters from a partition
    Similarity similarity = Similarity::Euclidean;
};

/// Final distribution snapshot of a Bayes-alignment run, enough to verify the
/// alignment equation each filled cell solved. With recycled partitions there
/// is one group per cluster, otherwise a single global group.
struct BayesAlignmentInfo {
    struct Group {
        DistributionParams source;  // fitted on the observed cells
        DistributionParams filled;  // parameters used for the final fill pass
        std::vector<int> members;   // instance indices
    };
    std::vector<Group> groups;
    Eigen::VectorXd log_density_target;  // per instance, under its group's source params
    Eigen::VectorXd cell_target;         // per instance: final (v - mean_q)^2 target per missing cell
};

struct ImputationResult {
    Eigen::MatrixXd filled;  // d x n, observed cells bit-identical to the input
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    std::map<std::string, std::string> diagnostics;
    std::optional<BayesAlignmentInfo> bayes;
};

/// Fills every missing cell with its feature's observed mean. Single pass.
ImputationResult impute_mean(const MaskedDataset& ds);

/// Fills each missing cell with the average of `nn_samples` randomly drawn
/// other instances' values at that cell, skipping neighbors missing there;
/// falls back to the feature mean when no drawn neighbor has the cell.
ImputationResult impute_nn(const MaskedDataset& ds, const ImputerConfig& cfg);

/// Iterates mean-fill -> center -> rank-r basis -> reconstruct, overwriting
/// only missing cells, until the largest absolute change is below tol.
ImputationResult impute_pc(const MaskedDataset& ds, const ImputerConfig& cfg);

/// Summed kernel similarity between instance `i` and the given neighbors over
/// their mutually observed coordinates. `empty_overlap` (optional) is set when
/// every neighbor shares no observed coordinate with `i`.
double ivp_volume(const MaskedDataset& ds, int instance, std::span<const int> neighbors,
                  const ImputerConfig& cfg, bool* empty_overlap = nullptr);

/// Information-volume-preserving imputation: per instance, keeps the summed
/// kernel distance to its current nearest neighbors equal to the volume
/// measured on the observed overlap, solving one quadratic per missing cell.
ImputationResult impute_ivp(const MaskedDataset& ds, const ImputerConfig& cfg);

/// Bayes-alignment imputation: matches each filled instance's Gaussian density
/// under the filled-data parameters to the incomplete instance's density under
/// the observed-data parameters. The deviation budget this implies for the
/// whole instance, less the part already contributed by its observed
/// coordinates, is split evenly across the missing coordinates; each cell then
/// solves the scalar alignment quadratic. A negative remainder means the
/// equation has no real solution and the cells take the degenerate root (the
/// feature mean). With `cfg.recycle_partitions` and a partition, parameters
/// are fitted per cluster.
ImputationResult impute_bayes_align(const MaskedDataset& ds, const ImputerConfig& cfg,
                                    const Partition* partition = nullptr);

/// The root nearest to `reference`; ties take the lower root.
double root_select(std::pair<double, double> roots, double reference);

/// Dispatch on cfg.method.
ImputationResult impute(const MaskedDataset& ds, const ImputerConfig& cfg,
                        const Partition* partition = nullptr);

/// Rank actually used by impute_pc for a d x n dataset.
int resolved_rank(const ImputerConfig& cfg, Eigen::Index d, Eigen::Index n);

}  // namespace clustfill
