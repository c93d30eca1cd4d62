#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "clustfill/errors.hpp"

namespace clustfill {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

/// Feature-by-instance matrix with an explicit validity mask. Missing cells
/// hold the placeholder 0 in `values`; `mask` is 1 where a cell is observed.
/// `truth` (pre-mask values) and `labels` are carried when known.
struct MaskedDataset {
    Eigen::MatrixXd values;  // d x n, features x instances
    MaskMatrix mask;         // d x n, 1 = observed
    std::optional<Eigen::MatrixXd> truth;
    std::optional<std::vector<int>> labels;

    Eigen::Index dims() const { return values.rows(); }
    Eigen::Index size() const { return values.cols(); }
    bool is_complete() const;
    Eigen::Index missing_count() const;

    /// Throws when the mask/value invariants do not hold.
    void validate() const;

    static MaskedDataset complete(Eigen::MatrixXd data,
                                  std::optional<std::vector<int>> labels = std::nullopt);
};

/// Per-feature masked means and observation counts plus one pooled variance.
struct DistributionParams {
    Eigen::VectorXd mean;        // length d
    Eigen::VectorXi valid_count; // length d
    double variance = 0.0;       // pooled, floored at variance_floor() once fitted
};

/// Orthonormal column basis of a given rank.
struct Basis {
    Eigen::MatrixXd columns;  // d x rank
    int rank = 0;
};

constexpr double variance_floor() { return 1e-12; }

/// Elementwise x * li * lj: restricts x to the coordinates both masks observe.
Eigen::VectorXd masked_hadamard(const Eigen::VectorXd& x, const MaskVector& li,
                                const MaskVector& lj);

/// Derives a validity mask by treating exact zeros as missing. Only for
/// ingesting data without an explicit mask; destroys genuine zeros.
MaskMatrix validity_from_zeros(const Eigen::MatrixXd& values);

/// Per-feature mean over observed cells plus observation counts. Features with
/// no observed cell get mean 0 and count 0 (detect with fully_masked_rows).
DistributionParams masked_mean_and_counts(const MaskedDataset& ds);

std::vector<Eigen::Index> fully_masked_rows(const DistributionParams& params);

/// Pooled variance over all observed cells against the supplied per-feature
/// means, floored at variance_floor(). Throws ConfigError when nothing is
/// observed.
double pooled_variance(const MaskedDataset& ds, const Eigen::VectorXd& mean);

/// Isotropic Gaussian density of an instance restricted to its observed
/// coordinates: (1/(sqrt(2*pi)*sigma)) * exp(-dist2 / (2*sigma2)) where dist2
/// sums (x_q - mean_q)^2 over coordinates with mask 1.
double gaussian_density(const Eigen::VectorXd& x, const MaskVector& mask,
                        const DistributionParams& params);

/// log of gaussian_density; safe where the density itself underflows.
double log_gaussian_density(const Eigen::VectorXd& x, const MaskVector& mask,
                            const DistributionParams& params);

/// |x|, with tau(0) == 0. Clamps radicands of the alignment quadratic real.
inline double tau(double x) { return std::abs(x); }

/// Roots of (v - mean)^2 = 2*variance*tau(log(sqrt(2*pi)*sigma*density_target)),
/// low root first. `log_density_target` variant takes the log directly so
/// callers can stay in log space.
std::pair<double, double> solve_alignment_quadratic(double mean, double variance,
                                                    double density_target);
std::pair<double, double> solve_alignment_quadratic_log(double mean, double variance,
                                                        double log_density_target);

/// Leading rank-r orthonormal basis of the column space of X (caller centers),
/// minimizing the reconstruction residual ||X - B B^T X||. Power iteration with
/// deflation; deterministic (internal fixed seed).
Basis top_r_basis(const Eigen::MatrixXd& X, int rank);

}  // namespace clustfill
