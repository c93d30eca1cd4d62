#include "clustfill/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "clustfill/rng.hpp"

namespace clustfill {

namespace {

constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110;
constexpr double kPowerTol = 1e-10;
constexpr int kMaxPowerSweeps = 1000;
constexpr std::uint64_t kBasisSeed = 0x0fb1a5c0de5eedULL;

}  // namespace

bool MaskedDataset::is_complete() const {
    return mask.size() == 0 || (mask.array() == 1).all();
}

Eigen::Index MaskedDataset::missing_count() const {
    return mask.size() - (mask.cast<Eigen::Index>().array() == 1).count();
}

void MaskedDataset::validate() const {
    if (values.rows() != mask.rows() || values.cols() != mask.cols())
        throw DimensionError("masked dataset: values and mask shapes differ");
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) {
            const auto m = mask(i, j);
            if (m != 0 && m != 1) throw ConfigError("masked dataset: mask entries must be 0 or 1");
            if (m == 0 && values(i, j) != 0.0)
                throw ConfigError("masked dataset: missing cells must hold placeholder 0");
        }
    }
    if (truth) {
        if (truth->rows() != values.rows() || truth->cols() != values.cols())
            throw DimensionError("masked dataset: truth shape differs");
        for (Eigen::Index j = 0; j < mask.cols(); ++j)
            for (Eigen::Index i = 0; i < mask.rows(); ++i)
                if (mask(i, j) == 1 && values(i, j) != (*truth)(i, j))
                    throw ConfigError("masked dataset: values disagree with truth on an observed cell");
    }
    if (labels && static_cast<Eigen::Index>(labels->size()) != values.cols())
        throw DimensionError("masked dataset: label count differs from instance count");
}

MaskedDataset MaskedDataset::complete(Eigen::MatrixXd data, std::optional<std::vector<int>> labels) {
    MaskedDataset ds;
    ds.mask = MaskMatrix::Ones(data.rows(), data.cols());
    ds.values = std::move(data);
    ds.labels = std::move(labels);
    return ds;
}

Eigen::VectorXd masked_hadamard(const Eigen::VectorXd& x, const MaskVector& li,
                                const MaskVector& lj) {
    if (x.size() != li.size() || x.size() != lj.size())
        throw DimensionError("masked_hadamard: vector lengths differ");
    return x.array() * li.cast<double>().array() * lj.cast<double>().array();
}

MaskMatrix validity_from_zeros(const Eigen::MatrixXd& values) {
    return (values.array() != 0.0).cast<std::uint8_t>();
}

DistributionParams masked_mean_and_counts(const MaskedDataset& ds) {
    const Eigen::Index d = ds.dims();
    DistributionParams p;
    p.mean = Eigen::VectorXd::Zero(d);
    p.valid_count = Eigen::VectorXi::Zero(d);
    const Eigen::ArrayXXd m = ds.mask.cast<double>().array();
    const Eigen::VectorXd sums = (ds.values.array() * m).rowwise().sum();
    const Eigen::VectorXd counts = m.rowwise().sum();
    for (Eigen::Index i = 0; i < d; ++i) {
        p.valid_count(i) = static_cast<int>(counts(i));
        if (counts(i) > 0.0) p.mean(i) = sums(i) / counts(i);
    }
    return p;
}

std::vector<Eigen::Index> fully_masked_rows(const DistributionParams& params) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < params.valid_count.size(); ++i)
        if (params.valid_count(i) == 0) rows.push_back(i);
    return rows;
}

double pooled_variance(const MaskedDataset& ds, const Eigen::VectorXd& mean) {
    if (mean.size() != ds.dims())
        throw DimensionError("pooled_variance: mean length differs from feature count");
    double acc = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index j = 0; j < ds.size(); ++j) {
        for (Eigen::Index i = 0; i < ds.dims(); ++i) {
            if (ds.mask(i, j) == 1) {
                const double dev = ds.values(i, j) - mean(i);
                acc += dev * dev;
                ++count;
            }
        }
    }
    if (count == 0) throw ConfigError("pooled_variance: no observed cells");
    return std::max(acc / static_cast<double>(count), variance_floor());
}

double log_gaussian_density(const Eigen::VectorXd& x, const MaskVector& mask,
                            const DistributionParams& params) {
    if (x.size() != mask.size() || x.size() != params.mean.size())
        throw DimensionError("gaussian_density: operand lengths differ");
    double dist2 = 0.0;
    for (Eigen::Index q = 0; q < x.size(); ++q) {
        if (mask(q) == 1) {
            const double dev = x(q) - params.mean(q);
            dist2 += dev * dev;
        }
    }
    const double sigma = std::sqrt(params.variance);
    return -std::log(kSqrtTwoPi * sigma) - dist2 / (2.0 * params.variance);
}

double gaussian_density(const Eigen::VectorXd& x, const MaskVector& mask,
                        const DistributionParams& params) {
    const double value = std::exp(log_gaussian_density(x, mask, params));
    return std::max(value, std::numeric_limits<double>::min());
}

std::pair<double, double> solve_alignment_quadratic_log(double mean, double variance,
                                                        double log_density_target) {
    const double sigma = std::sqrt(variance);
    const double log_term = std::log(kSqrtTwoPi * sigma) + log_density_target;
    const double radical = std::sqrt(2.0 * variance * tau(log_term));
    return {mean - radical, mean + radical};
}

std::pair<double, double> solve_alignment_quadratic(double mean, double variance,
                                                    double density_target) {
    return solve_alignment_quadratic_log(mean, variance, std::log(density_target));
}

namespace {

// Deterministic unit vector orthogonal to the first `k` columns of B, built
// from canonical directions. Used when power iteration lands in the null
// space; any orthonormal completion reconstructs equally well there.
Eigen::VectorXd orthonormal_fallback(const Eigen::MatrixXd& basis, int k, Eigen::Index d) {
    for (Eigen::Index start = 0; start < d; ++start) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(d, (static_cast<Eigen::Index>(k) + start) % d);
        for (int c = 0; c < k; ++c) v -= basis.col(c).dot(v) * basis.col(c);
        const double norm = v.norm();
        if (norm > 1e-6) return v / norm;
    }
    throw NumericError("top_r_basis: could not complete orthonormal basis");
}

}  // namespace

Basis top_r_basis(const Eigen::MatrixXd& X, int rank) {
    const Eigen::Index d = X.rows();
    const Eigen::Index n = X.cols();
    if (rank < 1 || rank > std::min(d, n)) {
        std::ostringstream msg;
        msg << "top_r_basis: rank " << rank << " out of range for " << d << "x" << n << " input";
        throw DimensionError(msg.str());
    }

    Eigen::MatrixXd basis(d, rank);
    for (int k = 0; k < rank; ++k) {
        Rng rng(seed_mix(kBasisSeed, static_cast<std::uint64_t>(k)));
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
        for (int c = 0; c < k; ++c) v -= basis.col(c).dot(v) * basis.col(c);
        if (v.norm() < 1e-12)
            v = orthonormal_fallback(basis, k, d);
        else
            v.normalize();

        for (int sweep = 0; sweep < kMaxPowerSweeps; ++sweep) {
            Eigen::VectorXd w = X * (X.transpose() * v);
            // deflate against already-extracted components
            for (int c = 0; c < k; ++c) w -= basis.col(c).dot(w) * basis.col(c);
            const double norm = w.norm();
            if (norm < 1e-280) {
                v = orthonormal_fallback(basis, k, d);
                break;
            }
            w /= norm;
            if (w.dot(v) < 0.0) w = -w;
            const double delta = (w - v).norm();
            v = w;
            if (delta <= kPowerTol) break;
        }
        basis.col(k) = v;
    }

    // final re-orthonormalization pass keeps B^T B = I tight
    for (int k = 0; k < rank; ++k) {
        for (int c = 0; c < k; ++c) basis.col(k) -= basis.col(c).dot(basis.col(k)) * basis.col(c);
        const double norm = basis.col(k).norm();
        basis.col(k) = norm > 1e-12 ? Eigen::VectorXd(basis.col(k) / norm)
                                    : orthonormal_fallback(basis, k, d);
    }
    return Basis{std::move(basis), rank};
}

}  // namespace clustfill
