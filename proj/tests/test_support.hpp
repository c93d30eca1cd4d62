#pragma once

// Shared builders for the test suites.

#include <Eigen/Dense>
#include <initializer_list>
#include <vector>

#include "clustfill/core.hpp"
#include "clustfill/rng.hpp"

namespace testsupport {

inline clustfill::MaskedDataset dataset(const Eigen::MatrixXd& values,
                                        const clustfill::MaskMatrix& mask) {
    clustfill::MaskedDataset ds;
    ds.values = values;
    ds.mask = mask;
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            if (mask(i, j) == 0) ds.values(i, j) = 0.0;
    return ds;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
    clustfill::Rng rng(seed);
    Eigen::MatrixXd m(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) m(i, j) = rng.normal();
    return m;
}

/// Random dataset with roughly `fraction` of cells masked (never a full row
/// or column for small fractions); truth kept.
inline clustfill::MaskedDataset random_masked(Eigen::Index d, Eigen::Index n, double fraction,
                                              std::uint64_t seed) {
    clustfill::Rng rng(seed);
    clustfill::MaskedDataset ds;
    ds.values = random_matrix(d, n, seed ^ 0x5a5a5a5aULL);
    ds.truth = ds.values;
    ds.mask = clustfill::MaskMatrix::Ones(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            if (rng.uniform() < fraction) {
                ds.mask(i, j) = 0;
                ds.values(i, j) = 0.0;
            }
    return ds;
}

inline bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

/// True when filled agrees with the dataset's values on every observed cell.
inline bool preserves_observed(const clustfill::MaskedDataset& ds, const Eigen::MatrixXd& filled) {
    for (Eigen::Index j = 0; j < ds.mask.cols(); ++j)
        for (Eigen::Index i = 0; i < ds.mask.rows(); ++i)
            if (ds.mask(i, j) == 1 && filled(i, j) != ds.values(i, j)) return false;
    return true;
}

}  // namespace testsupport
