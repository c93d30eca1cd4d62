#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "clustfill/core.hpp"
#include "clustfill/rng.hpp"

using namespace clustfill;

namespace {

MaskVector mask_of(std::initializer_list<int> bits) {
    MaskVector m(static_cast<Eigen::Index>(bits.size()));
    Eigen::Index i = 0;
    for (int b : bits) m(i++) = static_cast<std::uint8_t>(b);
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

MaskedDataset dataset(const Eigen::MatrixXd& values, const MaskMatrix& mask) {
    MaskedDataset ds;
    ds.values = values;
    ds.mask = mask;
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            if (mask(i, j) == 0) ds.values(i, j) = 0.0;
    return ds;
}

constexpr double kSqrtTwoPi = 2.5066282746310005;

}  // namespace

TEST_CASE("masked_hadamard restricts to the shared mask") {
    CHECK(masked_hadamard(vec({1, 2, 3}), mask_of({1, 1, 0}), mask_of({1, 0, 1})) == vec({1, 0, 0}));
    const Eigen::VectorXd x = vec({4.5, -1, 0.25});
    CHECK(masked_hadamard(x, mask_of({1, 1, 1}), mask_of({1, 1, 1})) == x);
    CHECK(masked_hadamard(vec({5, -2}), mask_of({0, 0}), mask_of({1, 1})) == vec({0, 0}));
    CHECK_THROWS_AS(masked_hadamard(vec({1, 2}), mask_of({1}), mask_of({1, 0})), DimensionError);
}

TEST_CASE("masked_hadamard is symmetric in its masks") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_index(8));
        Eigen::VectorXd x(d);
        MaskVector a(d), b(d);
        for (int i = 0; i < d; ++i) {
            x(i) = rng.normal();
            a(i) = static_cast<std::uint8_t>(rng.uniform_index(2));
            b(i) = static_cast<std::uint8_t>(rng.uniform_index(2));
        }
        CHECK(masked_hadamard(x, a, b) == masked_hadamard(x, b, a));
    }
}

TEST_CASE("validity_from_zeros flags nonzero cells") {
    Eigen::MatrixXd col(3, 1);
    col << 0, 5, -2;
    const MaskMatrix m = validity_from_zeros(col);
    CHECK(m(0, 0) == 0);
    CHECK(m(1, 0) == 1);
    CHECK(m(2, 0) == 1);

    CHECK((validity_from_zeros(Eigen::MatrixXd::Zero(3, 4)).array() == 0).all());
    CHECK((validity_from_zeros(Eigen::MatrixXd::Constant(3, 4, 2.5)).array() == 1).all());
}

TEST_CASE("masked_mean_and_counts averages observed cells per feature") {
    Eigen::MatrixXd values(1, 3);
    values << 1, 2, 3;
    MaskMatrix mask(1, 3);
    mask << 1, 0, 1;
    auto p = masked_mean_and_counts(dataset(values, mask));
    CHECK(p.mean(0) == doctest::Approx(2.0));
    CHECK(p.valid_count(0) == 2);

    auto full = masked_mean_and_counts(MaskedDataset::complete(Eigen::MatrixXd::Constant(1, 4, 4.0)));
    CHECK(full.mean(0) == doctest::Approx(4.0));
    CHECK(full.valid_count(0) == 4);

    auto empty = masked_mean_and_counts(dataset(values, MaskMatrix::Zero(1, 3)));
    CHECK(empty.mean(0) == 0.0);
    CHECK(empty.valid_count(0) == 0);
    CHECK(fully_masked_rows(empty) == std::vector<Eigen::Index>{0});
}

TEST_CASE("pooled_variance pools squared deviations over observed cells") {
    Eigen::MatrixXd row(1, 2);
    row << 1, 3;
    const MaskedDataset ds = MaskedDataset::complete(row);
    const auto p = masked_mean_and_counts(ds);
    CHECK(p.mean(0) == doctest::Approx(2.0));
    CHECK(pooled_variance(ds, p.mean) == doctest::Approx(1.0));

    const MaskedDataset constant = MaskedDataset::complete(Eigen::MatrixXd::Constant(2, 5, 7.0));
    CHECK(pooled_variance(constant, masked_mean_and_counts(constant).mean) == variance_floor());

    Eigen::MatrixXd wide(1, 2);
    wide << 0, 4;
    const MaskedDataset ds2 = MaskedDataset::complete(wide);
    CHECK(pooled_variance(ds2, masked_mean_and_counts(ds2).mean) == doctest::Approx(4.0));

    const MaskedDataset none = dataset(row, MaskMatrix::Zero(1, 2));
    CHECK_THROWS_AS(pooled_variance(none, Eigen::VectorXd::Zero(1)), ConfigError);
}

TEST_CASE("pooled_variance is never below the floor") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_index(5));
        const int n = 2 + static_cast<int>(rng.uniform_index(6));
        Eigen::MatrixXd values(d, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < d; ++i) values(i, j) = rng.normal() * 1e-9;
        const MaskedDataset ds = MaskedDataset::complete(values);
        CHECK(pooled_variance(ds, masked_mean_and_counts(ds).mean) >= variance_floor());
    }
}

TEST_CASE("gaussian_density evaluates the masked normal density") {
    DistributionParams p;
    p.mean = vec({1, -2, 3});
    p.variance = 1.0;

    // x equal to the masked mean: peak value 1/sqrt(2*pi)
    Eigen::VectorXd x = vec({1, 0, 3});
    const MaskVector l = mask_of({1, 0, 1});
    CHECK(gaussian_density(x, l, p) == doctest::Approx(0.39894).epsilon(1e-4));

    // masked squared distance 2 at sigma 1
    Eigen::VectorXd y = vec({2, 0, 4});
    CHECK(gaussian_density(y, l, p) == doctest::Approx(0.14676).epsilon(1e-4));

    // sigma = 2, distance 0
    DistributionParams wide = p;
    wide.variance = 4.0;
    CHECK(gaussian_density(x, l, wide) == doctest::Approx(0.19947).epsilon(1e-4));
}

TEST_CASE("gaussian_density stays within (0, peak]") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_index(6));
        DistributionParams p;
        p.mean = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < d; ++i) p.mean(i) = rng.normal() * 3;
        p.variance = std::max(variance_floor(), std::abs(rng.normal()) + 0.01);
        Eigen::VectorXd x(d);
        MaskVector l(d);
        for (int i = 0; i < d; ++i) {
            l(i) = static_cast<std::uint8_t>(rng.uniform_index(2));
            x(i) = l(i) == 1 ? rng.normal() * 5 : 0.0;
        }
        const double g = gaussian_density(x, l, p);
        CHECK(g > 0.0);
        CHECK(g <= 1.0 / (kSqrtTwoPi * std::sqrt(p.variance)) + 1e-15);
    }
}

TEST_CASE("tau is the absolute function") {
    CHECK(tau(-3.0) == 3.0);
    CHECK(tau(0.0) == 0.0);
    CHECK(tau(2.5) == 2.5);
}

TEST_CASE("solve_alignment_quadratic returns the aligned roots, low first") {
    // density at the peak: zero radical, both roots at the mean
    const double sigma = 1.7;
    const auto peak = solve_alignment_quadratic(0.5, sigma * sigma, 1.0 / (kSqrtTwoPi * sigma));
    CHECK(peak.first == doctest::Approx(0.5));
    CHECK(peak.second == doctest::Approx(0.5));

    // mean 2, variance 1, log term -2 -> roots 0 and 4
    const auto two = solve_alignment_quadratic(2.0, 1.0, std::exp(-2.0) / kSqrtTwoPi);
    CHECK(two.first == doctest::Approx(0.0));
    CHECK(two.second == doctest::Approx(4.0));

    // mean 0, variance 1, log term -0.5 -> roots -1 and 1
    const auto one = solve_alignment_quadratic(0.0, 1.0, std::exp(-0.5) / kSqrtTwoPi);
    CHECK(one.first == doctest::Approx(-1.0));
    CHECK(one.second == doctest::Approx(1.0));
}

TEST_CASE("alignment roots satisfy the clamped quadratic residual") {
    Rng rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const double mean = rng.normal() * 4;
        const double variance = std::abs(rng.normal()) + 0.05;
        const double target = std::exp(rng.normal());  // any positive density target
        const auto roots = solve_alignment_quadratic(mean, variance, target);
        const double radicand =
            2.0 * variance * tau(std::log(kSqrtTwoPi * std::sqrt(variance) * target));
        for (double v : {roots.first, roots.second}) {
            const double residual = (v - mean) * (v - mean) - radicand;
            CHECK(std::abs(residual) <= 1e-9 * std::max(1.0, std::abs(radicand)));
        }
    }
}

TEST_CASE("top_r_basis reconstructs matched-rank input") {
    Rng rng(17);
    Eigen::VectorXd u(6), v(40);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.normal();
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    const Eigen::MatrixXd rank1 = u * v.transpose();
    const Basis b1 = top_r_basis(rank1, 1);
    CHECK((rank1 - b1.columns * (b1.columns.transpose() * rank1)).norm() <= 1e-8);

    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
    const Basis be = top_r_basis(eye, 5);
    CHECK((eye - be.columns * (be.columns.transpose() * eye)).norm() <= 1e-8);

    Eigen::MatrixXd wide(10, 50);
    for (Eigen::Index j = 0; j < wide.cols(); ++j)
        for (Eigen::Index i = 0; i < wide.rows(); ++i) wide(i, j) = rng.normal();
    const Basis bf = top_r_basis(wide, 10);
    CHECK((wide - bf.columns * (bf.columns.transpose() * wide)).norm() <= 1e-6);

    CHECK_THROWS_AS(top_r_basis(wide, 0), DimensionError);
    CHECK_THROWS_AS(top_r_basis(wide, 11), DimensionError);
}

TEST_CASE("top_r_basis columns are orthonormal and residual shrinks with rank") {
    Rng rng(19);
    Eigen::MatrixXd data(8, 30);
    for (Eigen::Index j = 0; j < data.cols(); ++j)
        for (Eigen::Index i = 0; i < data.rows(); ++i) data(i, j) = rng.normal();

    double prev = std::numeric_limits<double>::infinity();
    for (int r = 1; r <= 8; ++r) {
        const Basis b = top_r_basis(data, r);
        const Eigen::MatrixXd gram = b.columns.transpose() * b.columns;
        CHECK((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-8);
        const double residual = (data - b.columns * (b.columns.transpose() * data)).norm();
        CHECK(residual <= prev + 1e-9);
        prev = residual;
    }
}

TEST_CASE("top_r_basis is deterministic") {
    Rng rng(23);
    Eigen::MatrixXd data(6, 20);
    for (Eigen::Index j = 0; j < data.cols(); ++j)
        for (Eigen::Index i = 0; i < data.rows(); ++i) data(i, j) = rng.normal();
    const Basis a = top_r_basis(data, 3);
    const Basis b = top_r_basis(data, 3);
    CHECK((a.columns.array() == b.columns.array()).all());
}

TEST_CASE("masked dataset invariants are enforced") {
    Eigen::MatrixXd values(2, 2);
    values << 1, 2, 3, 4;
    MaskMatrix mask(2, 2);
    mask << 1, 0, 1, 1;

    MaskedDataset bad;
    bad.values = values;
    bad.mask = mask;
    CHECK_THROWS_AS(bad.validate(), ConfigError);  // placeholder not zero

    MaskedDataset ok = dataset(values, mask);
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.missing_count() == 1);
    CHECK_FALSE(ok.is_complete());

    ok.truth = values;
    CHECK_NOTHROW(ok.validate());
    (*ok.truth)(0, 0) = 99;
    CHECK_THROWS_AS(ok.validate(), ConfigError);
}
