#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "clustfill/metrics.hpp"
#include "metric_oracles.hpp"
#include "test_support.hpp"

using namespace clustfill;
using namespace testsupport;

TEST_CASE("nmi matches the pinned cases") {
    const std::vector<int> two = {0, 0, 1, 1};
    CHECK(nmi(two, two) == 1.0);
    CHECK(nmi({1, 1, 2, 2}, {1, 2, 1, 2}) == 0.0);  // independent contingency
    CHECK(nmi({3, 3, 3}, {5, 5, 5}) == 1.0);        // both entropies zero
    CHECK(nmi({1, 1, 2, 2}, {7, 7, 9, 9}) == 1.0);  // relabeling
    CHECK(nmi({1, 1, 1}, {1, 2, 3}) == 0.0);        // exactly one zero entropy
    CHECK_THROWS_AS(nmi({1, 2}, {1}), DimensionError);
    CHECK_THROWS_AS(nmi({}, {}), DimensionError);
}

TEST_CASE("rand_index matches the pinned cases") {
    const std::vector<int> part = {0, 1, 0, 2};
    CHECK(rand_index(part, part) == 1.0);
    CHECK(rand_index({1, 1, 2}, {1, 2, 2}) == doctest::Approx(1.0 / 3.0));
    CHECK(rand_index({1, 1, 1, 1}, {1, 2, 3, 4}) == 0.0);
    CHECK_THROWS_AS(rand_index({1}, {1}), ConfigError);
}

TEST_CASE("pairwise_f matches the pinned cases") {
    const std::vector<int> part = {0, 1, 0, 2};
    CHECK(pairwise_f(part, part) == 1.0);
    // truth pairs {(0,1),(2,3)}, prediction pairs within {0,1,2}:
    // precision 1/3, recall 1/2, harmonic mean 0.4
    CHECK(pairwise_f({1, 1, 2, 2}, {1, 1, 1, 2}) == doctest::Approx(0.4));
    CHECK(pairwise_f({1, 1, 2, 2}, {1, 2, 3, 4}) == 0.0);
    CHECK(pairwise_f({1, 2, 3}, {1, 1, 1}) == 0.0);
    CHECK(pairwise_f({1, 2, 3}, {4, 5, 6}) == 1.0);  // no same-pairs on either side
    CHECK_THROWS_AS(pairwise_f({1, 2}, {1}), DimensionError);
}

TEST_CASE("partition metrics are invariant under relabeling") {
    Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(10));
        std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
            b[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
        }
        // relabel: 0,1,2 -> 12,7,30 on one side
        const int map[3] = {12, 7, 30};
        std::vector<int> a2(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) a2[i] = map[a[i]];

        CHECK(nmi(a, b) == doctest::Approx(nmi(a2, b)).epsilon(1e-12));
        CHECK(rand_index(a, b) == doctest::Approx(rand_index(a2, b)).epsilon(1e-12));
        CHECK(pairwise_f(a, b) == doctest::Approx(pairwise_f(a2, b)).epsilon(1e-12));
    }
}

TEST_CASE("metrics agree with the brute-force oracles on all small partitions") {
    for (int n = 2; n <= 4; ++n) {
        std::vector<std::vector<int>> all;
        const int count = static_cast<int>(std::pow(3, n));
        for (int code = 0; code < count; ++code) {
            std::vector<int> labels(static_cast<std::size_t>(n));
            int c = code;
            for (int i = 0; i < n; ++i, c /= 3) labels[static_cast<std::size_t>(i)] = c % 3;
            all.push_back(std::move(labels));
        }
        for (const auto& a : all) {
            for (const auto& b : all) {
                CHECK(std::abs(nmi(a, b) - oracle::nmi(a, b)) <= 1e-12);
                CHECK(std::abs(rand_index(a, b) - oracle::rand_index(a, b)) <= 1e-12);
                CHECK(std::abs(pairwise_f(a, b) - oracle::pairwise_f(a, b)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("rmse_missing scores only masked cells") {
    Eigen::MatrixXd truth(2, 2);
    truth << 1, 2, 3, 4;
    MaskMatrix mask = MaskMatrix::Ones(2, 2);
    mask(0, 1) = 0;

    CHECK(rmse_missing(truth, truth, mask) == 0.0);

    Eigen::MatrixXd filled = truth;
    filled(0, 1) = 5.0;  // truth 2, filled 5
    CHECK(rmse_missing(truth, filled, mask) == doctest::Approx(3.0));
    filled(1, 0) = 99.0;  // observed cell: ignored
    CHECK(rmse_missing(truth, filled, mask) == doctest::Approx(3.0));

    mask(1, 1) = 0;
    filled = truth;
    filled(0, 1) = 5.0;
    filled(1, 1) = 8.0;  // errors 3 and 4
    CHECK(rmse_missing(truth, filled, mask) == doctest::Approx(std::sqrt(12.5)));

    CHECK_THROWS_AS(rmse_missing(truth, filled, MaskMatrix::Ones(2, 2)), ConfigError);
    CHECK_THROWS_AS(rmse_missing(truth, Eigen::MatrixXd::Zero(3, 2), mask), DimensionError);
}
