#include "clustfill/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "clustfill/core.hpp"
#include "clustfill/rng.hpp"

namespace clustfill {

namespace {

void recompute_centroids(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                         Eigen::MatrixXd& centroids) {
    const int c = static_cast<int>(centroids.cols());
    centroids.setZero();
    std::vector<int> counts(static_cast<std::size_t>(c), 0);
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
        centroids.col(labels[static_cast<std::size_t>(i)]) += data.col(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < c; ++j)
        if (counts[static_cast<std::size_t>(j)] > 0)
            centroids.col(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
}

double assignment_inertia(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                          const Eigen::MatrixXd& centroids) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.cols(); ++i)
        acc += (data.col(i) - centroids.col(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return acc;
}

}  // namespace

Partition kmeans(const Eigen::MatrixXd& data, int num_clusters, std::uint64_t seed,
                 int max_iter, double tol) {
    const Eigen::Index n = data.cols();
    if (n == 0 || data.rows() == 0) throw DimensionError("kmeans: empty input");
    if (num_clusters < 1 || num_clusters > n) {
        std::ostringstream msg;
        msg << "kmeans: cluster count " << num_clusters << " out of range for n=" << n;
        throw ConfigError(msg.str());
    }
    if (max_iter < 1 || tol <= 0.0) throw ConfigError("kmeans: max_iter and tol must be positive");

    Rng rng(seed);
    const std::vector<int> init = rng.sample_distinct(num_clusters, static_cast<int>(n));
    Eigen::MatrixXd centroids(data.rows(), num_clusters);
    for (int j = 0; j < num_clusters; ++j) centroids.col(j) = data.col(init[static_cast<std::size_t>(j)]);

    Partition part;
    part.num_clusters = num_clusters;
    part.labels.assign(static_cast<std::size_t>(n), 0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = (data.col(i) - centroids.col(0)).squaredNorm();
            for (int j = 1; j < num_clusters; ++j) {
                const double dist = (data.col(i) - centroids.col(j)).squaredNorm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = j;
                }
            }
            if (part.labels[static_cast<std::size_t>(i)] != best) {
                part.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        // reseed empty clusters before measuring the iteration
        std::vector<int> counts(static_cast<std::size_t>(num_clusters), 0);
        for (int lbl : part.labels) ++counts[static_cast<std::size_t>(lbl)];
        for (int j = 0; j < num_clusters; ++j) {
            if (counts[static_cast<std::size_t>(j)] != 0) continue;
            Eigen::Index farthest = -1;
            double far_dist = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int owner = part.labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(owner)] <= 1) continue;  // keep donors non-empty
                const double dist = (data.col(i) - centroids.col(owner)).squaredNorm();
                if (dist > far_dist) {
                    far_dist = dist;
                    farthest = i;
                }
            }
            if (farthest < 0) continue;
            --counts[static_cast<std::size_t>(part.labels[static_cast<std::size_t>(farthest)])];
            part.labels[static_cast<std::size_t>(farthest)] = j;
            ++counts[static_cast<std::size_t>(j)];
            centroids.col(j) = data.col(farthest);
            changed = true;
        }

        const double inertia = assignment_inertia(data, part.labels, centroids);
        part.inertia_trace.push_back(inertia);
        recompute_centroids(data, part.labels, centroids);

        const bool settled = !changed ||
            (std::isfinite(prev_inertia) &&
             std::abs(prev_inertia - inertia) <= tol * std::max(std::abs(prev_inertia), 1e-30));
        prev_inertia = inertia;
        if (settled) break;
    }

    part.centroids = centroids;  // means of the final assignment
    part.inertia = assignment_inertia(data, part.labels, centroids);
    return part;
}

Eigen::VectorXd simplex_project(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw DimensionError("simplex_project: empty vector");
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - candidate > 0.0) shift = candidate;
    }
    return (v.array() - shift).max(0.0);
}

namespace {

double sec_objective(const Eigen::MatrixXd& data, const Eigen::MatrixXd& weights, double gamma) {
    return 0.5 * (data - data * weights).squaredNorm() + gamma * weights.squaredNorm();
}

// Rigorous upper bound on the spectral norm of a symmetric matrix:
// min(Frobenius norm, max absolute row sum). Keeps the projected-gradient
// step below 1/L so the objective cannot increase.
double spectral_norm_bound(const Eigen::MatrixXd& sym) {
    const double frob = sym.norm();
    const double row_sum = sym.cwiseAbs().rowwise().sum().maxCoeff();
    return std::min(frob, row_sum);
}

}  // namespace

CoefficientMatrix solve_sec(const Eigen::MatrixXd& data, double gamma, int max_iter, double tol) {
    const Eigen::Index n = data.cols();
    if (n == 0 || data.rows() == 0) throw DimensionError("solve_sec: empty input");
    if (gamma <= 0.0) throw ConfigError("solve_sec: gamma must be positive");
    if (max_iter < 1 || tol <= 0.0) throw ConfigError("solve_sec: max_iter and tol must be positive");

    CoefficientMatrix result;
    result.gamma = gamma;
    result.weights = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));

    const Eigen::MatrixXd gram = data.transpose() * data;
    const double lipschitz = spectral_norm_bound(gram) + 2.0 * gamma;

    double objective = sec_objective(data, result.weights, gamma);
    result.objective_trace.push_back(objective);
    if (!std::isfinite(objective))
        throw NumericError("solve_sec: non-finite objective at initialization");

    if (n == 1) {  // the simplex pins Z = [1]
        result.converged = true;
        return result;
    }

    for (int iter = 0; iter < max_iter; ++iter) {
        const double step = 1.0 / (lipschitz * (1.0 + 0.02 * static_cast<double>(iter)));
        Eigen::MatrixXd gradient = gram * result.weights - gram + 2.0 * gamma * result.weights;
        result.weights -= step * gradient;
        for (Eigen::Index j = 0; j < n; ++j)
            result.weights.col(j) = simplex_project(result.weights.col(j));

        const double next = sec_objective(data, result.weights, gamma);
        result.objective_trace.push_back(next);
        if (!std::isfinite(next)) {
            std::ostringstream msg;
            msg << "solve_sec: non-finite objective at iteration " << iter + 1
                << " (previous " << objective << ")";
            throw NumericError(msg.str());
        }
        if (std::abs(objective - next) <= tol * std::max(1.0, std::abs(objective))) {
            result.converged = true;
            break;
        }
        objective = next;
    }
    return result;
}

Partition sec_cluster(const Eigen::MatrixXd& data, int num_clusters, double gamma,
                      std::uint64_t seed) {
    const Eigen::Index n = data.cols();
    if (num_clusters < 1 || num_clusters > n)
        throw ConfigError("sec_cluster: cluster count out of range");

    const CoefficientMatrix coeff = solve_sec(data, gamma);
    Eigen::MatrixXd affinity = 0.5 * (coeff.weights + coeff.weights.transpose());

    // symmetric normalization D^-1/2 W D^-1/2; row sums are >= 1/2 because
    // every column of Z sums to 1
    const Eigen::VectorXd scale = affinity.rowwise().sum().array().sqrt().inverse().matrix();
    affinity = scale.asDiagonal() * affinity * scale.asDiagonal();

    const Basis embedding = top_r_basis(affinity, num_clusters);
    const Eigen::MatrixXd points = embedding.columns.transpose();  // c x n, instances as columns

    Partition part = kmeans(points, num_clusters, seed);

    part.centroids = Eigen::MatrixXd::Zero(data.rows(), num_clusters);
    recompute_centroids(data, part.labels, part.centroids);
    part.inertia = assignment_inertia(data, part.labels, part.centroids);
    return part;
}

}  // namespace clustfill
