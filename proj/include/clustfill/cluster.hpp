#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "clustfill/errors.hpp"

namespace clustfill {

/// Hard assignment of instances to clusters plus the cluster means.
struct Partition {
    std::vector<int> labels;        // length n, values in [0, num_clusters)
    Eigen::MatrixXd centroids;      // d x num_clusters
    int num_clusters = 0;
    double inertia = 0.0;           // sum of squared distances to assigned centroid
    std::vector<double> inertia_trace;  // per Lloyd iteration
};

/// Self-expressive coefficient matrix: column j holds the weights that
/// reconstruct instance j from all instances, constrained to the simplex.
struct CoefficientMatrix {
    Eigen::MatrixXd weights;  // n x n
    double gamma = 0.0;
    std::vector<double> objective_trace;
    bool converged = false;
};

/// Lloyd k-means over column instances. Initial centroids are `num_clusters`
/// distinct instances drawn with the given seed; empty clusters are reseeded
/// to the instance currently farthest from its centroid.
Partition kmeans(const Eigen::MatrixXd& data, int num_clusters, std::uint64_t seed,
                 int max_iter = 300, double tol = 1e-7);

/// Euclidean projection onto { z : sum z = 1, 0 <= z <= 1 }.
Eigen::VectorXd simplex_project(const Eigen::VectorXd& v);

/// Minimizes 0.5*||X - X*Z||^2 + gamma*||Z||^2 with each column of Z on the
/// simplex, by projected gradient descent with a diminishing step.
CoefficientMatrix solve_sec(const Eigen::MatrixXd& data, double gamma,
                            int max_iter = 500, double tol = 1e-6);

/// Self-expressive clustering: coefficient matrix -> symmetrized affinity ->
/// normalized spectral embedding -> k-means on the embedding. Centroids and
/// inertia of the returned partition are recomputed in the original space.
Partition sec_cluster(const Eigen::MatrixXd& data, int num_clusters, double gamma,
                      std::uint64_t seed);

}  // namespace clustfill
