#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "somefs/matrix.hpp"

namespace somefs {

struct PartitionResult {
    Matrix centers;                       // p x D
    std::vector<std::size_t> assignments; // m, nearest-center index
    double inertia = 0.0;                 // sum of squared distances
};

struct DensityResult {
    std::vector<int> cluster_labels;       // per point; -1 = noise
    Matrix centers;                        // one row per non-noise cluster
    Matrix variances;                      // per-dimension, same shape
    std::vector<std::size_t> cluster_size; // member counts

    std::size_t num_clusters() const { return centers.rows(); }
};

/// Lloyd's algorithm with k-means++ seeding, 3 seeded restarts, keeping
/// the lowest inertia. Converged when no center moves more than 1e-6, or
/// after 300 iterations.
PartitionResult kmeans(const Matrix& X, std::size_t p, std::uint64_t seed);

/// Pick the cluster count in [p_min, p_max] maximizing the second
/// difference of the k-means inertia curve; ties go to the smallest p.
std::size_t elbow_select(const Matrix& X, std::size_t p_min, std::size_t p_max,
                         std::uint64_t seed);

/// Classic density-reachability clustering under Euclidean distance.
/// Cluster ids follow point order, noise is -1. Per-cluster centers and
/// per-dimension variances are the member means/population variances.
DensityResult dbscan(const Matrix& X, double eps, std::size_t min_pts);

/// Median of k-th nearest-neighbor distances; callers should floor the
/// result (identical points give 0).
double auto_eps(const Matrix& X, std::size_t k = 4);

}  // namespace somefs
