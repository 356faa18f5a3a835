#pragma once

#include "codesum/embed.hpp"
#include "codesum/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace codesum {

class ClusterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// |a - b|_2. Throws ClusterError on mismatched dimensions.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    int max_iter = 300;
    double tol = 1e-4;  // Frobenius norm of the centroid shift
    int restarts = 10;
};

struct ClusteringResult {
    std::vector<std::size_t> assignments;
    Matrix centroids;  // k x dim, each the mean of its members
    double inertia = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;  // seed of the winning restart
    // Objective after each assignment step of the winning restart; non-increasing.
    std::vector<double> inertia_history;
};

// Sum of squared distances of points to their assigned centroid.
double inertia(ConstMatrixView points, std::span<const std::size_t> assignments, ConstMatrixView centroids);

/// One Lloyd run from k-means++ seeding. Empty clusters take the point
/// farthest from its centroid; ties in the nearest centroid go to the lowest index.
ClusteringResult kmeans_single(ConstMatrixView points, std::size_t k, std::uint64_t seed, int max_iter, double tol);

/// Best (lowest inertia) of `options.restarts` seeded runs; earliest wins ties.
ClusteringResult kmeans(ConstMatrixView points, const KMeansOptions& options);
ClusteringResult kmeans(const EmbeddingSet& embeddings, const KMeansOptions& options);

// Line-delimited {"id","cluster"} plus centroids.f32 next to it.
void write_clustering(const ClusteringResult& result, std::span<const std::string> ids,
                      const std::filesystem::path& assignments_path, const std::filesystem::path& centroids_path);

}  // namespace codesum
