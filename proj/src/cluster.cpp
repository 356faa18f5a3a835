#include "codesum/cluster.hpp"

#include "codesum/kernels.hpp"
#include "codesum/rng.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace codesum {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ClusterError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

double inertia(ConstMatrixView points, std::span<const std::size_t> assignments, ConstMatrixView centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows; ++i) {
        const double d = euclidean_distance(points.row(i), centroids.row(assignments[i]));
        total += d * d;
    }
    return total;
}

namespace {

double squared(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

Matrix kmeanspp_seed(ConstMatrixView points, std::size_t k, SplitMix64& rng) {
    const std::size_t n = points.rows;
    Matrix centroids(k, points.cols);
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t pick = rng.below(n);
    for (std::size_t c = 0;; ++c) {
        chosen[pick] = true;
        const auto src = points.row(pick);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
        if (c + 1 == k) {
            break;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared(points.row(i), src));
            total += d2[i];
        }
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) {
                    continue;
                }
                acc += d2[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // r landed in the rounding slack at the very end
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Every point coincides with a chosen centre; take the next unchosen index.
            pick = 0;
            while (chosen[pick]) {
                ++pick;
            }
        }
    }
    return centroids;
}

// Gives each empty cluster the point currently farthest from its centroid,
// taken from clusters that keep at least one member.
void repair_empty(ConstMatrixView points, Matrix& centroids, std::vector<std::size_t>& assign,
                  std::vector<double>& d2) {
    const std::size_t k = centroids.rows();
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assign) {
        ++counts[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) {
            continue;
        }
        std::size_t far = points.rows;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < points.rows; ++i) {
            if (counts[assign[i]] > 1 && d2[i] > far_d2) {
                far_d2 = d2[i];
                far = i;
            }
        }
        --counts[assign[far]];
        assign[far] = c;
        ++counts[c];
        d2[far] = 0.0;
        const auto src = points.row(far);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }
}

Matrix cluster_means(ConstMatrixView points, const std::vector<std::size_t>& assign, const Matrix& previous) {
    const std::size_t k = previous.rows();
    Matrix sums(k, points.cols, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        auto dst = sums.row(assign[i]);
        const auto src = points.row(i);
        for (std::size_t d = 0; d < points.cols; ++d) {
            dst[d] += src[d];
        }
        ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        auto row = sums.row(c);
        if (counts[c] == 0) {
            const auto old = previous.row(c);
            std::copy(old.begin(), old.end(), row.begin());
            continue;
        }
        for (double& v : row) {
            v /= static_cast<double>(counts[c]);
        }
    }
    return sums;
}

double ordered_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

}  // namespace

ClusteringResult kmeans_single(ConstMatrixView points, std::size_t k, std::uint64_t seed, int max_iter, double tol) {
    const std::size_t n = points.rows;
    if (n == 0) {
        throw ClusterError("k-means on zero points");
    }
    if (k < 1 || k > n) {
        throw ClusterError(fmt::format("k = {} must satisfy 1 <= k <= n = {}", k, n));
    }
    if (max_iter < 1 || tol < 0.0) {
        throw ClusterError("k-means needs max_iter >= 1 and tol >= 0");
    }
    SplitMix64 rng(seed);
    ClusteringResult result;
    result.seed = seed;
    Matrix centroids = kmeanspp_seed(points, k, rng);
    std::vector<std::size_t> assign(n, 0);
    std::vector<double> d2(n, 0.0);

    for (int iter = 1; iter <= max_iter; ++iter) {
        kernels::parallel::assign_nearest(points, centroids.view(), assign, d2);
        repair_empty(points, centroids, assign, d2);
        result.inertia_history.push_back(ordered_sum(d2));
        Matrix next = cluster_means(points, assign, centroids);
        double shift2 = 0.0;
        for (std::size_t q = 0; q < next.data().size(); ++q) {
            const double d = next.data()[q] - centroids.data()[q];
            shift2 += d * d;
        }
        centroids = std::move(next);
        result.iterations = iter;
        if (std::sqrt(shift2) < tol || shift2 == 0.0) {
            break;
        }
    }

    kernels::parallel::assign_nearest(points, centroids.view(), assign, d2);
    repair_empty(points, centroids, assign, d2);
    result.centroids = cluster_means(points, assign, centroids);
    result.assignments = std::move(assign);
    result.inertia = inertia(points, result.assignments, result.centroids.view());
    return result;
}

ClusteringResult kmeans(ConstMatrixView points, const KMeansOptions& options) {
    if (options.restarts < 1) {
        throw ClusterError("k-means needs at least one restart");
    }
    SplitMix64 seeds(options.seed);
    ClusteringResult best;
    bool have = false;
    for (int r = 0; r < options.restarts; ++r) {
        auto candidate = kmeans_single(points, options.k, seeds.next(), options.max_iter, options.tol);
        if (!have || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have = true;
        }
    }
    return best;
}

ClusteringResult kmeans(const EmbeddingSet& embeddings, const KMeansOptions& options) {
    return kmeans(embeddings.vectors().view(), options);
}

void write_clustering(const ClusteringResult& result, std::span<const std::string> ids,
                      const std::filesystem::path& assignments_path, const std::filesystem::path& centroids_path) {
    if (ids.size() != result.assignments.size()) {
        throw ClusterError("id count does not match assignment count");
    }
    std::ofstream out(assignments_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ClusterError(fmt::format("cannot write '{}'", assignments_path.string()));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << nlohmann::json{{"id", ids[i]}, {"cluster", result.assignments[i]}}.dump() << '\n';
    }
    write_f32(centroids_path, result.centroids);
}

}  // namespace codesum
