#include "codesum/kernels.hpp"

#include "kernels_detail.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace codesum::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

void pair_cosines(ConstMatrixView rows, std::span<const IndexPair> pairs, std::span<double> out) {
    const auto count = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < count; ++k) {
        out[k] = detail::cosine(rows.row(pairs[k].a), rows.row(pairs[k].b));
    }
}

void assign_nearest(ConstMatrixView points, ConstMatrixView centroids, std::span<std::size_t> assignment,
                    std::span<double> dist2) {
    const auto n = static_cast<long long>(points.rows);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        detail::nearest(points, centroids, static_cast<std::size_t>(i), assignment[i], dist2[i]);
    }
}

void conditional_affinities(ConstMatrixView points, double perplexity, const BandwidthSearch& search,
                            std::span<double> p, std::span<double> beta) {
    const std::size_t n = points.rows;
    const auto rows = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < rows; ++i) {
        const auto r = static_cast<std::size_t>(i);
        detail::affinity_row(points, r, perplexity, search, p.subspan(r * n, n), beta[r]);
    }
}

double tsne_gradient(std::span<const double> p, ConstMatrixView y, double exaggeration, std::span<double> grad) {
    const std::size_t n = y.rows;
    const auto rows = static_cast<long long>(n);
    std::vector<double> row_z(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < rows; ++i) {
        row_z[i] = detail::row_normaliser(y, static_cast<std::size_t>(i));
    }
    double z = 0.0;
    for (double v : row_z) {
        z += v;
    }
    std::vector<double> row_kl(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < rows; ++i) {
        row_kl[i] = detail::gradient_row(p, y, exaggeration, z, static_cast<std::size_t>(i), grad);
    }
    double kl = 0.0;
    for (double v : row_kl) {
        kl += v;
    }
    return kl;
}

}  // namespace parallel

}  // namespace codesum::kernels
