#include "codesum/kernels.hpp"

#include "kernels_detail.hpp"

#include <vector>

namespace codesum::kernels::serial {

void pair_cosines(ConstMatrixView rows, std::span<const IndexPair> pairs, std::span<double> out) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        out[k] = detail::cosine(rows.row(pairs[k].a), rows.row(pairs[k].b));
    }
}

void assign_nearest(ConstMatrixView points, ConstMatrixView centroids, std::span<std::size_t> assignment,
                    std::span<double> dist2) {
    for (std::size_t i = 0; i < points.rows; ++i) {
        detail::nearest(points, centroids, i, assignment[i], dist2[i]);
    }
}

void conditional_affinities(ConstMatrixView points, double perplexity, const BandwidthSearch& search,
                            std::span<double> p, std::span<double> beta) {
    const std::size_t n = points.rows;
    for (std::size_t i = 0; i < n; ++i) {
        detail::affinity_row(points, i, perplexity, search, p.subspan(i * n, n), beta[i]);
    }
}

double tsne_gradient(std::span<const double> p, ConstMatrixView y, double exaggeration, std::span<double> grad) {
    const std::size_t n = y.rows;
    std::vector<double> row_z(n);
    for (std::size_t i = 0; i < n; ++i) {
        row_z[i] = detail::row_normaliser(y, i);
    }
    double z = 0.0;
    for (double v : row_z) {
        z += v;
    }
    std::vector<double> row_kl(n);
    for (std::size_t i = 0; i < n; ++i) {
        row_kl[i] = detail::gradient_row(p, y, exaggeration, z, i, grad);
    }
    double kl = 0.0;
    for (double v : row_kl) {
        kl += v;
    }
    return kl;
}

}  // namespace codesum::kernels::serial
