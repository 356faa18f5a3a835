#pragma once

// Hot loops of the pipeline. Every kernel has a straightforward serial
// reference and an OpenMP version. Both evaluate each output element with the
// same per-element routine and reduce in the same fixed order; results are
// bit-identical for any thread count.

#include "codesum/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace codesum::kernels {

struct IndexPair {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
};

struct BandwidthSearch {
    int max_iterations = 64;
    double entropy_tolerance = 1e-5;  // nats
};

namespace serial {

// out[k] = cos(rows[pairs[k].a], rows[pairs[k].b]), clamped to [-1, 1].
void pair_cosines(ConstMatrixView rows, std::span<const IndexPair> pairs, std::span<double> out);

// Nearest centroid per point (ties -> lowest index) and its squared distance.
void assign_nearest(ConstMatrixView points, ConstMatrixView centroids, std::span<std::size_t> assignment,
                    std::span<double> dist2);

// Row i of `p` (n x n) gets the Gaussian conditional p_{j|i} whose entropy
// matches log(perplexity); beta[i] receives the precision 1 / (2 sigma_i^2).
void conditional_affinities(ConstMatrixView points, double perplexity, const BandwidthSearch& search,
                            std::span<double> p, std::span<double> beta);

// t-SNE gradient of KL(P || Q) at y (n x 2), with P scaled by `exaggeration`.
// Returns KL(P || Q) for the unscaled P.
double tsne_gradient(std::span<const double> p, ConstMatrixView y, double exaggeration, std::span<double> grad);

}  // namespace serial

namespace parallel {

void pair_cosines(ConstMatrixView rows, std::span<const IndexPair> pairs, std::span<double> out);
void assign_nearest(ConstMatrixView points, ConstMatrixView centroids, std::span<std::size_t> assignment,
                    std::span<double> dist2);
void conditional_affinities(ConstMatrixView points, double perplexity, const BandwidthSearch& search,
                            std::span<double> p, std::span<double> beta);
double tsne_gradient(std::span<const double> p, ConstMatrixView y, double exaggeration, std::span<double> grad);

}  // namespace parallel

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace codesum::kernels
