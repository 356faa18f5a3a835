#pragma once

// Per-element routines shared by the serial and OpenMP kernels.

#include "codesum/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace codesum::kernels::detail {

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

inline void nearest(ConstMatrixView points, ConstMatrixView centroids, std::size_t i, std::size_t& best,
                    double& best_d2) {
    best = 0;
    best_d2 = std::numeric_limits<double>::infinity();
    const auto x = points.row(i);
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        const double d2 = squared_distance(x, centroids.row(c));
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
}

// Binary search on the Gaussian precision for row i, with distances shifted by
// the row minimum.
inline void affinity_row(ConstMatrixView points, std::size_t i, double perplexity, const BandwidthSearch& search,
                         std::span<double> prow, double& beta_out) {
    const std::size_t n = points.rows;
    const auto xi = points.row(i);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            prow[j] = 0.0;
            continue;
        }
        prow[j] = squared_distance(xi, points.row(j));  // temporarily holds d_ij
        dmin = std::min(dmin, prow[j]);
    }
    std::vector<double> d(prow.begin(), prow.end());
    const double target = std::log(perplexity);
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < search.max_iterations; ++it) {
        double sum = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double shifted = d[j] - dmin;
            const double v = std::exp(-beta * shifted);
            prow[j] = v;
            sum += v;
            weighted += shifted * v;
        }
        const double entropy = std::log(sum) + beta * weighted / sum;
        const double diff = entropy - target;
        if (std::abs(diff) < search.entropy_tolerance) {
            break;
        }
        if (diff > 0) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
    }
    // Final probabilities for the beta actually reported.
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            prow[j] = 0.0;
            continue;
        }
        prow[j] = std::exp(-beta * (d[j] - dmin));
        sum += prow[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        prow[j] /= sum;
    }
    beta_out = beta;
}

inline double student_t(ConstMatrixView y, std::size_t i, std::size_t j) {
    return 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
}

inline double row_normaliser(ConstMatrixView y, std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < y.rows; ++j) {
        if (j != i) {
            s += student_t(y, i, j);
        }
    }
    return s;
}

// Writes grad row i and returns row i's contribution to KL(P || Q).
inline double gradient_row(std::span<const double> p, ConstMatrixView y, double exaggeration, double z,
                           std::size_t i, std::span<double> grad) {
    const std::size_t n = y.rows;
    const std::size_t dim = y.cols;
    const auto yi = y.row(i);
    for (std::size_t k = 0; k < dim; ++k) {
        grad[i * dim + k] = 0.0;
    }
    double kl = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            continue;
        }
        const double num = student_t(y, i, j);
        const double q = num / z;
        const double pij = p[i * n + j];
        const double mult = 4.0 * (exaggeration * pij - q) * num;
        const auto yj = y.row(j);
        for (std::size_t k = 0; k < dim; ++k) {
            grad[i * dim + k] += mult * (yi[k] - yj[k]);
        }
        if (pij > 0.0) {
            kl += pij * std::log(pij / std::max(q, std::numeric_limits<double>::min()));
        }
    }
    return kl;
}

}  // namespace codesum::kernels::detail
