#pragma once

#include "codesum/embed.hpp"
#include "codesum/kernels.hpp"
#include "codesum/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace codesum {

class VizError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TsneConfig {
    double perplexity = 30.0;
    double learning_rate = 200.0;
    int iterations = 1000;
    std::uint64_t seed = 0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    kernels::BandwidthSearch bandwidth;

    // Throws VizError when a field is out of range for n input points.
    void validate(std::size_t n) const;
};

struct Projection2D {
    Matrix coords;  // n x 2
    std::vector<std::string> fragment_ids;
    std::optional<std::vector<long long>> labels;
    double initial_kl = 0.0;           // at the random initial layout
    double post_exaggeration_kl = 0.0;  // when early exaggeration is switched off
    double final_kl = 0.0;
    std::vector<double> kl_history;  // KL(P || Q) after each iteration's gradient evaluation
};

// Conditional p_{j|i} (row i), each row calibrated to the perplexity.
Matrix conditional_affinities(ConstMatrixView points, double perplexity, const kernels::BandwidthSearch& search = {});
// (P + P^T) / (2n).
Matrix joint_affinities(const Matrix& conditional);

// KL(P || Q) and its gradient at layout y (n x 2), for unit exaggeration.
double tsne_objective(const Matrix& p, const Matrix& y, Matrix* gradient = nullptr);

/// Exact O(n^2) t-SNE to two dimensions with momentum, per-parameter gains
/// and early exaggeration. Deterministic for a fixed seed.
Projection2D tsne(ConstMatrixView points, const TsneConfig& config);
Projection2D tsne(const EmbeddingSet& embeddings, const TsneConfig& config);

// CSV "id,x,y[,label]" with full double precision.
void export_projection(const Projection2D& projection, const std::filesystem::path& path);
// {"points": [{"id", "x", "y", "label"}]}
void export_projection_json(const Projection2D& projection, const std::filesystem::path& path);
Projection2D read_projection_csv(const std::filesystem::path& path);

}  // namespace codesum
