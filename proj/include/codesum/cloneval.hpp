#pragma once

#include "codesum/dataset.hpp"
#include "codesum/embed.hpp"
#include "codesum/metrics.hpp"

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace codesum {

class CloneEvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// dot(a,b) / (|a||b|) in double precision, clamped to [-1, 1]. Throws on a
// zero vector or mismatched dimensions.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Strictly increasing thresholds, each in (0, 1).
class ThresholdConfig {
public:
    ThresholdConfig();  // 0.50, 0.55, ..., 0.75
    explicit ThresholdConfig(std::vector<double> grid);

    const std::vector<double>& grid() const { return grid_; }

private:
    std::vector<double> grid_;
};

struct ClonePrediction {
    std::string id_a;
    std::string id_b;
    double similarity = 0.0;
    bool predicted = false;
    double threshold = 0.0;
};

// Cosine similarity of every pair, in pair order. Throws naming the first id
// without an embedding.
std::vector<double> pair_similarities(const PairDataset& pairs, const EmbeddingSet& embeddings);

// predicted = similarity >= threshold.
std::vector<ClonePrediction> classify_pairs(const PairDataset& pairs, const EmbeddingSet& embeddings,
                                            double threshold);

struct SweepRow {
    double threshold = 0.0;
    EvalReport binary;
    EvalReport weighted;

    const EvalReport& report(Averaging averaging) const {
        return averaging == Averaging::binary ? binary : weighted;
    }
};

// Similarities are computed once and thresholded at each grid value.
std::vector<SweepRow> sweep_thresholds(const PairDataset& pairs, const EmbeddingSet& embeddings,
                                       const ThresholdConfig& config);
std::vector<SweepRow> sweep_similarities(std::span<const double> similarities, const PairDataset& pairs,
                                         const ThresholdConfig& config);

// Line-delimited {"id1","id2","sim","pred","T"}.
void write_predictions_jsonl(std::span<const ClonePrediction> predictions, const std::filesystem::path& path);

// CSV "T,accuracy,precision,recall,f1" for the chosen averaging mode.
std::string sweep_csv(std::span<const SweepRow> rows, Averaging averaging);

}  // namespace codesum
