#include "codesum/cloneval.hpp"

#include "codesum/kernels.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace codesum {

using json = nlohmann::json;

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw CloneEvalError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) {
        throw CloneEvalError("cosine similarity of a zero vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

ThresholdConfig::ThresholdConfig() : grid_{0.50, 0.55, 0.60, 0.65, 0.70, 0.75} {}

ThresholdConfig::ThresholdConfig(std::vector<double> grid) : grid_(std::move(grid)) {
    if (grid_.empty()) {
        throw CloneEvalError("threshold grid is empty");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!(grid_[i] > 0.0 && grid_[i] < 1.0)) {
            throw CloneEvalError(fmt::format("threshold {} outside (0, 1)", grid_[i]));
        }
        if (i > 0 && !(grid_[i] > grid_[i - 1])) {
            throw CloneEvalError("threshold grid must be strictly increasing");
        }
    }
}

namespace {

std::vector<kernels::IndexPair> resolve(const PairDataset& pairs, const EmbeddingSet& embeddings) {
    std::vector<kernels::IndexPair> idx;
    idx.reserve(pairs.pairs.size());
    const auto lookup = [&](const std::string& id) {
        const auto i = embeddings.index_of(id);
        if (!i) {
            throw CloneEvalError(fmt::format("no embedding for fragment '{}'", id));
        }
        return static_cast<std::uint32_t>(*i);
    };
    for (const auto& p : pairs.pairs) {
        idx.push_back({lookup(p.id_a), lookup(p.id_b)});
    }
    return idx;
}

}  // namespace

std::vector<double> pair_similarities(const PairDataset& pairs, const EmbeddingSet& embeddings) {
    const auto idx = resolve(pairs, embeddings);
    std::vector<double> sims(idx.size());
    kernels::parallel::pair_cosines(embeddings.vectors().view(), idx, sims);
    return sims;
}

std::vector<ClonePrediction> classify_pairs(const PairDataset& pairs, const EmbeddingSet& embeddings,
                                            double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw CloneEvalError(fmt::format("threshold {} outside (0, 1)", threshold));
    }
    const auto sims = pair_similarities(pairs, embeddings);
    std::vector<ClonePrediction> out;
    out.reserve(sims.size());
    for (std::size_t k = 0; k < sims.size(); ++k) {
        const auto& p = pairs.pairs[k];
        out.push_back({p.id_a, p.id_b, sims[k], sims[k] >= threshold, threshold});
    }
    return out;
}

std::vector<SweepRow> sweep_similarities(std::span<const double> similarities, const PairDataset& pairs,
                                         const ThresholdConfig& config) {
    if (similarities.size() != pairs.pairs.size()) {
        throw CloneEvalError("similarity count does not match pair count");
    }
    std::vector<SweepRow> rows;
    std::vector<Outcome> outcomes(similarities.size());
    for (double t : config.grid()) {
        for (std::size_t k = 0; k < similarities.size(); ++k) {
            outcomes[k] = {similarities[k] >= t, pairs.pairs[k].truth};
        }
        const auto counts = confusion(outcomes);
        rows.push_back({t, classification_report(counts, Averaging::binary),
                        classification_report(counts, Averaging::weighted)});
    }
    return rows;
}

std::vector<SweepRow> sweep_thresholds(const PairDataset& pairs, const EmbeddingSet& embeddings,
                                       const ThresholdConfig& config) {
    const auto sims = pair_similarities(pairs, embeddings);
    return sweep_similarities(sims, pairs, config);
}

void write_predictions_jsonl(std::span<const ClonePrediction> predictions, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CloneEvalError(fmt::format("cannot write '{}'", path.string()));
    }
    for (const auto& p : predictions) {
        out << json{{"id1", p.id_a}, {"id2", p.id_b}, {"sim", p.similarity}, {"pred", p.predicted},
                    {"T", p.threshold}}
                   .dump()
            << '\n';
    }
}

namespace {

// Two decimals for grid values like 0.55, shortest round-trip form otherwise.
std::string format_threshold(double t) {
    const double scaled = t * 100.0;
    if (std::abs(scaled - std::round(scaled)) < 1e-9) {
        return fmt::format("{:.2f}", t);
    }
    return fmt::format("{}", t);
}

}  // namespace

std::string sweep_csv(std::span<const SweepRow> rows, Averaging averaging) {
    std::string out = "T,accuracy,precision,recall,f1\n";
    for (const auto& row : rows) {
        const auto& r = row.report(averaging);
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", format_threshold(row.threshold), r.accuracy,
                           r.precision, r.recall, r.f1);
    }
    return out;
}

}  // namespace codesum
