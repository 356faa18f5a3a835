#pragma once

#include "codesum/cloneval.hpp"
#include "codesum/cluster.hpp"
#include "codesum/config.hpp"
#include "codesum/dataset.hpp"
#include "codesum/embed.hpp"
#include "codesum/llm.hpp"
#include "codesum/viz.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace codesum {

// API keys and base URLs come from CODESUM_API_KEY_<PROVIDER> / CODESUM_BASE_URL_<PROVIDER>.
std::shared_ptr<ChatProvider> make_chat_provider(const LlmConfig& config);
std::shared_ptr<EmbedProvider> make_embed_provider(const EmbeddingConfig& config);

struct CloneResult {
    std::vector<SweepRow> rows;
    std::size_t pairs_used = 0;
    std::size_t pairs_dropped = 0;  // referenced a fragment without a summary
    double best_threshold = 0.0;    // highest F1 under the configured averaging
};

struct ClusterOutcome {
    ClusteringResult clustering;
    std::size_t k = 0;
    std::optional<double> ari;  // when the corpus is labelled
};

/// Staged run over one config. Each stage pulls what it needs from the
/// previous ones and writes its artefacts under config.output_dir.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config, std::shared_ptr<ChatProvider> chat = nullptr,
                      std::shared_ptr<EmbedProvider> embedder = nullptr);

    const PipelineConfig& config() const { return config_; }
    const std::string& hash() const { return hash_; }

    const Corpus& corpus();
    const SummarySet& summarize();
    const EmbeddingSet& embed();
    CloneResult clone();
    ClusterOutcome cluster();
    Projection2D viz();
    // Every enabled task, sharing one summarize/embed pass.
    void run();

private:
    std::filesystem::path out(const std::string& name) const;
    void write_summarize_manifest(const SummarySet& set) const;

    PipelineConfig config_;
    std::string hash_;
    std::shared_ptr<ChatProvider> chat_;
    std::shared_ptr<EmbedProvider> embedder_;
    std::optional<Corpus> corpus_;
    std::optional<SummarySet> summaries_;
    std::optional<EmbeddingSet> embeddings_;
};

// Plain-text summary of the reports already present in `output_dir`.
std::string render_report(const std::filesystem::path& output_dir);

}  // namespace codesum
