#pragma once

#include "codesum/cloneval.hpp"
#include "codesum/cluster.hpp"
#include "codesum/dataset.hpp"
#include "codesum/metrics.hpp"
#include "codesum/viz.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace codesum {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::string name;  // defaults to the corpus directory name
    CorpusLayout layout = CorpusLayout::poj104;
    std::filesystem::path path;
    std::optional<std::filesystem::path> pairs;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_problems;
    std::optional<std::size_t> max_per_problem;
};

struct LlmConfig {
    std::string provider = "fixture";  // "fixture" or "openai" (any chat-completions endpoint)
    std::string provider_id;           // cache identity; defaults to "<provider>:<model>" or "fixture"
    std::string model;
    std::string endpoint;
    std::optional<std::filesystem::path> fixture;
    std::optional<std::filesystem::path> template_path;
    std::string language = "en";
    double temperature = 0.0;
    int max_tokens = 256;
    std::size_t parallelism = 4;
    double failure_cap = 0.01;
    std::optional<std::size_t> context_limit;
};

struct EmbeddingConfig {
    std::string provider = "deterministic";  // "deterministic" or "openai"
    std::string model;
    std::string endpoint;
    std::size_t dim = 384;
    std::uint64_t seed = 1;
    std::size_t batch_size = 64;
    std::size_t parallelism = 1;
};

struct CloneTaskConfig {
    ThresholdConfig thresholds;
    Averaging averaging = Averaging::weighted;
};

struct ClusterTaskConfig {
    std::optional<std::size_t> k;  // defaults to the number of distinct labels
    std::uint64_t seed = 0;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-4;
};

struct StopwordsConfig {
    bool enabled = false;
    std::optional<std::filesystem::path> list;
};

struct PipelineConfig {
    DatasetConfig dataset;
    LlmConfig llm;
    EmbeddingConfig embedding;
    std::optional<CloneTaskConfig> clone;
    std::optional<ClusterTaskConfig> cluster;
    std::optional<TsneConfig> viz;
    StopwordsConfig stopwords;
    std::filesystem::path cache_root = "cache";
    std::filesystem::path output_dir = "out";

    bool any_task() const { return clone || cluster || viz; }
    // Referenced input paths must exist; requires at least one task when `require_task`.
    void validate(bool require_task) const;
};

/// One entry per recognised dotted key; CLI flags are `--<key>`.
struct ConfigKey {
    const char* key;
    enum class Type { string, path, integer, real, boolean, real_list } type;
    const char* help;
};

const std::vector<ConfigKey>& config_keys();

// Sets `key` (dotted) in `tree` from its string form, typed per config_keys().
void apply_override(nlohmann::json& tree, const std::string& key, const std::string& value);

// Relative paths in the file are resolved against the file's directory.
nlohmann::json load_config_tree(const std::filesystem::path& path);

PipelineConfig parse_config(const nlohmann::json& tree);
// Fully materialised config (defaults filled in).
nlohmann::json to_json(const PipelineConfig& config);

/// SHA-256 over the canonical form of every field that can change results;
/// output/cache locations and parallelism settings are excluded.
std::string config_hash(const PipelineConfig& config);

}  // namespace codesum
