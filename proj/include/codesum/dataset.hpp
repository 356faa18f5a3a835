#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace codesum {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SourceLanguage { c, java, other };

struct CodeFragment {
    std::string id;
    std::optional<int> label;
    std::string text;
    SourceLanguage language = SourceLanguage::other;
    std::filesystem::path source_path;
};

enum class CorpusLayout {
    poj104,  // <root>/<problem>/<file>, label = problem number
    flat,    // <root>/<file>, unlabeled
};

struct CorpusLoadOptions {
    // Keep only the first N problems in numeric order (poj104 only).
    std::optional<std::size_t> max_problems;
    // Keep only the first N files (by name) of each problem (poj104 only).
    std::optional<std::size_t> max_per_problem;
};

/// Immutable collection of fragments, indexed by id.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::string name, std::vector<CodeFragment> fragments);

    const std::string& name() const { return name_; }
    std::size_t size() const { return fragments_.size(); }
    bool empty() const { return fragments_.empty(); }
    const CodeFragment& operator[](std::size_t i) const { return fragments_[i]; }
    const std::vector<CodeFragment>& fragments() const { return fragments_; }
    auto begin() const { return fragments_.begin(); }
    auto end() const { return fragments_.end(); }

    std::optional<std::size_t> index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_of(id).has_value(); }
    bool labeled() const;
    // Number of files that could not be read or were empty during loading.
    std::size_t skipped() const { return skipped_; }
    void set_skipped(std::size_t n) { skipped_ = n; }

private:
    std::string name_;
    std::vector<CodeFragment> fragments_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t skipped_ = 0;
};

Corpus load_corpus_dir(const std::filesystem::path& root, CorpusLayout layout,
                       const CorpusLoadOptions& options = {});

// One `{"id", "label", "path"}` record per line.
void write_corpus_manifest(const Corpus& corpus, const std::filesystem::path& path);

struct LabeledPair {
    std::string id_a;
    std::string id_b;
    bool truth = false;

    friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct PairDataset {
    std::vector<LabeledPair> pairs;
    std::string source_corpus;
    std::optional<std::uint64_t> seed;

    std::size_t positives() const;
    std::size_t negatives() const { return pairs.size() - positives(); }
};

// Reads `{"id1": "...", "id2": "...", "label": 0|1}` lines. Label may also be a JSON boolean.
PairDataset load_pair_jsonl(const std::filesystem::path& path);
void write_pair_jsonl(const PairDataset& pairs, const std::filesystem::path& path);

// Throws DatasetError naming the first id that does not resolve in `corpus`.
void check_pairs_resolve(const PairDataset& pairs, const Corpus& corpus);

struct PairCapacity {
    std::uint64_t positive = 0;
    std::uint64_t negative = 0;
};

PairCapacity pair_capacity(const Corpus& corpus);

/// Samples n_pos same-label and n_neg cross-label unordered pairs without
/// replacement. Pure function of (corpus, n_pos, n_neg, seed). Each pair is
/// stored canonically (id_a < id_b); positives come first.
PairDataset sample_balanced_pairs(const Corpus& corpus, std::size_t n_pos, std::size_t n_neg,
                                  std::uint64_t seed);

}  // namespace codesum
