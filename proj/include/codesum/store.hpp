#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codesum {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SummaryKey {
    std::string fragment_hash;  // sha256 hex of the fragment text
    std::string provider;
    std::string lang;
    std::string template_hash;  // sha256 hex of the template body

    friend auto operator<=>(const SummaryKey&, const SummaryKey&) = default;
};

struct SummaryRecord {
    SummaryKey key;
    std::string fragment_id;
    std::string summary;
    bool stopwords_removed = false;
    std::string created_at;  // ISO-8601 UTC

    friend bool operator==(const SummaryRecord&, const SummaryRecord&) = default;
};

// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

// One line of the on-disk format, without the trailing newline.
std::string encode_record(const SummaryRecord& record);
// Throws StoreError on malformed input.
SummaryRecord decode_record(std::string_view line);

/// Line-delimited JSON summary cache. Reads are lock-protected lookups into
/// an in-memory map; writes append to the file under the same lock.
class SummaryStore {
public:
    // Loads `path` if it exists (creating parent directories otherwise).
    // Corrupt lines are skipped and counted in corrupt_lines().
    static SummaryStore open(const std::filesystem::path& path);

    // `<cache_root>/<dataset>/<provider>/<lang>/summaries.jsonl`
    static std::filesystem::path path_for(const std::filesystem::path& cache_root, std::string_view dataset,
                                          std::string_view provider, std::string_view lang);

    SummaryStore(SummaryStore&& other) noexcept;
    SummaryStore& operator=(SummaryStore&&) = delete;
    SummaryStore(const SummaryStore&) = delete;
    SummaryStore& operator=(const SummaryStore&) = delete;
    ~SummaryStore();

    std::optional<SummaryRecord> get(const SummaryKey& key) const;
    // Last write wins. Throws StoreError on IO failure.
    void put(const SummaryRecord& record);
    void flush();
    // Rewrites the file with exactly one line per live record.
    void compact();

    std::size_t size() const;
    std::size_t corrupt_lines() const { return corrupt_lines_; }
    std::vector<SummaryRecord> records() const;
    const std::filesystem::path& path() const { return path_; }

private:
    explicit SummaryStore(std::filesystem::path path);
    void open_appender();

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<SummaryKey, SummaryRecord> records_;
    std::ofstream appender_;
    std::size_t corrupt_lines_ = 0;
};

}  // namespace codesum
