#include "codesum/store.hpp"

#include "codesum/log.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>

namespace codesum {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string encode_record(const SummaryRecord& r) {
    json j = json::object();
    j["fragment_hash"] = r.key.fragment_hash;
    j["provider"] = r.key.provider;
    j["lang"] = r.key.lang;
    j["template_hash"] = r.key.template_hash;
    j["fragment_id"] = r.fragment_id;
    j["summary"] = r.summary;
    j["stopwords_removed"] = r.stopwords_removed;
    j["created_at"] = r.created_at;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

SummaryRecord decode_record(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw StoreError(fmt::format("malformed record: {}", e.what()));
    }
    const auto str = [&](const char* field) -> std::string {
        if (!j.is_object() || !j.contains(field) || !j[field].is_string()) {
            throw StoreError(fmt::format("record field '{}' missing or not a string", field));
        }
        return j[field].get<std::string>();
    };
    SummaryRecord r;
    r.key.fragment_hash = str("fragment_hash");
    r.key.provider = str("provider");
    r.key.lang = str("lang");
    r.key.template_hash = str("template_hash");
    r.fragment_id = str("fragment_id");
    r.summary = str("summary");
    r.created_at = str("created_at");
    if (!j.contains("stopwords_removed") || !j["stopwords_removed"].is_boolean()) {
        throw StoreError("record field 'stopwords_removed' missing or not a boolean");
    }
    r.stopwords_removed = j["stopwords_removed"].get<bool>();
    if (r.key.fragment_hash.size() != 64 || r.key.template_hash.size() != 64) {
        throw StoreError("record hash fields must be 64 hex characters");
    }
    return r;
}

namespace {

// Maps a config value onto one safe path segment.
std::string path_segment(std::string_view s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") {
        out = "_" + out;
    }
    return out;
}

}  // namespace

fs::path SummaryStore::path_for(const fs::path& cache_root, std::string_view dataset, std::string_view provider,
                                std::string_view lang) {
    return cache_root / path_segment(dataset) / path_segment(provider) / path_segment(lang) / "summaries.jsonl";
}

SummaryStore::SummaryStore(fs::path path) : path_(std::move(path)) {}

SummaryStore::SummaryStore(SummaryStore&& other) noexcept
    : path_(std::move(other.path_)),
      records_(std::move(other.records_)),
      appender_(std::move(other.appender_)),
      corrupt_lines_(other.corrupt_lines_) {}

SummaryStore::~SummaryStore() {
    if (appender_.is_open()) {
        appender_.flush();
    }
}

SummaryStore SummaryStore::open(const fs::path& path) {
    SummaryStore store(path);
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw StoreError(fmt::format("cannot create '{}': {}", path.parent_path().string(), ec.message()));
        }
    }
    std::ifstream in(path, std::ios::binary);
    if (in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) {
                continue;
            }
            try {
                auto record = decode_record(line);
                store.records_.insert_or_assign(record.key, std::move(record));
            } catch (const StoreError& e) {
                ++store.corrupt_lines_;
                log::warn(fmt::format("{}:{}: skipping corrupt record ({})", path.string(), line_no, e.what()));
            }
        }
    }
    store.open_appender();
    // Terminate a torn final line.
    std::error_code size_ec;
    if (const auto size = fs::file_size(path, size_ec); !size_ec && size > 0) {
        std::ifstream tail(path, std::ios::binary);
        tail.seekg(static_cast<std::streamoff>(size - 1));
        if (tail.get() != '\n') {
            store.appender_ << '\n';
        }
    }
    return store;
}

void SummaryStore::open_appender() {
    appender_.open(path_, std::ios::binary | std::ios::app);
    if (!appender_) {
        throw StoreError(fmt::format("cannot open '{}' for appending", path_.string()));
    }
}

std::optional<SummaryRecord> SummaryStore::get(const SummaryKey& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = records_.find(key);
    if (it == records_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void SummaryStore::put(const SummaryRecord& record) {
    const auto line = encode_record(record);
    std::lock_guard<std::mutex> lock(mutex_);
    appender_ << line << '\n';
    if (!appender_) {
        throw StoreError(fmt::format("write to '{}' failed", path_.string()));
    }
    records_.insert_or_assign(record.key, record);
}

void SummaryStore::flush() {
    std::lock_guard<std::mutex> lock(mutex_);
    appender_.flush();
    if (!appender_) {
        throw StoreError(fmt::format("flush of '{}' failed", path_.string()));
    }
}

void SummaryStore::compact() {
    std::lock_guard<std::mutex> lock(mutex_);
    appender_.close();
    const auto tmp = fs::path(path_.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        for (const auto& [key, record] : records_) {
            out << encode_record(record) << '\n';
        }
        out.flush();
        if (!out) {
            throw StoreError(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::error_code ec;
    fs::rename(tmp, path_, ec);
    if (ec) {
        throw StoreError(fmt::format("cannot replace '{}': {}", path_.string(), ec.message()));
    }
    open_appender();
}

std::size_t SummaryStore::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.size();
}

std::vector<SummaryRecord> SummaryStore::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<SummaryRecord> out;
    out.reserve(records_.size());
    for (const auto& [key, record] : records_) {
        out.push_back(record);
    }
    return out;
}

}  // namespace codesum
