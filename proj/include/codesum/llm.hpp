#pragma once

#include "codesum/dataset.hpp"
#include "codesum/prompt.hpp"
#include "codesum/store.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace codesum {

enum class Role { system, user, assistant };

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    int max_output_tokens = 256;
    double temperature = 0.0;

    // Throws std::invalid_argument unless there is at least one message and the last is from the user.
    void validate() const;
};

enum class ProviderErrorKind { context_length_exceeded, rate_limited, auth, network, malformed_response };

const char* to_string(ProviderErrorKind kind);

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, std::string detail, bool retryable);
    ProviderError(ProviderErrorKind kind, std::string detail);  // default retryability for the kind

    ProviderErrorKind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }
    bool retryable() const { return retryable_; }

    static bool default_retryable(ProviderErrorKind kind);

private:
    ProviderErrorKind kind_;
    std::string detail_;
    bool retryable_;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // Stable identity used in cache keys and cache paths.
    virtual std::string id() const = 0;
    // Context window in tokens (prompt + completion), if known.
    virtual std::optional<std::size_t> context_limit() const { return std::nullopt; }
    // One attempt; throws ProviderError. Must be safe to call concurrently.
    virtual std::string complete(const ChatRequest& request) = 0;
};

// chars/4 over all message contents (code points, rounded up) plus the completion budget.
std::size_t estimate_prompt_tokens(const ChatRequest& request);

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{30'000};
    double multiplier = 2.0;
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for

    std::chrono::milliseconds backoff(int retry_index) const;
};

struct CallStats {
    std::size_t attempts = 0;
    std::size_t retries = 0;
};

/// Runs the request against `provider`, retrying retryable errors with capped
/// exponential backoff. A request whose estimated size exceeds the provider's
/// context limit fails with context_length_exceeded before any call is made.
std::string chat_complete(ChatProvider& provider, const ChatRequest& request, const RetryPolicy& policy = {},
                          CallStats* stats = nullptr);

// Maps an HTTP error response (status + body) onto a ProviderError.
ProviderError classify_http_error(int status, const std::string& body);

struct HttpChatConfig {
    std::string id;
    std::string base_url;  // e.g. "https://api.openai.com/v1"
    std::string api_key;
    std::optional<std::size_t> context_limit;
    std::chrono::seconds timeout{60};
};

/// Chat-completions client: POST {base}/chat/completions, reads choices[0].message.content.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpChatConfig config);
    std::string id() const override { return config_.id; }
    std::optional<std::size_t> context_limit() const override { return config_.context_limit; }
    std::string complete(const ChatRequest& request) override;

    static std::string encode_request(const ChatRequest& request);
    // Throws ProviderError(malformed_response) when the body lacks choices[0].message.content.
    static std::string decode_response(const std::string& body);

private:
    HttpChatConfig config_;
};

/// Offline provider answering from a prompt -> response table. Entries either
/// match the whole prompt exactly or match when their `match` string occurs
/// in the prompt (first such entry in file order wins). An entry may carry an
/// error kind instead of a response.
class FixtureChatProvider final : public ChatProvider {
public:
    struct Entry {
        std::optional<std::string> prompt;
        std::optional<std::string> match;
        std::optional<std::string> response;
        std::optional<ProviderErrorKind> error;
    };

    explicit FixtureChatProvider(std::string id = "fixture", std::optional<std::size_t> context_limit = {});
    // JSONL: {"prompt"|"match": ..., "response": ...} or {"prompt"|"match": ..., "error": "<kind>"}.
    static std::unique_ptr<FixtureChatProvider> from_file(const std::filesystem::path& path, std::string id = "fixture",
                                         std::optional<std::size_t> context_limit = {});

    void add_exact(std::string prompt, std::string response);
    void add_match(std::string needle, std::string response);
    void add_entry(Entry entry);

    std::string id() const override { return id_; }
    std::optional<std::size_t> context_limit() const override { return context_limit_; }
    std::string complete(const ChatRequest& request) override;

    std::size_t calls() const { return calls_.load(); }
    void reset_calls() { calls_ = 0; }

private:
    std::string id_;
    std::optional<std::size_t> context_limit_;
    std::unordered_map<std::string, std::size_t> exact_;
    std::vector<Entry> entries_;
    std::atomic<std::size_t> calls_{0};
};

struct SummarizeOptions {
    std::string model;
    int max_output_tokens = 256;
    double temperature = 0.0;
    RetryPolicy retry;
    ExtractOptions extract;
    std::size_t parallelism = 1;
    // Fraction of fragments allowed to fail before the run is considered failed.
    double failure_cap = 0.01;
};

SummaryKey summary_key(const CodeFragment& fragment, const PromptTemplate& tmpl, const ChatProvider& provider);

struct SummaryOutcome {
    std::string fragment_id;
    std::optional<SummaryRecord> record;  // absent on failure
    std::string failure;                  // non-empty on failure
    bool cache_hit = false;
    bool preamble_skipped = false;
    std::size_t provider_calls = 0;
};

/// One fragment through the cache: a hit costs no provider call, a miss costs
/// exactly one logical chat_complete (retries aside). Extraction failures come
/// back as a failed outcome; provider errors are rethrown naming the fragment.
SummaryOutcome summarize_fragment(const CodeFragment& fragment, const PromptTemplate& tmpl, ChatProvider& provider,
                                  SummaryStore& store, const SummarizeOptions& options = {});

struct SummaryEntry {
    std::string fragment_id;
    std::optional<Summary> summary;
    std::string failure;
};

struct SummarizeStats {
    std::size_t fragments = 0;
    std::size_t calls = 0;     // logical chat_complete calls (one per uncached unique text)
    std::size_t attempts = 0;  // including retries
    std::size_t hits = 0;      // fragments already cached before the run
    std::size_t failures = 0;
};

struct SummarySet {
    std::vector<SummaryEntry> entries;  // aligned with corpus order
    SummarizeStats stats;

    double failure_ratio() const;
};

class FailureCapExceeded : public std::runtime_error {
public:
    FailureCapExceeded(std::string message, SummarySet set)
        : std::runtime_error(std::move(message)), set_(std::move(set)) {}
    const SummarySet& set() const { return set_; }

private:
    SummarySet set_;
};

/// Summarizes every fragment with at most one provider call per distinct
/// uncached text, issuing up to `options.parallelism` requests concurrently.
/// Auth errors abort the run; other per-fragment failures are collected and
/// FailureCapExceeded is thrown when their ratio exceeds the cap.
SummarySet summarize_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatProvider& provider,
                            SummaryStore& store, const SummarizeOptions& options = {});

}  // namespace codesum
