#include "codesum/llm.hpp"

#include "codesum/hash.hpp"
#include "codesum/http.hpp"
#include "codesum/log.hpp"
#include "codesum/text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

namespace codesum {

using json = nlohmann::json;

void ChatRequest::validate() const {
    if (messages.empty()) {
        throw std::invalid_argument("chat request has no messages");
    }
    if (messages.back().role != Role::user) {
        throw std::invalid_argument("last chat message must come from the user");
    }
    if (max_output_tokens <= 0) {
        throw std::invalid_argument("max_output_tokens must be positive");
    }
}

const char* to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::context_length_exceeded: return "context_length_exceeded";
        case ProviderErrorKind::rate_limited: return "rate_limited";
        case ProviderErrorKind::auth: return "auth";
        case ProviderErrorKind::network: return "network";
        case ProviderErrorKind::malformed_response: return "malformed_response";
    }
    return "unknown";
}

namespace {

std::optional<ProviderErrorKind> parse_error_kind(std::string_view s) {
    for (auto kind : {ProviderErrorKind::context_length_exceeded, ProviderErrorKind::rate_limited,
                      ProviderErrorKind::auth, ProviderErrorKind::network, ProviderErrorKind::malformed_response}) {
        if (s == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

}  // namespace

ProviderError::ProviderError(ProviderErrorKind kind, std::string detail, bool retryable)
    : std::runtime_error(fmt::format("{}: {}", to_string(kind), detail)),
      kind_(kind),
      detail_(std::move(detail)),
      retryable_(kind == ProviderErrorKind::context_length_exceeded ? false : retryable) {}

ProviderError::ProviderError(ProviderErrorKind kind, std::string detail)
    : ProviderError(kind, std::move(detail), default_retryable(kind)) {}

bool ProviderError::default_retryable(ProviderErrorKind kind) {
    return kind == ProviderErrorKind::rate_limited || kind == ProviderErrorKind::network;
}

std::size_t estimate_prompt_tokens(const ChatRequest& request) {
    std::size_t chars = 0;
    for (const auto& m : request.messages) {
        for (std::size_t pos = 0; pos < m.content.size(); pos += text::codepoint_length(m.content, pos)) {
            ++chars;
        }
    }
    return (chars + 3) / 4;
}

std::chrono::milliseconds RetryPolicy::backoff(int retry_index) const {
    const double scaled = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, retry_index);
    const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(capped));
}

std::string chat_complete(ChatProvider& provider, const ChatRequest& request, const RetryPolicy& policy,
                          CallStats* stats) {
    request.validate();
    if (const auto limit = provider.context_limit()) {
        const auto prompt_tokens = estimate_prompt_tokens(request);
        const auto total = prompt_tokens + static_cast<std::size_t>(request.max_output_tokens);
        if (total > *limit) {
            throw ProviderError(ProviderErrorKind::context_length_exceeded,
                                fmt::format("This model's maximum context length is {} tokens. However, you "
                                            "requested {} tokens ({} in the messages, {} in the completion). Please "
                                            "reduce the length of the messages or completion.",
                                            *limit, total, prompt_tokens, request.max_output_tokens));
        }
    }
    const int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 0;; ++attempt) {
        if (stats) {
            ++stats->attempts;
        }
        try {
            return provider.complete(request);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt + 1 >= attempts) {
                throw;
            }
            if (stats) {
                ++stats->retries;
            }
            const auto wait = policy.backoff(attempt);
            log::write(log::Level::debug,
                       fmt::format("{} from '{}', retrying in {} ms", to_string(e.kind()), provider.id(), wait.count()));
            if (policy.sleep) {
                policy.sleep(wait);
            } else {
                std::this_thread::sleep_for(wait);
            }
        }
    }
}

ProviderError classify_http_error(int status, const std::string& body) {
    std::string code;
    std::string message = body;
    try {
        const auto j = json::parse(body);
        if (j.contains("error") && j["error"].is_object()) {
            const auto& err = j["error"];
            if (err.contains("code") && err["code"].is_string()) {
                code = err["code"].get<std::string>();
            }
            if (err.contains("message") && err["message"].is_string()) {
                message = err["message"].get<std::string>();
            }
        }
    } catch (const json::exception&) {
    }
    const auto detail = fmt::format("HTTP {}: {}", status, message);
    if (code == "context_length_exceeded") {
        return ProviderError(ProviderErrorKind::context_length_exceeded, message);
    }
    if (status == 429) {
        return ProviderError(ProviderErrorKind::rate_limited, detail, code != "insufficient_quota");
    }
    if (status == 401 || status == 403) {
        return ProviderError(ProviderErrorKind::auth, detail);
    }
    if (status == 408 || status >= 500) {
        return ProviderError(ProviderErrorKind::network, detail);
    }
    return ProviderError(ProviderErrorKind::malformed_response, detail, false);
}

HttpChatProvider::HttpChatProvider(HttpChatConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw std::invalid_argument("HTTP chat provider requires a base URL");
    }
}

std::string HttpChatProvider::encode_request(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    json body = {{"model", request.model},
                 {"messages", std::move(messages)},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output_tokens}};
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string HttpChatProvider::decode_response(const std::string& body) {
    try {
        const auto j = json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) {
            throw ProviderError(ProviderErrorKind::malformed_response, "message content is not a string");
        }
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(ProviderErrorKind::malformed_response, e.what());
    }
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    const auto endpoint = http::parse_base_url(config_.base_url);
    std::map<std::string, std::string> headers;
    if (!config_.api_key.empty()) {
        headers["Authorization"] = "Bearer " + config_.api_key;
    }
    http::Response response;
    try {
        response = http::post_json(endpoint, "/chat/completions", encode_request(request), headers, config_.timeout);
    } catch (const http::TransportError& e) {
        throw ProviderError(ProviderErrorKind::network, e.what());
    }
    if (response.status != 200) {
        throw classify_http_error(response.status, response.body);
    }
    return decode_response(response.body);
}

FixtureChatProvider::FixtureChatProvider(std::string id, std::optional<std::size_t> context_limit)
    : id_(std::move(id)), context_limit_(context_limit) {}

std::unique_ptr<FixtureChatProvider> FixtureChatProvider::from_file(const std::filesystem::path& path,
                                                                   std::string id,
                                                                   std::optional<std::size_t> context_limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open fixture file '{}'", path.string()));
    }
    auto provider = std::make_unique<FixtureChatProvider>(std::move(id), context_limit);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            Entry e;
            if (j.contains("prompt")) {
                e.prompt = j["prompt"].get<std::string>();
            }
            if (j.contains("match")) {
                e.match = j["match"].get<std::string>();
            }
            if (j.contains("response")) {
                e.response = j["response"].get<std::string>();
            }
            if (j.contains("error")) {
                e.error = parse_error_kind(j["error"].get<std::string>());
                if (!e.error) {
                    throw std::runtime_error("unknown error kind");
                }
            }
            provider->add_entry(std::move(e));
        } catch (const std::exception& ex) {
            throw std::runtime_error(fmt::format("{}:{}: bad fixture entry ({})", path.string(), line_no, ex.what()));
        }
    }
    return provider;
}

void FixtureChatProvider::add_exact(std::string prompt, std::string response) {
    add_entry({std::move(prompt), std::nullopt, std::move(response), std::nullopt});
}

void FixtureChatProvider::add_match(std::string needle, std::string response) {
    add_entry({std::nullopt, std::move(needle), std::move(response), std::nullopt});
}

void FixtureChatProvider::add_entry(Entry entry) {
    if (entry.prompt.has_value() == entry.match.has_value()) {
        throw std::invalid_argument("fixture entry needs exactly one of prompt/match");
    }
    if (entry.response.has_value() == entry.error.has_value()) {
        throw std::invalid_argument("fixture entry needs exactly one of response/error");
    }
    if (entry.prompt) {
        exact_.insert_or_assign(*entry.prompt, entries_.size());
    }
    entries_.push_back(std::move(entry));
}

std::string FixtureChatProvider::complete(const ChatRequest& request) {
    ++calls_;
    const auto& prompt = request.messages.back().content;
    const Entry* hit = nullptr;
    if (const auto it = exact_.find(prompt); it != exact_.end()) {
        hit = &entries_[it->second];
    } else {
        for (const auto& e : entries_) {
            if (e.match && prompt.find(*e.match) != std::string::npos) {
                hit = &e;
                break;
            }
        }
    }
    if (!hit) {
        throw ProviderError(ProviderErrorKind::malformed_response, "no fixture response for prompt", false);
    }
    if (hit->error) {
        throw ProviderError(*hit->error, "fixture error");
    }
    return *hit->response;
}

SummaryKey summary_key(const CodeFragment& fragment, const PromptTemplate& tmpl, const ChatProvider& provider) {
    return SummaryKey{sha256_hex(fragment.text), provider.id(), tmpl.language().code(), sha256_hex(tmpl.body())};
}

namespace {

ChatRequest make_request(const std::string& prompt, const SummarizeOptions& options) {
    ChatRequest request;
    request.model = options.model;
    request.messages.push_back({Role::user, prompt});
    request.max_output_tokens = options.max_output_tokens;
    request.temperature = options.temperature;
    return request;
}

// The uncached part of summarize_fragment; `key` must already have missed.
SummaryOutcome summarize_miss(const CodeFragment& fragment, const SummaryKey& key, const PromptTemplate& tmpl,
                              ChatProvider& provider, SummaryStore& store, const SummarizeOptions& options,
                              CallStats& stats) {
    SummaryOutcome outcome;
    outcome.fragment_id = fragment.id;
    outcome.provider_calls = 1;
    std::string response;
    try {
        response = chat_complete(provider, make_request(render_prompt(tmpl, fragment), options), options.retry, &stats);
    } catch (const ProviderError& e) {
        throw ProviderError(e.kind(), fmt::format("fragment '{}': {}", fragment.id, e.detail()), e.retryable());
    }
    try {
        auto extracted = extract_first_sentence_ex(response, tmpl.language(), options.extract);
        outcome.preamble_skipped = extracted.preamble_skipped;
        SummaryRecord record{key, fragment.id, std::move(extracted.text), false, utc_timestamp()};
        store.put(record);
        outcome.record = std::move(record);
    } catch (const ExtractionFailed& e) {
        outcome.failure = fmt::format("extraction failed: {}", e.what());
    }
    return outcome;
}

}  // namespace

SummaryOutcome summarize_fragment(const CodeFragment& fragment, const PromptTemplate& tmpl, ChatProvider& provider,
                                  SummaryStore& store, const SummarizeOptions& options) {
    const auto key = summary_key(fragment, tmpl, provider);
    if (auto cached = store.get(key)) {
        SummaryOutcome outcome;
        outcome.fragment_id = fragment.id;
        outcome.record = std::move(cached);
        outcome.cache_hit = true;
        return outcome;
    }
    CallStats stats;
    return summarize_miss(fragment, key, tmpl, provider, store, options, stats);
}

double SummarySet::failure_ratio() const {
    return stats.fragments == 0 ? 0.0 : static_cast<double>(stats.failures) / static_cast<double>(stats.fragments);
}

SummarySet summarize_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatProvider& provider,
                            SummaryStore& store, const SummarizeOptions& options) {
    if (options.parallelism < 1) {
        throw std::invalid_argument("parallelism must be at least 1");
    }
    const std::size_t n = corpus.size();
    std::vector<SummaryKey> keys(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        keys[i] = summary_key(corpus[i], tmpl, provider);
    }

    // One slot per distinct key, represented by its first fragment.
    std::map<SummaryKey, std::size_t> slot_of;
    std::vector<std::size_t> representative;
    std::vector<std::size_t> fragment_slot(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [it, inserted] = slot_of.emplace(keys[i], representative.size());
        if (inserted) {
            representative.push_back(i);
        }
        fragment_slot[i] = it->second;
    }

    struct Slot {
        std::optional<SummaryRecord> record;
        std::string failure;
        bool was_cached = false;
    };
    std::vector<Slot> slots(representative.size());
    std::vector<std::size_t> misses;
    for (std::size_t s = 0; s < representative.size(); ++s) {
        if (auto cached = store.get(keys[representative[s]])) {
            slots[s].record = std::move(cached);
            slots[s].was_cached = true;
        } else {
            misses.push_back(s);
        }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::atomic<std::size_t> attempts{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    const auto worker = [&] {
        for (;;) {
            const auto m = next.fetch_add(1);
            if (m >= misses.size() || abort.load()) {
                return;
            }
            const auto s = misses[m];
            const auto& fragment = corpus[representative[s]];
            CallStats stats;
            try {
                auto outcome = summarize_miss(fragment, keys[representative[s]], tmpl, provider, store, options, stats);
                slots[s].record = std::move(outcome.record);
                slots[s].failure = std::move(outcome.failure);
            } catch (const ProviderError& e) {
                if (e.kind() == ProviderErrorKind::auth) {
                    std::lock_guard<std::mutex> lock(fatal_mutex);
                    if (!fatal) {
                        fatal = std::current_exception();
                    }
                    abort = true;
                }
                slots[s].failure = e.what();
            } catch (const StoreError&) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) {
                    fatal = std::current_exception();
                }
                abort = true;
            }
            attempts += stats.attempts;
        }
    };
    const auto threads = std::min(options.parallelism, std::max<std::size_t>(misses.size(), 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    store.flush();
    if (fatal) {
        std::rethrow_exception(fatal);
    }

    SummarySet set;
    set.entries.reserve(n);
    set.stats.fragments = n;
    set.stats.calls = misses.size();
    set.stats.attempts = attempts.load();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& slot = slots[fragment_slot[i]];
        SummaryEntry entry;
        entry.fragment_id = corpus[i].id;
        if (slot.record) {
            entry.summary = Summary{slot.record->summary, corpus[i].id, tmpl.language(), slot.record->stopwords_removed};
        } else {
            entry.failure = slot.failure;
            ++set.stats.failures;
        }
        if (slot.was_cached) {
            ++set.stats.hits;
        }
        set.entries.push_back(std::move(entry));
    }
    if (set.failure_ratio() > options.failure_cap) {
        throw FailureCapExceeded(fmt::format("{} of {} fragments failed (cap {:.2f}%)", set.stats.failures, n,
                                             options.failure_cap * 100.0),
                                 std::move(set));
    }
    return set;
}

}  // namespace codesum
