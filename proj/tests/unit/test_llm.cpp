#include "codesum/llm.hpp"

#include "mock_server.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <atomic>

#include <fmt/format.h>

using namespace codesum;
using nlohmann::json;
using testing::TempDir;

namespace {

ChatRequest user_request(std::string prompt, int max_tokens = 16) {
    ChatRequest r;
    r.model = "test-model";
    r.messages.push_back({Role::user, std::move(prompt)});
    r.max_output_tokens = max_tokens;
    return r;
}

RetryPolicy instant_retry(std::vector<std::chrono::milliseconds>* waits = nullptr) {
    RetryPolicy p;
    p.sleep = [waits](std::chrono::milliseconds d) {
        if (waits) {
            waits->push_back(d);
        }
    };
    return p;
}

CodeFragment fragment(std::string id, std::string text, int label = 1) {
    CodeFragment f;
    f.id = std::move(id);
    f.text = std::move(text);
    f.label = label;
    return f;
}

// Fixture keyed on a marker inside each fragment's code.
class ScriptedProvider final : public ChatProvider {
public:
    std::function<std::string(const std::string&)> respond;
    std::atomic<int> calls{0};
    std::string id() const override { return "scripted"; }
    std::string complete(const ChatRequest& r) override {
        ++calls;
        return respond(r.messages.back().content);
    }
};

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("request validation") {
    ChatRequest r;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.messages.push_back({Role::user, "hi"});
    CHECK_NOTHROW(r.validate());
    r.messages.push_back({Role::assistant, "hello"});
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("fixture provider echoes its canned response") {
    FixtureChatProvider p;
    p.add_exact("prompt-1", "Reads n, counts in/out degrees, prints sink nodes.");
    CHECK(chat_complete(p, user_request("prompt-1")) == "Reads n, counts in/out degrees, prints sink nodes.");
    CHECK(p.calls() == 1);
    try {
        chat_complete(p, user_request("unknown"));
        FAIL("expected a ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::malformed_response);
        CHECK_FALSE(e.retryable());
    }
}

TEST_CASE("fixture file: exact entries win, then first matching substring") {
    TempDir dir;
    testing::write_file(dir / "f.jsonl", R"({"match": "alpha", "response": "first"}
{"match": "alp", "response": "second"}
{"prompt": "say alpha", "response": "exact"}
{"match": "boom", "error": "rate_limited"}
)");
    auto p = FixtureChatProvider::from_file(dir / "f.jsonl");
    CHECK(p->complete(user_request("say alpha")) == "exact");
    CHECK(p->complete(user_request("xx alpha xx")) == "first");
    CHECK(p->complete(user_request("alp only")) == "second");
    CHECK_THROWS_AS(p->complete(user_request("boom")), ProviderError);
}

TEST_CASE("context preflight fails without a provider call") {
    FixtureChatProvider p("fixture", 4096);
    p.add_match("x", "never");
    const auto big = user_request(std::string(16'000, 'x'), 97);
    try {
        chat_complete(p, big);
        FAIL("expected context_length_exceeded");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::context_length_exceeded);
        CHECK_FALSE(e.retryable());
        CHECK(e.detail() == "This model's maximum context length is 4096 tokens. However, you requested 4097 "
                            "tokens (4000 in the messages, 97 in the completion). Please reduce the length of "
                            "the messages or completion.");
    }
    CHECK(p.calls() == 0);
    CHECK(estimate_prompt_tokens(user_request("中文字符")) == 1);
    CHECK(estimate_prompt_tokens(user_request("abcde")) == 2);
}

TEST_CASE("HTTP error classification") {
    const auto ctx = classify_http_error(
        400, R"({"error":{"message":"This model's maximum context length is 4096 tokens.","type":"invalid_request_error","param":"messages","code":"context_length_exceeded"}})");
    CHECK(ctx.kind() == ProviderErrorKind::context_length_exceeded);
    CHECK_FALSE(ctx.retryable());
    CHECK(classify_http_error(429, "{}").kind() == ProviderErrorKind::rate_limited);
    CHECK(classify_http_error(429, "{}").retryable());
    CHECK_FALSE(classify_http_error(429, R"({"error":{"code":"insufficient_quota"}})").retryable());
    CHECK(classify_http_error(401, "").kind() == ProviderErrorKind::auth);
    CHECK_FALSE(classify_http_error(401, "").retryable());
    CHECK(classify_http_error(503, "").kind() == ProviderErrorKind::network);
    CHECK(classify_http_error(503, "").retryable());
    CHECK(classify_http_error(418, "").kind() == ProviderErrorKind::malformed_response);
}

TEST_CASE("backoff is exponential and capped") {
    RetryPolicy p;
    p.initial_backoff = std::chrono::milliseconds(100);
    p.max_backoff = std::chrono::milliseconds(500);
    CHECK(p.backoff(0).count() == 100);
    CHECK(p.backoff(1).count() == 200);
    CHECK(p.backoff(2).count() == 400);
    CHECK(p.backoff(3).count() == 500);
    CHECK(p.backoff(10).count() == 500);
}

TEST_CASE("HTTP provider succeeds after two 429 responses") {
    testing::MockServer mock;
    std::atomic<int> hits{0};
    json seen;
    mock.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 429;
            res.set_content(R"({"error":{"message":"slow down","code":"rate_limit_exceeded"}})", "application/json");
            return;
        }
        seen = json::parse(req.body);
        seen["auth"] = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Adds two numbers."}}]})",
                        "application/json");
    });
    mock.start();

    HttpChatProvider provider({"openai:test", mock.base_url(), "sk-test", std::nullopt, std::chrono::seconds(5)});
    std::vector<std::chrono::milliseconds> waits;
    CallStats stats;
    const auto out = chat_complete(provider, user_request("Summarize: int add(int a,int b)"), instant_retry(&waits),
                                   &stats);
    CHECK(out == "Adds two numbers.");
    CHECK(stats.retries == 2);
    CHECK(stats.attempts == 3);
    CHECK(waits == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500),
                                                          std::chrono::milliseconds(1000)});
    CHECK(seen["model"] == "test-model");
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["temperature"] == 0.0);
    CHECK(seen["max_tokens"] == 16);
    CHECK(seen["auth"] == "Bearer sk-test");
}

TEST_CASE("HTTP provider maps the context-length payload and gives up on auth") {
    testing::MockServer mock;
    std::atomic<int> hits{0};
    mock.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        if (req.get_header_value("Authorization").empty()) {
            res.status = 401;
            res.set_content(R"({"error":{"message":"no key","code":"invalid_api_key"}})", "application/json");
            return;
        }
        res.status = 400;
        res.set_content(R"({"error":{"message":"This model's maximum context length is 4096 tokens.","code":"context_length_exceeded"}})",
                        "application/json");
    });
    mock.start();

    HttpChatProvider keyed({"p", mock.base_url(), "k", std::nullopt, std::chrono::seconds(5)});
    CHECK_THROWS_WITH_AS(chat_complete(keyed, user_request("x"), instant_retry()),
                         "context_length_exceeded: This model's maximum context length is 4096 tokens.",
                         ProviderError);
    HttpChatProvider anonymous({"p", mock.base_url(), "", std::nullopt, std::chrono::seconds(5)});
    try {
        chat_complete(anonymous, user_request("x"), instant_retry());
        FAIL("expected auth error");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::auth);
    }
    CHECK(hits == 2);
}

TEST_CASE("unreachable endpoint is a network error after retries") {
    HttpChatProvider p({"p", "http://127.0.0.1:1/v1", "", std::nullopt, std::chrono::seconds(1)});
    CallStats stats;
    try {
        chat_complete(p, user_request("x"), instant_retry(), &stats);
        FAIL("expected network error");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::network);
    }
    CHECK(stats.attempts == 5);
}

TEST_CASE("response decoding") {
    CHECK(HttpChatProvider::decode_response(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
    CHECK_THROWS_AS(HttpChatProvider::decode_response(R"({"choices":[]})"), ProviderError);
    CHECK_THROWS_AS(HttpChatProvider::decode_response("not json"), ProviderError);
}

TEST_CASE("summarize_fragment caches by content, provider and language") {
    TempDir dir;
    auto store = SummaryStore::open(dir / "s.jsonl");
    FixtureChatProvider p;
    p.add_match("int main", "Sure:\nPrints a greeting. Then exits.");
    const auto f = fragment("1/a.c", "int main(){puts(\"hi\");}");
    const auto en = PromptTemplate::english_default();

    const auto first = summarize_fragment(f, en, p, store);
    CHECK(p.calls() == 1);
    CHECK_FALSE(first.cache_hit);
    CHECK(first.preamble_skipped);
    REQUIRE(first.record);
    CHECK(first.record->summary == "Prints a greeting.");
    CHECK(first.record->key.fragment_hash.size() == 64);
    CHECK(store.size() == 1);

    const auto second = summarize_fragment(f, en, p, store);
    CHECK(p.calls() == 1);
    CHECK(second.cache_hit);
    CHECK(second.record->summary == "Prints a greeting.");

    summarize_fragment(f, PromptTemplate::chinese_default(), p, store);
    CHECK(p.calls() == 2);
    CHECK(store.size() == 2);
}

TEST_CASE("summarize_fragment records extraction failures and names the fragment on provider errors") {
    TempDir dir;
    auto store = SummaryStore::open(dir / "s.jsonl");
    FixtureChatProvider p;
    p.add_match("EMPTY", "   ");
    p.add_entry({std::nullopt, "QUOTA", std::nullopt, ProviderErrorKind::auth});
    const auto en = PromptTemplate::english_default();

    const auto failed = summarize_fragment(fragment("1/e.c", "EMPTY"), en, p, store);
    CHECK_FALSE(failed.record);
    CHECK(failed.failure.find("extraction failed") == 0);
    CHECK(store.size() == 0);

    CHECK_THROWS_WITH_AS(summarize_fragment(fragment("1/q.c", "QUOTA"), en, p, store),
                         "auth: fragment '1/q.c': fixture error", ProviderError);
}

TEST_CASE("summarize_corpus: one call per distinct text, aligned output") {
    TempDir dir;
    auto store = SummaryStore::open(dir / "s.jsonl");
    ScriptedProvider p;
    p.respond = [](const std::string& prompt) {
        const auto pos = prompt.find("ID");
        return "Handles item " + prompt.substr(pos + 2, 2) + ".";
    };
    std::vector<CodeFragment> fs;
    for (int i = 0; i < 40; ++i) {
        fs.push_back(fragment(fmt::format("{}/{:02d}.c", i % 4, i), fmt::format("ID{:02d}", i % 30)));
    }
    const Corpus corpus("c", fs);
    SummarizeOptions options;
    options.parallelism = 4;
    const auto set = summarize_corpus(corpus, PromptTemplate::english_default(), p, store, options);
    CHECK(p.calls == 30);
    CHECK(set.stats.calls == 30);
    CHECK(set.stats.hits == 0);
    REQUIRE(set.entries.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(set.entries[i].fragment_id == corpus[i].id);
        CHECK(set.entries[i].summary->text == fmt::format("Handles item {:02d}.", i % 30));
    }

    const auto warm = summarize_corpus(corpus, PromptTemplate::english_default(), p, store, options);
    CHECK(p.calls == 30);
    CHECK(warm.stats.calls == 0);
    CHECK(warm.stats.hits == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(warm.entries[i].summary == set.entries[i].summary);
    }
}

TEST_CASE("summarize_corpus: failure accounting and the cap") {
    TempDir dir;
    std::vector<CodeFragment> fs;
    for (int i = 0; i < 50; ++i) {
        fs.push_back(fragment(fmt::format("1/{:02d}.c", i), fmt::format("code {}", i)));
    }
    const Corpus corpus("c", fs);
    FixtureChatProvider p;
    p.add_match("code 7\n", "");
    p.add_match("code 8\n", "\n\n");
    p.add_match("code", "Does something.");
    const PromptTemplate tmpl(PromptLanguage::english(), "Summarize:\n{code}\n");

    SummarizeOptions lenient;
    lenient.failure_cap = 0.05;
    {
        auto store = SummaryStore::open(dir / "a.jsonl");
        const auto set = summarize_corpus(corpus, tmpl, p, store, lenient);
        CHECK(set.stats.failures == 2);
        CHECK(store.size() == 48);
        CHECK_FALSE(set.entries[7].summary);
        CHECK_FALSE(set.entries[8].summary);
        CHECK(set.entries[9].summary);
    }
    auto store = SummaryStore::open(dir / "b.jsonl");
    try {
        summarize_corpus(corpus, tmpl, p, store);
        FAIL("expected the 1% cap to trip");
    } catch (const FailureCapExceeded& e) {
        CHECK(e.set().stats.failures == 2);
        CHECK(e.set().failure_ratio() == doctest::Approx(0.04));
    }
}

TEST_CASE("summarize_corpus aborts on auth errors") {
    TempDir dir;
    auto store = SummaryStore::open(dir / "s.jsonl");
    FixtureChatProvider p;
    p.add_entry({std::nullopt, "x", std::nullopt, ProviderErrorKind::auth});
    const Corpus corpus("c", {fragment("1/a.c", "x1"), fragment("1/b.c", "x2")});
    CHECK_THROWS_AS(summarize_corpus(corpus, PromptTemplate::english_default(), p, store), ProviderError);
}

}  // TEST_SUITE
