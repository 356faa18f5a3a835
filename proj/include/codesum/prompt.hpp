#pragma once

#include "codesum/dataset.hpp"

#include <filesystem>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>

namespace codesum {

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when no usable summary text can be obtained from a response.
class ExtractionFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LanguageKind { english, chinese, other };

/// Natural language of the prompt (and hence of the summary the LLM returns).
class PromptLanguage {
public:
    static PromptLanguage english() { return PromptLanguage(LanguageKind::english, "en"); }
    static PromptLanguage chinese() { return PromptLanguage(LanguageKind::chinese, "zh"); }
    static PromptLanguage other(std::string tag);
    // "en", "english", "zh", "chinese" map to the built-ins; anything else is `other`.
    static PromptLanguage parse(std::string_view tag);

    LanguageKind kind() const { return kind_; }
    const std::string& code() const { return code_; }

    friend bool operator==(const PromptLanguage&, const PromptLanguage&) = default;

private:
    PromptLanguage(LanguageKind kind, std::string code) : kind_(kind), code_(std::move(code)) {}
    LanguageKind kind_;
    std::string code_;
};

inline constexpr std::string_view kCodePlaceholder = "{code}";

class PromptTemplate {
public:
    // Throws PromptError unless `body` contains exactly one `{code}` placeholder.
    PromptTemplate(PromptLanguage language, std::string body);

    static PromptTemplate english_default();
    static PromptTemplate chinese_default();
    static PromptTemplate default_for(const PromptLanguage& language);
    static PromptTemplate from_file(const std::filesystem::path& path, PromptLanguage language);

    const PromptLanguage& language() const { return language_; }
    const std::string& body() const { return body_; }

private:
    PromptLanguage language_;
    std::string body_;
    std::size_t placeholder_pos_;

    friend std::string render_prompt(const PromptTemplate&, const CodeFragment&);
};

// Single-pass substitution of the fragment text into the template.
std::string render_prompt(const PromptTemplate& tmpl, const CodeFragment& fragment);

struct ExtractOptions {
    // Leading lines matching this are treated as role-play preamble and skipped.
    std::regex preamble{R"(^.*(:|：)\s*$)"};
};

struct ExtractedSentence {
    std::string text;
    bool preamble_skipped = false;
};

ExtractedSentence extract_first_sentence_ex(std::string_view response, const PromptLanguage& language,
                                            const ExtractOptions& options = {});

/// First sentence of an LLM response (up to and including the first terminal
/// delimiter of `language`), or the first content line when no delimiter occurs.
/// Throws ExtractionFailed on blank input.
std::string extract_first_sentence(std::string_view response, const PromptLanguage& language,
                                   const ExtractOptions& options = {});

struct Summary {
    std::string text;
    std::string fragment_id;
    PromptLanguage language = PromptLanguage::english();
    bool stopwords_removed = false;

    friend bool operator==(const Summary&, const Summary&) = default;
};

using StopList = std::unordered_set<std::string>;

// One token per line; blank lines and lines starting with '#' are ignored.
StopList load_stoplist(const std::filesystem::path& path);

/// Removes stop words. Whitespace tokens (ASCII case-insensitive) for
/// English/other; longest match over the character stream for Chinese.
/// Throws ExtractionFailed if nothing but stop words remains.
Summary remove_stop_words(const Summary& summary, const StopList& stoplist);

}  // namespace codesum
