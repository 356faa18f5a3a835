#include "codesum/prompt.hpp"

#include "codesum/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <span>
#include <vector>

namespace codesum {

PromptLanguage PromptLanguage::other(std::string tag) {
    if (tag.empty()) {
        throw PromptError("language tag must not be empty");
    }
    return PromptLanguage(LanguageKind::other, std::move(tag));
}

PromptLanguage PromptLanguage::parse(std::string_view tag) {
    const auto lowered = text::ascii_lower(text::trim(tag));
    if (lowered == "en" || lowered == "english") {
        return english();
    }
    if (lowered == "zh" || lowered == "chinese") {
        return chinese();
    }
    return other(lowered);
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t count = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

}  // namespace

PromptTemplate::PromptTemplate(PromptLanguage language, std::string body)
    : language_(std::move(language)), body_(std::move(body)) {
    if (count_occurrences(body_, kCodePlaceholder) != 1) {
        throw PromptError("prompt template must contain exactly one {code} placeholder");
    }
    placeholder_pos_ = body_.find(kCodePlaceholder);
}

PromptTemplate PromptTemplate::english_default() {
    return PromptTemplate(PromptLanguage::english(),
                          "Now that you are a programmer, read the following code in detail and succinctly "
                          "summarize the function of this code in one sentence without explaining the process:\n"
                          "{code}");
}

PromptTemplate PromptTemplate::chinese_default() {
    return PromptTemplate(PromptLanguage::chinese(),
                          "现在你是一名程序员，请仔细阅读以下代码，并用一句话简洁地概括这段代码的功能，"
                          "不要解释具体过程：\n"
                          "{code}");
}

PromptTemplate PromptTemplate::default_for(const PromptLanguage& language) {
    switch (language.kind()) {
        case LanguageKind::english: return english_default();
        case LanguageKind::chinese: return chinese_default();
        case LanguageKind::other: break;
    }
    throw PromptError(fmt::format("no built-in template for language '{}'; supply a template file", language.code()));
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path, PromptLanguage language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PromptError(fmt::format("cannot read template '{}'", path.string()));
    }
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // Drop one trailing newline.
    if (!body.empty() && body.back() == '\n') {
        body.pop_back();
    }
    return PromptTemplate(std::move(language), std::move(body));
}

std::string render_prompt(const PromptTemplate& tmpl, const CodeFragment& fragment) {
    std::string out;
    out.reserve(tmpl.body_.size() - kCodePlaceholder.size() + fragment.text.size());
    out.append(tmpl.body_, 0, tmpl.placeholder_pos_);
    out.append(fragment.text);
    out.append(tmpl.body_, tmpl.placeholder_pos_ + kCodePlaceholder.size());
    return out;
}

namespace {

constexpr std::array<std::string_view, 3> kEnglishDelimiters = {".", "!", "?"};
constexpr std::array<std::string_view, 3> kChineseDelimiters = {"。", "！", "？"};

bool is_lower_or_digit(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

bool matches_any(std::string_view s, std::size_t pos, std::span<const std::string_view> delims,
                 std::size_t& len) {
    for (auto d : delims) {
        if (s.substr(pos, d.size()) == d) {
            len = d.size();
            return true;
        }
    }
    return false;
}

// End offset (exclusive) of the first sentence in `line`, or npos.
std::size_t first_sentence_end(std::string_view line, LanguageKind kind) {
    const bool english = kind != LanguageKind::chinese;
    const bool chinese = kind != LanguageKind::english;
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::size_t len = 0;
        if (english && matches_any(line, pos, kEnglishDelimiters, len)) {
            // Abbreviation guard: "e.g", "3.14" and the like do not end a sentence.
            const bool guarded = line[pos] == '.' && pos + 1 < line.size() && is_lower_or_digit(line[pos + 1]);
            if (!guarded) {
                return pos + len;
            }
        } else if (chinese && matches_any(line, pos, kChineseDelimiters, len)) {
            return pos + len;
        }
        pos += text::codepoint_length(line, pos);
    }
    return std::string_view::npos;
}

}  // namespace

ExtractedSentence extract_first_sentence_ex(std::string_view response, const PromptLanguage& language,
                                            const ExtractOptions& options) {
    const auto trimmed = text::trim(response);
    if (trimmed.empty()) {
        throw ExtractionFailed("empty response");
    }
    std::vector<std::string_view> content;
    for (auto line : text::split_lines(trimmed)) {
        line = text::trim(line);
        if (!line.empty()) {
            content.push_back(line);
        }
    }
    std::size_t idx = 0;
    while (idx + 1 < content.size() && std::regex_match(content[idx].begin(), content[idx].end(), options.preamble)) {
        ++idx;
    }
    const auto line = content[idx];
    const auto end = first_sentence_end(line, language.kind());
    ExtractedSentence out;
    out.text = std::string(end == std::string_view::npos ? line : text::trim(line.substr(0, end)));
    out.preamble_skipped = idx > 0;
    return out;
}

std::string extract_first_sentence(std::string_view response, const PromptLanguage& language,
                                   const ExtractOptions& options) {
    return extract_first_sentence_ex(response, language, options).text;
}

StopList load_stoplist(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PromptError(fmt::format("cannot read stop-word list '{}'", path.string()));
    }
    StopList list;
    std::string line;
    while (std::getline(in, line)) {
        const auto token = text::trim(line);
        if (token.empty() || token.front() == '#') {
            continue;
        }
        list.emplace(token);
    }
    return list;
}

namespace {

bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

std::string_view strip_ascii_punct(std::string_view token) {
    while (!token.empty() && is_ascii_punct(token.front())) {
        token.remove_prefix(1);
    }
    while (!token.empty() && is_ascii_punct(token.back())) {
        token.remove_suffix(1);
    }
    return token;
}

std::string remove_whitespace_tokens(std::string_view input, const StopList& stoplist) {
    StopList lowered;
    for (const auto& s : stoplist) {
        lowered.insert(text::ascii_lower(s));
    }
    std::string out;
    std::size_t pos = 0;
    constexpr std::string_view ws = " \t\r\n\f\v";
    while (pos < input.size()) {
        const auto start = input.find_first_not_of(ws, pos);
        if (start == std::string_view::npos) {
            break;
        }
        auto stop = input.find_first_of(ws, start);
        if (stop == std::string_view::npos) {
            stop = input.size();
        }
        const auto token = input.substr(start, stop - start);
        const auto core = text::ascii_lower(strip_ascii_punct(token));
        if (!lowered.contains(core) && !lowered.contains(text::ascii_lower(token))) {
            if (!out.empty()) {
                out.push_back(' ');
            }
            out.append(token);
        }
        pos = stop;
    }
    return out;
}

std::string remove_longest_matches_once(std::string_view input, const std::vector<std::string>& by_length) {
    std::string out;
    out.reserve(input.size());
    std::size_t pos = 0;
    while (pos < input.size()) {
        bool removed = false;
        for (const auto& stop : by_length) {
            if (input.substr(pos, stop.size()) == stop) {
                pos += stop.size();
                removed = true;
                break;
            }
        }
        if (!removed) {
            const auto len = text::codepoint_length(input, pos);
            out.append(input.substr(pos, len));
            pos += len;
        }
    }
    return out;
}

std::string remove_character_stream(std::string_view input, const StopList& stoplist) {
    std::vector<std::string> by_length;
    for (const auto& s : stoplist) {
        if (!s.empty()) {
            by_length.push_back(s);
        }
    }
    // Longest first, then lexicographic.
    std::sort(by_length.begin(), by_length.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    std::string current(input);
    // Iterate to a fixpoint: a removal can join two halves into a new stop word.
    for (;;) {
        auto next = remove_longest_matches_once(current, by_length);
        if (next == current) {
            break;
        }
        current = std::move(next);
    }
    return std::string(text::trim(current));
}

}  // namespace

Summary remove_stop_words(const Summary& summary, const StopList& stoplist) {
    Summary out = summary;
    out.stopwords_removed = true;
    if (stoplist.empty()) {
        return out;
    }
    out.text = summary.language.kind() == LanguageKind::chinese ? remove_character_stream(summary.text, stoplist)
                                                               : remove_whitespace_tokens(summary.text, stoplist);
    if (out.text.empty()) {
        throw ExtractionFailed(fmt::format("summary of '{}' consists only of stop words", summary.fragment_id));
    }
    return out;
}

}  // namespace codesum
