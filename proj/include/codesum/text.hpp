#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace codesum::text {

// Replaces every invalid UTF-8 sequence with U+FFFD. Valid input is returned unchanged.
std::string sanitize_utf8(std::string_view bytes);

// Byte length of the UTF-8 sequence starting at s[pos] (1 for stray bytes).
std::size_t codepoint_length(std::string_view s, std::size_t pos);

// Decodes the code point at s[pos]; returns U+FFFD for malformed input.
char32_t decode_codepoint(std::string_view s, std::size_t pos);

std::string_view trim(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view s);

std::string ascii_lower(std::string_view s);

bool is_cjk_ideograph(char32_t cp);
bool is_cjk_punctuation(char32_t cp);

}  // namespace codesum::text
