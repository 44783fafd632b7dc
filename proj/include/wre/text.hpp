#pragma once

// UTF-8 helpers over ICU character properties.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wre::text {

struct CodePoint {
    char32_t value;
    std::size_t offset;  // byte offset of the first code unit
    std::size_t length;  // in bytes
};

/// Decodes UTF-8; malformed sequences decode as U+FFFD.
std::vector<CodePoint> decode(std::string_view utf8);

bool is_valid_utf8(std::string_view utf8);
bool is_whitespace(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);
/// Word character as ICU regular expressions define \\w: alphabetic, mark,
/// decimal digit, connector punctuation, ZWNJ or ZWJ.
bool is_word(char32_t c);
/// Combining mark (general category M).
bool is_mark(char32_t c);
/// Letter or digit.
bool is_alnum(char32_t c);

std::string nfc(std::string_view utf8);

/// Canonical first-name form: NFC, then each hyphen-separated part gets an
/// uppercase initial and a lowercase remainder ("JEAN-PIERRE" -> "Jean-Pierre").
std::string canonical_name(std::string_view utf8);

/// Strips leading and trailing Unicode whitespace.
std::string_view trim(std::string_view utf8);

}  // namespace wre::text
