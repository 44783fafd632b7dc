#include "wre/text.hpp"

#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace wre::text {

std::vector<CodePoint> decode(std::string_view utf8) {
    std::vector<CodePoint> out;
    out.reserve(utf8.size());
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto n = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < n) {
        const int32_t start = i;
        UChar32 c = 0;
        U8_NEXT(s, i, n, c);
        if (c < 0) c = 0xFFFD;
        out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                       static_cast<std::size_t>(i - start)});
    }
    return out;
}

bool is_valid_utf8(std::string_view utf8) {
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto n = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < n) {
        UChar32 c = 0;
        U8_NEXT(s, i, n, c);
        if (c < 0) return false;
    }
    return true;
}

bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_upper(char32_t c) { return u_isupper(static_cast<UChar32>(c)); }
bool is_lower(char32_t c) { return u_islower(static_cast<UChar32>(c)); }
bool is_alnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }
bool is_mark(char32_t c) { return (U_GET_GC_MASK(static_cast<UChar32>(c)) & U_GC_M_MASK) != 0; }

bool is_word(char32_t c) {
    const auto u = static_cast<UChar32>(c);
    return u_hasBinaryProperty(u, UCHAR_ALPHABETIC) || is_mark(c) ||
           u_charType(u) == U_DECIMAL_DIGIT_NUMBER ||
           u_charType(u) == U_CONNECTOR_PUNCTUATION || c == 0x200C || c == 0x200D;
}

namespace {

const icu::Normalizer2& nfc_normalizer() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || norm == nullptr)
        throw std::runtime_error("ICU NFC normalizer unavailable");
    return *norm;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

}  // namespace

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const auto src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    const icu::UnicodeString out = nfc_normalizer().normalize(src, status);
    if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
    return to_utf8(out);
}

std::string canonical_name(std::string_view utf8) {
    const std::string normalized = nfc(utf8);
    std::string out;
    out.reserve(normalized.size());
    std::size_t part_start = 0;
    while (part_start <= normalized.size()) {
        std::size_t hyphen = normalized.find('-', part_start);
        if (hyphen == std::string::npos) hyphen = normalized.size();
        const std::string_view part(normalized.data() + part_start, hyphen - part_start);
        if (!part.empty()) {
            auto ustr = icu::UnicodeString::fromUTF8(
                icu::StringPiece(part.data(), static_cast<int32_t>(part.size())));
            const UChar32 first = ustr.char32At(0);
            icu::UnicodeString rest = ustr.tempSubString(U16_LENGTH(first));
            rest.toLower(icu::Locale::getRoot());
            icu::UnicodeString head(u_toupper(first));
            out += to_utf8(head.append(rest));
        }
        if (hyphen == normalized.size()) break;
        out += '-';
        part_start = hyphen + 1;
    }
    return nfc(out);
}

std::string_view trim(std::string_view utf8) {
    const auto cps = decode(utf8);
    std::size_t lo = 0, hi = cps.size();
    while (lo < hi && is_whitespace(cps[lo].value)) ++lo;
    while (hi > lo && is_whitespace(cps[hi - 1].value)) --hi;
    if (lo == hi) return {};
    const std::size_t begin = cps[lo].offset;
    const std::size_t end = cps[hi - 1].offset + cps[hi - 1].length;
    return utf8.substr(begin, end - begin);
}

}  // namespace wre::text
