#pragma once

// Lexicometric estimate of oral references to women: transcript hallucination
// filtering, first-name extraction, and per-utterance attribution statistics.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wre/core.hpp"
#include "wre/ingest.hpp"

namespace wre::namex {

/// True when the transcript line is a known subtitle-credit hallucination:
/// optional leading non-word characters, then "sous-titrage" or
/// "sous-titres par", case-insensitively.
bool is_hallucination(std::string_view text);
inline bool filter_hallucination(const Utterance& u) { return !is_hallucination(u.text); }

struct Token {
    std::string text;
    std::size_t offset = 0;         // UTF-8 byte offset of `text` in the source
    std::string separator_before;   // everything between the previous token and this one
};

struct Tokenization {
    std::vector<Token> tokens;
    std::string trailing;  // separator after the last token

    /// True when the separator before token `i` holds anything but whitespace.
    bool punctuated_before(std::size_t i) const;
};

/// Splits on Unicode whitespace and peels leading/trailing non-alphanumeric
/// characters off each chunk into the separators. Inner characters (hyphens,
/// apostrophes) stay in the token.
Tokenization tokenize(std::string_view text);

/// Initial uppercase letter and at least one lowercase letter after it.
bool looks_like_proper_name(std::string_view token);

struct NameHit {
    std::string surface;
    double female_prob = 0.0;
    std::size_t char_offset = 0;  // UTF-8 byte offset in the utterance text

    friend bool operator==(const NameHit&, const NameHit&) = default;
};

struct UtteranceNameStats {
    std::vector<NameHit> hits;

    double female_mass() const;
    /// Mean attribution probability; empty without hits.
    std::optional<double> mean_female_prob() const;
};

class NameExtractor {
public:
    explicit NameExtractor(const NameLexicon& lexicon, std::vector<std::string> stop_list = {});

    /// Counts first names: proper-name shaped tokens found in the lexicon,
    /// keeping only the first of a run of candidates separated by whitespace alone.
    UtteranceNameStats extract(std::string_view text) const;
    UtteranceNameStats extract(const Utterance& u) const { return extract(u.text); }

private:
    const NameLexicon* lexicon_;
    std::set<std::string, std::less<>> stop_list_;
};

MetricValue wqr(std::span<const NameHit> hits);

}  // namespace wre::namex
