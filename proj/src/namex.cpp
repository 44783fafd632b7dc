#include "wre/namex.hpp"

#include <algorithm>

#include "wre/text.hpp"

namespace wre::namex {

namespace {

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

}  // namespace

bool is_hallucination(std::string_view text) {
    const auto cps = text::decode(text);
    std::size_t i = 0;
    while (i < cps.size() && !text::is_word(cps[i].value)) ++i;
    auto match = [&](std::u32string_view literal) {
        if (i + literal.size() > cps.size()) return false;
        for (std::size_t k = 0; k < literal.size(); ++k)
            if (ascii_lower(cps[i + k].value) != literal[k]) return false;
        return true;
    };
    if (!match(U"sous-titr")) return false;
    i += 9;
    return match(U"age") || match(U"es par");
}

bool Tokenization::punctuated_before(std::size_t i) const {
    for (const auto& cp : text::decode(tokens.at(i).separator_before))
        if (!text::is_whitespace(cp.value)) return true;
    return false;
}

Tokenization tokenize(std::string_view input) {
    Tokenization out;
    const auto cps = text::decode(input);
    std::size_t sep_start = 0;  // byte offset where the pending separator begins
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && text::is_whitespace(cps[i].value)) ++i;
        const std::size_t chunk_begin = i;
        while (i < cps.size() && !text::is_whitespace(cps[i].value)) ++i;
        std::size_t lo = chunk_begin, hi = i;
        while (lo < hi && !text::is_alnum(cps[lo].value)) ++lo;
        while (hi > lo) {
            // Combining marks stay attached to the letter they follow.
            std::size_t j = hi - 1;
            while (j > lo && text::is_mark(cps[j].value)) --j;
            if (text::is_alnum(cps[j].value)) break;
            --hi;
        }
        if (lo == hi) continue;  // punctuation-only chunk stays in the separator
        const std::size_t begin = cps[lo].offset;
        const std::size_t end = cps[hi - 1].offset + cps[hi - 1].length;
        out.tokens.push_back({std::string(input.substr(begin, end - begin)), begin,
                              std::string(input.substr(sep_start, begin - sep_start))});
        sep_start = end;
    }
    out.trailing = std::string(input.substr(sep_start));
    return out;
}

bool looks_like_proper_name(std::string_view token) {
    const auto cps = text::decode(token);
    if (cps.empty() || !text::is_upper(cps.front().value)) return false;
    return std::any_of(cps.begin() + 1, cps.end(),
                       [](const text::CodePoint& cp) { return text::is_lower(cp.value); });
}

double UtteranceNameStats::female_mass() const {
    double sum = 0.0;
    for (const auto& h : hits) sum += h.female_prob;
    return sum;
}

std::optional<double> UtteranceNameStats::mean_female_prob() const {
    if (hits.empty()) return std::nullopt;
    return female_mass() / static_cast<double>(hits.size());
}

NameExtractor::NameExtractor(const NameLexicon& lexicon, std::vector<std::string> stop_list)
    : lexicon_(&lexicon) {
    for (auto& name : stop_list) stop_list_.insert(text::canonical_name(name));
}

UtteranceNameStats NameExtractor::extract(std::string_view input) const {
    UtteranceNameStats stats;
    const Tokenization tok = tokenize(input);
    bool previous_was_candidate = false;
    for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
        const Token& t = tok.tokens[i];
        const NameRecord* rec = nullptr;
        if (looks_like_proper_name(t.text)) {
            const std::string key = text::canonical_name(t.text);
            if (!stop_list_.contains(key)) rec = lexicon_->find(key);
        }
        if (rec == nullptr) {
            previous_was_candidate = false;
            continue;
        }
        const bool continues_run = previous_was_candidate && !tok.punctuated_before(i);
        if (!continues_run) stats.hits.push_back({t.text, rec->female_prob(), t.offset});
        previous_was_candidate = true;
    }
    return stats;
}

MetricValue wqr(std::span<const NameHit> hits) {
    double mass = 0.0;
    for (const auto& h : hits) mass += h.female_prob;
    return MetricValue{MetricKind::WQR, mass, static_cast<double>(hits.size())};
}

}  // namespace wre::namex
