#pragma once

// Loaders for the golden fixture files and the ICU reference matcher.

#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include "wre/ingest.hpp"

namespace wre::fixtures {

inline std::string path(const std::string& name) { return std::string(WRE_FIXTURE_DIR) + "/" + name; }

inline std::vector<std::vector<std::string>> read_tsv(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(csv::split(line, '\t'));
    }
    return rows;
}

struct NameCase {
    std::string rule;
    std::string text;
    std::vector<std::string> names;
    std::optional<double> mean;
};

inline std::vector<NameCase> name_cases() {
    std::vector<NameCase> out;
    for (const auto& f : read_tsv("name_rules.tsv")) {
        NameCase c{f.at(0), f.at(1), {}, std::nullopt};
        if (!f.at(2).empty()) c.names = csv::split(f[2], '|');
        if (f.at(3) != "-") c.mean = std::stod(f[3]);
        out.push_back(std::move(c));
    }
    return out;
}

struct HallucinationCase {
    bool expected;
    std::string text;
};

inline std::vector<HallucinationCase> hallucination_cases() {
    std::vector<HallucinationCase> out;
    for (const auto& f : read_tsv("hallucinations.tsv")) out.push_back({f.at(0) == "1", f.at(1)});
    return out;
}

/// The subtitle-credit pattern evaluated by ICU's regular-expression engine.
class ReferenceMatcher {
public:
    ReferenceMatcher() {
        UErrorCode status = U_ZERO_ERROR;
        pattern_.reset(icu::RegexPattern::compile(
            icu::UnicodeString::fromUTF8("^\\W*sous-titr(age|es par)"), UREGEX_CASE_INSENSITIVE,
            status));
        if (U_FAILURE(status)) throw std::runtime_error("ICU regex compile failed");
    }

    bool matches(const std::string& text) const {
        UErrorCode status = U_ZERO_ERROR;
        const icu::UnicodeString input = icu::UnicodeString::fromUTF8(text);
        std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(input, status));
        const bool found = m->lookingAt(status);
        if (U_FAILURE(status)) throw std::runtime_error("ICU regex match failed");
        return found;
    }

private:
    std::unique_ptr<icu::RegexPattern> pattern_;
};

}  // namespace wre::fixtures
