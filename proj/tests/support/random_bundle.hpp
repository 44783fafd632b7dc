#pragma once

// Seeded random bundles that satisfy every ingest rule, for round-trip and
// property tests.

#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "wre/ingest.hpp"
#include "wre/synthgen.hpp"

namespace wre::testing {

inline const std::vector<std::string>& random_words() {
    static const std::vector<std::string> words = {
        "Léa",  "Claude", "Marie", "Pierre", "Jean-Pierre", "bonjour", "et",    "MARIE",
        "à",    "l'été",  "«",     "»",      "\"cité\"",    "a\\b",    "Zoé,",  "déjà",
        "100%", "Gazi",   "Mustafa", "Kemal", "tab\there",  "œuvre",   "Ça",    "Dominique."};
    return words;
}

inline std::string random_text(synth::Rng& rng) {
    const auto& words = random_words();
    std::string text;
    const auto n = rng.uniform(1, 9);
    for (std::int64_t i = 0; i < n; ++i) {
        if (i > 0) text += ' ';
        text += words[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(words.size()) - 1))];
    }
    return text;
}

/// Programs each on their own media file, with breaks, segments, utterances
/// and faces that may straddle program and break boundaries.
inline CorpusBundle random_bundle(std::uint64_t seed, int max_programs = 6) {
    synth::Rng rng(seed);
    CorpusBundle b;

    const char* names[] = {"Léa", "Claude", "Marie", "Pierre", "Jean-Pierre", "Zoé",
                           "Dominique", "Gazi", "Mustafa", "Kemal", "Œdipe", "Ève"};
    for (const char* name : names)
        if (rng.chance(0.8)) b.lexicon.add(name, rng.uniform(0, 5000), rng.uniform(1, 5000));

    const auto programs = rng.uniform(1, max_programs);
    const Role roles[] = {Role::Presenter, Role::Journalist, Role::PoliticalGuest, Role::Expert,
                          Role::Other};
    for (std::int64_t i = 0; i < programs; ++i) {
        Program p;
        p.program_id = fmt::format("prog,{}", i);  // exercises CSV quoting
        p.channel_id = fmt::format("ch{}", rng.uniform(1, 3));
        p.medium = rng.chance(0.5) ? Medium::TV : Medium::Radio;
        p.status = rng.chance(0.5) ? ChannelStatus::Public : ChannelStatus::Private;
        p.category = static_cast<ProgramCategory>(rng.uniform(0, 3));
        const Millis duration = rng.uniform(60'000, 900'000);
        p.start_utc = UtcTime{rng.uniform(1'672'531'200'000, 1'703'980'800'000)};
        p.end_utc = UtcTime{p.start_utc.ms + duration};
        p.media_id = fmt::format("media_{}", i);
        const Millis lead = rng.uniform(0, 30'000);
        p.media_span = TimeInterval{lead, lead + duration + rng.uniform(-1000, 1000)};
        const Millis media_end = p.media_span.end_ms() + 20'000;

        if (rng.chance(0.7)) {
            auto& breaks = b.breaks[p.media_id];
            Millis t = rng.uniform(0, 60'000);
            while (t + 5'000 < media_end && breaks.size() < 4) {
                const Millis len = rng.uniform(1'000, 60'000);
                breaks.emplace_back(t, t + len);
                t += len + rng.uniform(1, 200'000);
            }
            if (breaks.empty()) b.breaks.erase(p.media_id);
        }

        auto& segments = b.segments[p.media_id];
        for (Millis t = 0; t < media_end;) {
            const Millis len = rng.uniform(200, 30'000);
            if (rng.chance(0.85))
                segments.push_back({p.media_id, TimeInterval{t, t + len},
                                    static_cast<SpeechLabel>(rng.uniform(0, 3))});
            t += len + (rng.chance(0.2) ? rng.uniform(1, 5'000) : 0);
        }

        auto& utterances = b.utterances[p.media_id];
        for (Millis t = rng.uniform(0, 5'000); t < media_end; t += rng.uniform(1, 15'000)) {
            const Millis len = rng.uniform(1, 10'000);
            utterances.push_back({p.media_id, TimeInterval{t, t + len}, random_text(rng)});
        }

        if (p.medium == Medium::TV) {
            auto& faces = b.faces[p.media_id];
            for (Millis t = 0; t < media_end; t += rng.uniform(0, 20'000))
                faces.push_back({p.media_id, t, rng.uniform_real(1e-6, 1.0), rng.unit()});
        }

        for (Role role : roles)
            if (rng.chance(0.4))
                b.reports.push_back({p.program_id, role, rng.uniform(0, 12), rng.uniform(0, 12)});

        b.programs.emplace(p.program_id, std::move(p));
    }
    return b;
}

/// Serializes every table to text and parses it back.
inline CorpusBundle reparse(const CorpusBundle& b) {
    CorpusBundle out;
    auto cycle = [](auto write, auto parse) {
        std::stringstream s;
        write(s);
        return parse(s);
    };
    out.lexicon = cycle([&](std::ostream& o) { write_name_db(o, b.lexicon); },
                        [](std::istream& i) { return parse_name_db(i); });
    out.programs = cycle([&](std::ostream& o) { write_programs(o, b.programs); },
                         [](std::istream& i) { return parse_programs(i); });
    out.reports = cycle([&](std::ostream& o) { write_reports(o, b.reports); },
                        [](std::istream& i) { return parse_reports(i); });
    out.breaks = cycle([&](std::ostream& o) { write_breaks(o, b.breaks); },
                       [](std::istream& i) { return parse_breaks(i); });
    out.segments = cycle([&](std::ostream& o) { write_segments(o, b.segments); },
                         [](std::istream& i) { return parse_segments(i); });
    out.utterances = cycle([&](std::ostream& o) { write_utterances(o, b.utterances); },
                           [](std::istream& i) { return parse_utterances(i); });
    out.faces = cycle([&](std::ostream& o) { write_faces(o, b.faces); },
                      [](std::istream& i) { return parse_faces(i); });
    return out;
}

}  // namespace wre::testing
