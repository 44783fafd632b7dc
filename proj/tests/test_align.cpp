#include <doctest.h>

#include "builders.hpp"
#include "random_bundle.hpp"
#include "wre/align.hpp"
#include "wre/synthgen.hpp"

using namespace wre;
using namespace wre::testing;

namespace {

constexpr auto F = SpeechLabel::FemaleSpeech;
constexpr auto M = SpeechLabel::MaleSpeech;
constexpr auto Mu = SpeechLabel::Music;

CorpusBundle small_bundle() {
    CorpusBundle b;
    b.lexicon = synth::fixture_lexicon();
    b.programs.emplace("p1", make_program("p1", "m", Medium::TV, "2023-05-10T20:00", 100'000));
    b.breaks["m"] = {TimeInterval{40'000, 50'000}};
    b.segments["m"] = {seg("m", 0, 10'000, F),       seg("m", 10'000, 20'000, M),
                       seg("m", 20'000, 30'000, Mu), seg("m", 30'000, 60'000, F),
                       seg("m", 60'000, 100'000, M)};
    b.utterances["m"] = {
        utt("m", 2'000, 8'000, "Merci Léa"),          // female speaker
        utt("m", 8'000, 14'000, "Bonjour Pierre"),    // ratio 1/3: ambiguous
        utt("m", 11'000, 19'000, "Avec Claude"),      // male speaker
        utt("m", 17'000, 23'000, "Et Vladimir"),      // VAD exactly 0.5
        utt("m", 22'000, 28'000, "Léa"),              // singing
        utt("m", 42'000, 46'000, "Léa"),              // inside the break
        utt("m", 61'000, 65'000, "Sous-titrage Léa"), // hallucination
        utt("m", 66'000, 68'000, "bonjour"),          // no names
    };
    return b;
}

}  // namespace

TEST_SUITE("align") {

TEST_CASE("alignment splits an utterance across segment labels") {
    const auto b = small_bundle();
    const auto& segs = b.segments.at("m");
    const auto a = align::align_utterance(utt("m", 8'000, 14'000, "x"), segs);
    CHECK(a.female_ms == 2'000);
    CHECK(a.male_ms == 4'000);
    CHECK(a.vad_ratio() == doctest::Approx(1.0));
    CHECK(*a.female_speech_ratio() == doctest::Approx(1.0 / 3.0));

    const auto gap = align::align_utterance(utt("m", 100'000, 101'000, "x"), segs);
    CHECK(gap.unlabeled_ms == 1'000);
    CHECK(gap.vad_ratio() == 0.0);
    CHECK_FALSE(gap.female_speech_ratio());
    CHECK_THROWS_AS(align::classify_speaker_gender(gap), align::AlignError);
    CHECK_THROWS_AS(align::align_utterance(utt("other", 0, 5'000, "x"), segs), align::AlignError);
}

TEST_CASE("speaker gender bounds are strict") {
    auto with_ratio = [](Millis female, Millis male) {
        align::UtteranceAlignment a;
        a.female_ms = female;
        a.male_ms = male;
        return align::classify_speaker_gender(a);
    };
    CHECK(with_ratio(199, 801) == align::SpeakerGenderClass::MostlyMale);
    CHECK(with_ratio(200, 800) == align::SpeakerGenderClass::Ambiguous);
    CHECK(with_ratio(800, 200) == align::SpeakerGenderClass::Ambiguous);
    CHECK(with_ratio(801, 199) == align::SpeakerGenderClass::MostlyFemale);
    CHECK(with_ratio(0, 1) == align::SpeakerGenderClass::MostlyMale);
}

TEST_CASE("population keeps confident, voiced utterances with names") {
    const auto b = small_bundle();
    const namex::NameExtractor extractor(b.lexicon);
    const auto contexts = align::attach_utterances(b, extractor, metrics::AdMode::ExcludeBreaks);
    CHECK(contexts.size() == 6);  // break and hallucination dropped
    const auto rows = align::select_stats_population(b, contexts, {});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].start_ms == 2'000);
    CHECK(rows[0].factor(align::Factor::SpeakerGender) == "female");
    CHECK(rows[0].y == 1.0);
    CHECK(rows[1].start_ms == 11'000);
    CHECK(rows[1].factor(align::Factor::SpeakerGender) == "male");
    CHECK(rows[1].y == doctest::Approx(0.12).epsilon(1e-4));
    CHECK(rows[2].start_ms == 17'000);
    CHECK(rows[2].y == 0.0);
    CHECK(rows[0].factor(align::Factor::Audience) == "high");
    CHECK(rows[0].factor(align::Factor::Medium) == "tv");
    CHECK(rows[0].factor(align::Factor::Conflict) == "before");
    CHECK(rows[0].hits == 1);

    align::PopulationOptions strict;
    strict.thresholds.min_vad_ratio = 0.51;
    CHECK(align::select_stats_population(b, contexts, strict).size() == 2);

    const auto raw = align::attach_utterances(b, extractor, metrics::AdMode::Raw);
    CHECK(raw.size() == 7);
    CHECK(align::select_stats_population(b, raw, {}).size() == 4);
}

TEST_CASE("factor names round-trip") {
    for (auto f : align::kAllFactors) CHECK(align::parse_factor(align::to_string(f)) == f);
    CHECK_FALSE(align::parse_factor("gender"));
}

TEST_CASE("alignment properties on random layouts") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        const CorpusBundle b = random_bundle(seed);
        for (const auto& [media, utterances] : b.utterances) {
            const auto& segs = b.segments.at(media);
            // The same layout with every segment cut in two at its midpoint.
            std::vector<SpeechSegment> split;
            for (const auto& sg : segs) {
                const Millis mid = sg.span.start_ms() + sg.span.duration() / 2;
                if (mid == sg.span.start_ms()) {
                    split.push_back(sg);
                    continue;
                }
                split.push_back(seg(media, sg.span.start_ms(), mid, sg.label));
                split.push_back(seg(media, mid, sg.span.end_ms(), sg.label));
            }
            for (const auto& u : utterances) {
                const auto a = align::align_utterance(u, segs);
                CHECK(a.span_ms() == u.span.duration());
                CHECK(a.unlabeled_ms >= 0);
                CHECK(align::align_utterance(u, split) == a);
            }
        }

        const namex::NameExtractor extractor(b.lexicon);
        const auto contexts = align::attach_utterances(b, extractor, metrics::AdMode::ExcludeBreaks);
        std::size_t previous = 0;
        for (double vad : {0.9, 0.7, 0.5, 0.3, 0.0}) {
            align::PopulationOptions options;
            options.thresholds.min_vad_ratio = vad;
            const auto n = align::select_stats_population(b, contexts, options).size();
            CHECK(n >= previous);
            previous = n;
        }
    }
}

}  // TEST_SUITE
