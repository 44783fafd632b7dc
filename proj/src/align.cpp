#include "wre/align.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace wre::align {

double UtteranceAlignment::vad_ratio() const {
    const Millis span = span_ms();
    return span > 0 ? static_cast<double>(male_ms + female_ms) / static_cast<double>(span) : 0.0;
}

std::optional<double> UtteranceAlignment::female_speech_ratio() const {
    const Millis gendered = male_ms + female_ms;
    if (gendered == 0) return std::nullopt;
    return static_cast<double>(female_ms) / static_cast<double>(gendered);
}

UtteranceAlignment align_utterance(const Utterance& u, std::span<const SpeechSegment> segments) {
    UtteranceAlignment a;
    auto it = std::partition_point(segments.begin(), segments.end(), [&](const auto& s) {
        return s.span.end_ms() <= u.span.start_ms();
    });
    for (; it != segments.end() && it->span.start_ms() < u.span.end_ms(); ++it) {
        if (it->media_id != u.media_id)
            throw AlignError(fmt::format("MediaMismatch: segment of '{}' aligned with utterance of '{}'",
                                         it->media_id, u.media_id));
        const Millis overlap = it->span.overlap(u.span);
        switch (it->label) {
            case SpeechLabel::MaleSpeech: a.male_ms += overlap; break;
            case SpeechLabel::FemaleSpeech: a.female_ms += overlap; break;
            case SpeechLabel::Music: a.music_ms += overlap; break;
            case SpeechLabel::Noise: a.noise_ms += overlap; break;
        }
    }
    a.unlabeled_ms = u.span.duration() - (a.male_ms + a.female_ms + a.music_ms + a.noise_ms);
    return a;
}

std::string_view to_string(SpeakerGenderClass c) {
    switch (c) {
        case SpeakerGenderClass::MostlyMale: return "male";
        case SpeakerGenderClass::MostlyFemale: return "female";
        case SpeakerGenderClass::Ambiguous: return "ambiguous";
    }
    return "?";
}

SpeakerGenderClass classify_speaker_gender(const UtteranceAlignment& a,
                                           const PopulationThresholds& t) {
    const auto ratio = a.female_speech_ratio();
    if (!ratio) throw AlignError("UndefinedRatio: no gendered speech overlaps the utterance");
    if (*ratio < t.male_below) return SpeakerGenderClass::MostlyMale;
    if (*ratio > t.female_above) return SpeakerGenderClass::MostlyFemale;
    return SpeakerGenderClass::Ambiguous;
}

std::string_view to_string(Factor f) {
    switch (f) {
        case Factor::Medium: return "medium";
        case Factor::Channel: return "channel";
        case Factor::Status: return "status";
        case Factor::Category: return "category";
        case Factor::Audience: return "audience";
        case Factor::Conflict: return "conflict";
        case Factor::SpeakerGender: return "speaker_gender";
    }
    return "?";
}

std::optional<Factor> parse_factor(std::string_view name) {
    for (Factor f : kAllFactors)
        if (to_string(f) == name) return f;
    return std::nullopt;
}

std::vector<UtteranceContext> attach_utterances(const CorpusBundle& bundle,
                                                const namex::NameExtractor& extractor,
                                                metrics::AdMode mode) {
    std::vector<UtteranceContext> out;
    for (const auto& [id, p] : bundle.programs) {
        const auto uit = bundle.utterances.find(p.media_id);
        if (uit == bundle.utterances.end()) continue;
        std::span<const TimeInterval> breaks;
        if (auto bit = bundle.breaks.find(p.media_id); bit != bundle.breaks.end())
            breaks = bit->second;
        const auto spans = metrics::effective_spans(p, breaks, mode);
        for (const auto& u : uit->second) {
            const Millis mid = u.span.start_ms() + u.span.duration() / 2;
            const bool in_spans = std::any_of(spans.begin(), spans.end(),
                                              [&](const TimeInterval& s) { return s.contains(mid); });
            if (!in_spans || namex::is_hallucination(u.text)) continue;
            out.push_back({&p, &u, extractor.extract(u)});
        }
    }
    return out;
}

std::vector<AnalysisRow> select_stats_population(const CorpusBundle& bundle,
                                                 std::span<const UtteranceContext> contexts,
                                                 const PopulationOptions& options) {
    std::vector<AnalysisRow> rows;
    for (const auto& ctx : contexts) {
        if (ctx.names.hits.empty()) continue;
        const Utterance& u = *ctx.utterance;
        std::span<const SpeechSegment> segments;
        if (auto it = bundle.segments.find(u.media_id); it != bundle.segments.end())
            segments = it->second;
        const UtteranceAlignment a = align_utterance(u, segments);
        if (a.vad_ratio() < options.thresholds.min_vad_ratio || !a.female_speech_ratio())
            continue;
        const SpeakerGenderClass speaker = classify_speaker_gender(a, options.thresholds);
        if (speaker == SpeakerGenderClass::Ambiguous) continue;

        const Program& p = *ctx.program;
        AnalysisRow row;
        row.y = *ctx.names.mean_female_prob();
        row.hits = ctx.names.hits.size();
        row.female_mass = ctx.names.female_mass();
        row.program_id = p.program_id;
        row.start_ms = u.span.start_ms();
        row.factors = {std::string(to_string(p.medium)),
                       p.channel_id,
                       std::string(to_string(p.status)),
                       std::string(to_string(p.category)),
                       std::string(to_string(classify_audience(p, options.slots))),
                       std::string(to_string(classify_conflict_period(p, options.conflict_cutoff))),
                       std::string(to_string(speaker))};
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AnalysisRow& a, const AnalysisRow& b) {
        return std::tie(a.program_id, a.start_ms) < std::tie(b.program_id, b.start_ms);
    });
    return rows;
}

}  // namespace wre::align
