#include "wre/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace wre::metrics {

std::string_view to_string(AdMode m) {
    switch (m) {
        case AdMode::ExcludeBreaks: return "exclude";
        case AdMode::OnlyBreaks: return "only";
        case AdMode::Raw: return "raw";
    }
    return "?";
}

std::optional<AdMode> parse_ad_mode(std::string_view s) {
    for (AdMode m : {AdMode::ExcludeBreaks, AdMode::OnlyBreaks, AdMode::Raw})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::string_view to_string(AdContext c) {
    return c == AdContext::InProgram ? "program" : "break";
}

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Medium: return "medium";
        case Dimension::Status: return "status";
        case Dimension::Category: return "category";
        case Dimension::Audience: return "audience";
        case Dimension::Conflict: return "conflict";
        case Dimension::Channel: return "channel";
        case Dimension::AdContext: return "ad_context";
    }
    return "?";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
    for (Dimension d : {Dimension::Medium, Dimension::Status, Dimension::Category,
                        Dimension::Audience, Dimension::Conflict, Dimension::Channel,
                        Dimension::AdContext})
        if (to_string(d) == s) return d;
    return std::nullopt;
}

std::vector<TimeInterval> effective_spans(const Program& program,
                                          std::span<const TimeInterval> breaks, AdMode mode) {
    switch (mode) {
        case AdMode::ExcludeBreaks: return interval_subtract(program.media_span, breaks);
        case AdMode::OnlyBreaks: return interval_intersect(program.media_span, breaks);
        case AdMode::Raw: return {program.media_span};
    }
    return {};
}

MetricValue compute_wsr(std::span<const SpeechSegment> segments,
                        std::span<const TimeInterval> spans) {
    Millis female = 0, male = 0;
    for (const auto& span : spans) {
        auto it = std::partition_point(segments.begin(), segments.end(), [&](const auto& s) {
            return s.span.end_ms() <= span.start_ms();
        });
        for (; it != segments.end() && it->span.start_ms() < span.end_ms(); ++it) {
            if (it->label == SpeechLabel::FemaleSpeech)
                female += it->span.overlap(span);
            else if (it->label == SpeechLabel::MaleSpeech)
                male += it->span.overlap(span);
        }
    }
    return MetricValue{MetricKind::WSR, static_cast<double>(female),
                       static_cast<double>(female + male)};
}

namespace {

bool inside(std::span<const TimeInterval> sorted_spans, Millis t) {
    auto it = std::partition_point(sorted_spans.begin(), sorted_spans.end(),
                                   [&](const TimeInterval& s) { return s.end_ms() <= t; });
    return it != sorted_spans.end() && it->contains(t);
}

}  // namespace

MetricValue compute_wfr(std::span<const FaceObservation> faces,
                        std::span<const TimeInterval> spans, const FaceRules& rules) {
    const auto sorted = normalize_intervals(spans);
    std::int64_t female = 0, total = 0;
    for (const auto& f : faces) {
        if (f.height_ratio < rules.min_height || !inside(sorted, f.frame_ms)) continue;
        ++total;
        if (f.female_score > rules.female_threshold) ++female;
    }
    return MetricValue{MetricKind::WFR, static_cast<double>(female), static_cast<double>(total)};
}

NameIndex index_names(const CorpusBundle& bundle, const namex::NameExtractor& extractor) {
    NameIndex index;
    for (const auto& [media, utterances] : bundle.utterances) {
        auto& list = index[media];
        for (const auto& u : utterances) {
            if (namex::is_hallucination(u.text)) continue;
            const auto stats = extractor.extract(u);
            list.push_back({u.span.start_ms() + u.span.duration() / 2, stats.hits.size(),
                            stats.female_mass()});
        }
        std::stable_sort(list.begin(), list.end(),
                         [](const auto& a, const auto& b) { return a.midpoint < b.midpoint; });
    }
    return index;
}

MetricValue compute_wqr(std::span<const NamedUtterance> utterances,
                        std::span<const TimeInterval> spans) {
    double mass = 0.0;
    std::size_t hits = 0;
    for (const auto& span : spans) {
        auto it = std::partition_point(utterances.begin(), utterances.end(),
                                       [&](const auto& u) { return u.midpoint < span.start_ms(); });
        for (; it != utterances.end() && it->midpoint < span.end_ms(); ++it) {
            mass += it->female_mass;
            hits += it->hits;
        }
    }
    return MetricValue{MetricKind::WQR, mass, static_cast<double>(hits)};
}

MetricValue compute_wpr(std::span<const ChannelReport> reports) {
    std::int64_t female = 0, total = 0;
    for (const auto& r : reports) {
        female += r.female_count;
        total += r.female_count + r.male_count;
    }
    return MetricValue{MetricKind::WPR, static_cast<double>(female), static_cast<double>(total)};
}

// ---------------------------------------------------------------------------

std::string describe(const GroupKey& key) {
    std::vector<std::string> parts;
    if (key.medium) parts.push_back(fmt::format("medium={}", to_string(*key.medium)));
    if (key.status) parts.push_back(fmt::format("status={}", to_string(*key.status)));
    if (key.category) parts.push_back(fmt::format("category={}", to_string(*key.category)));
    if (key.audience) parts.push_back(fmt::format("audience={}", to_string(*key.audience)));
    if (key.conflict) parts.push_back(fmt::format("conflict={}", to_string(*key.conflict)));
    if (key.channel) parts.push_back(fmt::format("channel={}", *key.channel));
    if (key.ad_context) parts.push_back(fmt::format("ad_context={}", to_string(*key.ad_context)));
    if (parts.empty()) return "all";
    return fmt::format("{}", fmt::join(parts, ","));
}

namespace {

template <typename T>
std::span<const T> media_items(const std::map<std::string, std::vector<T>>& table,
                               const std::string& media) {
    const auto it = table.find(media);
    if (it == table.end()) return {};
    return it->second;
}

}  // namespace

std::vector<ProgramMetrics> per_program_metrics(const CorpusBundle& bundle, const NameIndex& names,
                                                const AggregateOptions& options,
                                                bool split_ad_context) {
    std::map<std::string, std::vector<ChannelReport>, std::less<>> reports;
    for (const auto& r : bundle.reports) reports[r.program_id].push_back(r);

    std::vector<ProgramMetrics> out;
    for (const auto& [id, p] : bundle.programs) {
        const auto breaks = media_items(bundle.breaks, p.media_id);
        const auto segments = media_items(bundle.segments, p.media_id);
        const auto faces = media_items(bundle.faces, p.media_id);
        std::span<const NamedUtterance> named;
        if (auto it = names.find(p.media_id); it != names.end()) named = it->second;

        GroupKey base;
        base.medium = p.medium;
        base.status = p.status;
        base.category = p.category;
        base.audience = classify_audience(p, options.slots);
        base.conflict = classify_conflict_period(p, options.conflict_cutoff);
        base.channel = p.channel_id;

        std::vector<AdMode> parts{options.mode};
        if (split_ad_context) parts = {AdMode::ExcludeBreaks, AdMode::OnlyBreaks};

        for (AdMode mode : parts) {
            const auto spans = effective_spans(p, breaks, mode);
            if (spans.empty()) continue;
            ProgramMetrics m;
            m.program = &p;
            m.full_key = base;
            m.full_key.ad_context = mode == AdMode::OnlyBreaks ? AdContext::InBreak
                                                                    : AdContext::InProgram;
            m.wsr = compute_wsr(segments, spans);
            m.wqr = compute_wqr(named, spans);
            if (p.medium == Medium::TV) m.wfr = compute_wfr(faces, spans, options.faces);
            if (mode != AdMode::OnlyBreaks) {
                const auto it = reports.find(id);
                m.wpr = it == reports.end() ? MetricValue::undefined(MetricKind::WPR)
                                            : compute_wpr(it->second);
            }
            out.push_back(std::move(m));
        }
    }
    return out;
}

GroupKey project(const GroupKey& full, std::span<const Dimension> dims) {
    GroupKey key;
    for (Dimension d : dims) {
        switch (d) {
            case Dimension::Medium: key.medium = full.medium; break;
            case Dimension::Status: key.status = full.status; break;
            case Dimension::Category: key.category = full.category; break;
            case Dimension::Audience: key.audience = full.audience; break;
            case Dimension::Conflict: key.conflict = full.conflict; break;
            case Dimension::Channel: key.channel = full.channel; break;
            case Dimension::AdContext: key.ad_context = full.ad_context; break;
        }
    }
    return key;
}

namespace {

void merge_into(std::optional<MetricValue>& acc, const std::optional<MetricValue>& v,
                MergeMode merge) {
    if (!v) return;
    if (!acc) acc = MetricValue::undefined(v->kind());
    if (merge == MergeMode::Weighted) {
        *acc += *v;
    } else if (auto pct = v->female_pct()) {
        *acc += MetricValue{v->kind(), *pct / 100.0, 1.0};
    }
}

}  // namespace

std::vector<GroupResult> merge_groups(std::span<const ProgramMetrics> programs,
                                      std::span<const Dimension> dims, MergeMode merge) {
    std::map<GroupKey, GroupResult> groups;
    for (const auto& pm : programs) {
        const GroupKey key = project(pm.full_key, dims);
        auto [it, inserted] = groups.try_emplace(key);
        GroupResult& g = it->second;
        g.key = key;
        merge_into(g.wpr, pm.wpr, merge);
        merge_into(g.wsr, pm.wsr, merge);
        merge_into(g.wqr, pm.wqr, merge);
        merge_into(g.wfr, pm.wfr, merge);
    }
    std::vector<GroupResult> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

std::vector<GroupResult> aggregate(const CorpusBundle& bundle, const NameIndex& names,
                                   std::span<const Dimension> dims,
                                   const AggregateOptions& options) {
    const bool split = std::find(dims.begin(), dims.end(), Dimension::AdContext) != dims.end();
    const auto programs = per_program_metrics(bundle, names, options, split);
    return merge_groups(programs, dims, options.merge);
}

}  // namespace wre::metrics
