#pragma once

// Women Representation Estimates (speech, faces, first names, manual reports)
// over program subsets, with commercial-break handling and group-by merging.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wre/core.hpp"
#include "wre/ingest.hpp"
#include "wre/namex.hpp"

namespace wre::metrics {

/// How descriptors that fall inside commercial breaks are treated.
enum class AdMode { ExcludeBreaks, OnlyBreaks, Raw };
std::string_view to_string(AdMode m);
std::optional<AdMode> parse_ad_mode(std::string_view s);

/// Parts of the program's media span selected by `mode`.
std::vector<TimeInterval> effective_spans(const Program& program,
                                          std::span<const TimeInterval> breaks, AdMode mode);

/// Gendered speech time inside `spans` (segments clipped); music and noise ignored.
MetricValue compute_wsr(std::span<const SpeechSegment> segments,
                        std::span<const TimeInterval> spans);

struct FaceRules {
    double min_height = 0.10;       // inclusive
    double female_threshold = 0.5;  // female iff score is strictly above
};

/// Faces whose frame timestamp lies inside `spans` and that are tall enough.
MetricValue compute_wfr(std::span<const FaceObservation> faces,
                        std::span<const TimeInterval> spans, const FaceRules& rules = {});

/// Name statistics of one utterance, located by its midpoint.
struct NamedUtterance {
    Millis midpoint = 0;
    std::size_t hits = 0;
    double female_mass = 0.0;
};

/// Utterances sorted by midpoint for every media file, hallucinations dropped.
using NameIndex = std::map<std::string, std::vector<NamedUtterance>, std::less<>>;
NameIndex index_names(const CorpusBundle& bundle, const namex::NameExtractor& extractor);

/// Counted names of utterances whose midpoint lies inside `spans`.
MetricValue compute_wqr(std::span<const NamedUtterance> utterances,
                        std::span<const TimeInterval> spans);

MetricValue compute_wpr(std::span<const ChannelReport> reports);

// ---------------------------------------------------------------------------

enum class AdContext { InProgram, InBreak };
std::string_view to_string(AdContext c);

enum class Dimension { Medium, Status, Category, Audience, Conflict, Channel, AdContext };
std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

/// Unset dimensions are marginalized over.
struct GroupKey {
    std::optional<Medium> medium;
    std::optional<ChannelStatus> status;
    std::optional<ProgramCategory> category;
    std::optional<AudienceSlot> audience;
    std::optional<ConflictPeriod> conflict;
    std::optional<std::string> channel;
    std::optional<AdContext> ad_context;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

/// "medium=tv,audience=high"; "all" for the empty key.
std::string describe(const GroupKey& key);

/// Absent metrics do not apply to the group (faces on radio, manual counts in
/// breaks); present metrics may still be undefined when no data fell inside.
struct GroupResult {
    GroupKey key;
    std::optional<MetricValue> wpr;
    std::optional<MetricValue> wsr;
    std::optional<MetricValue> wqr;
    std::optional<MetricValue> wfr;
};

enum class MergeMode {
    Weighted,     // exact pooled ratio over durations / counts
    ProgramMean,  // each program with a defined value counts once
};

struct AggregateOptions {
    AdMode mode = AdMode::ExcludeBreaks;
    SlotRules slots;
    UtcTime conflict_cutoff = default_conflict_cutoff();
    FaceRules faces;
    MergeMode merge = MergeMode::Weighted;
};

/// Per-program metrics for one context part.
struct ProgramMetrics {
    const Program* program = nullptr;
    GroupKey full_key;  // every dimension set
    std::optional<MetricValue> wpr, wsr, wqr, wfr;
};

/// One entry per (program, part). With `split_ad_context`, each program yields
/// an InProgram part (breaks excluded) and, when it has breaks, an InBreak part;
/// otherwise a single part selected by `options.mode`.
std::vector<ProgramMetrics> per_program_metrics(const CorpusBundle& bundle, const NameIndex& names,
                                                const AggregateOptions& options,
                                                bool split_ad_context);

/// Restricts `full` to `dims`.
GroupKey project(const GroupKey& full, std::span<const Dimension> dims);

/// Merges program metrics into groups keyed by `dims`, ordered by key.
std::vector<GroupResult> merge_groups(std::span<const ProgramMetrics> programs,
                                      std::span<const Dimension> dims, MergeMode merge);

std::vector<GroupResult> aggregate(const CorpusBundle& bundle, const NameIndex& names,
                                   std::span<const Dimension> dims,
                                   const AggregateOptions& options = {});

}  // namespace wre::metrics
