#pragma once

// Domain values shared by every stage of the engine, plus interval arithmetic
// and the program-level classifications (audience slot, conflict period).

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wre {

using Millis = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Half-open millisecond span [start_ms, end_ms). Empty spans cannot be built.
class TimeInterval {
public:
    TimeInterval(Millis start_ms, Millis end_ms);

    Millis start_ms() const noexcept { return start_; }
    Millis end_ms() const noexcept { return end_; }
    Millis duration() const noexcept { return end_ - start_; }
    bool contains(Millis t) const noexcept { return t >= start_ && t < end_; }
    Millis overlap(const TimeInterval& other) const noexcept;
    std::optional<TimeInterval> intersect(const TimeInterval& other) const;

    friend auto operator<=>(const TimeInterval&, const TimeInterval&) = default;

private:
    Millis start_;
    Millis end_;
};

/// Sorted, merged union of `intervals` (overlapping or touching spans coalesce).
std::vector<TimeInterval> normalize_intervals(std::span<const TimeInterval> intervals);

/// `base` minus the union of `cuts`. Cuts need not be sorted or disjoint.
std::vector<TimeInterval> interval_subtract(const TimeInterval& base,
                                            std::span<const TimeInterval> cuts);

/// `base` intersected with the union of `cuts`.
std::vector<TimeInterval> interval_intersect(const TimeInterval& base,
                                             std::span<const TimeInterval> cuts);

Millis total_duration(std::span<const TimeInterval> intervals);

// ---------------------------------------------------------------------------
// Wall-clock time

/// Milliseconds since the Unix epoch, UTC.
struct UtcTime {
    std::int64_t ms = 0;
    friend auto operator<=>(const UtcTime&, const UtcTime&) = default;
};

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM[:SS[.fff]]` followed by `Z` or `±HH:MM`.
std::optional<UtcTime> parse_iso8601(std::string_view text);
/// Formats as `YYYY-MM-DDTHH:MM:SS[.fff]+00:00`.
std::string format_iso8601(UtcTime t);

/// Wall-clock milliseconds counted from 1970-01-01T00:00 local time.
struct LocalTime {
    std::int64_t ms = 0;
    friend auto operator<=>(const LocalTime&, const LocalTime&) = default;
};

/// Parses `YYYY-MM-DDTHH:MM[:SS]` without offset.
std::optional<LocalTime> parse_local(std::string_view text);
LocalTime local_from_civil(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                           int second = 0);

/// Either a fixed UTC offset or the Europe/Paris civil zone (EU summer-time rules).
class TimeZone {
public:
    static TimeZone fixed(int offset_minutes);
    static TimeZone europe_paris();
    /// Accepts "Europe/Paris", "UTC", "Z" or "+HH:MM" / "-HH:MM".
    static std::optional<TimeZone> parse(std::string_view name);

    int offset_minutes_at(UtcTime t) const;
    LocalTime to_local(UtcTime t) const;
    /// Resolves a wall-clock time. Repeated times map to the first occurrence,
    /// skipped times are shifted forward by the gap.
    UtcTime to_utc(LocalTime t) const;
    std::string name() const;

    friend bool operator==(const TimeZone&, const TimeZone&) = default;

private:
    enum class Rule { Fixed, EuropeParis };
    TimeZone(Rule rule, int offset) : rule_(rule), offset_(offset) {}
    Rule rule_;
    int offset_;
};

// ---------------------------------------------------------------------------
// Corpus taxonomy

enum class Medium { TV, Radio };
enum class ChannelStatus { Public, Private };
enum class ProgramCategory { News, Entertainment, MagazineDocumentary, Sport };
enum class AudienceSlot { High, Low };
enum class ConflictPeriod { Before, After };
enum class SpeechLabel { MaleSpeech, FemaleSpeech, Music, Noise };
enum class Role { Presenter, Journalist, PoliticalGuest, Expert, Other };

std::string_view to_string(Medium v);
std::string_view to_string(ChannelStatus v);
std::string_view to_string(ProgramCategory v);
std::string_view to_string(AudienceSlot v);
std::string_view to_string(ConflictPeriod v);
std::string_view to_string(SpeechLabel v);
std::string_view to_string(Role v);

/// Tokens are the lowercase wire forms produced by to_string.
template <typename E>
std::optional<E> parse_enum(std::string_view token);

struct Program {
    std::string program_id;
    std::string channel_id;
    Medium medium = Medium::TV;
    ChannelStatus status = ChannelStatus::Public;
    ProgramCategory category = ProgramCategory::News;
    UtcTime start_utc;
    UtcTime end_utc;
    std::string media_id;
    TimeInterval media_span{0, 1};

    friend bool operator==(const Program&, const Program&) = default;
};

struct SpeechSegment {
    std::string media_id;
    TimeInterval span;
    SpeechLabel label;

    friend bool operator==(const SpeechSegment&, const SpeechSegment&) = default;
};

struct Utterance {
    std::string media_id;
    TimeInterval span;
    std::string text;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct FaceObservation {
    std::string media_id;
    Millis frame_ms = 0;
    double height_ratio = 0.0;
    double female_score = 0.0;

    friend bool operator==(const FaceObservation&, const FaceObservation&) = default;
};

struct ChannelReport {
    std::string program_id;
    Role role = Role::Other;
    std::int64_t male_count = 0;
    std::int64_t female_count = 0;

    friend bool operator==(const ChannelReport&, const ChannelReport&) = default;
};

/// Population statistics for one canonical first name.
struct NameRecord {
    std::string name;
    std::int64_t total_count = 0;
    std::int64_t female_count = 0;

    double female_prob() const {
        return static_cast<double>(female_count) / static_cast<double>(total_count);
    }
    std::int64_t male_count() const { return total_count - female_count; }

    friend bool operator==(const NameRecord&, const NameRecord&) = default;
};

// ---------------------------------------------------------------------------
// Metric values

enum class MetricKind { WPR, WSR, WQR, WFR };
std::string_view to_string(MetricKind k);

/// A women-share estimate carried as (female mass, total weight) so that
/// merging groups is an exact weighted mean.
///
/// Weight units: WSR milliseconds of gendered speech, WFR qualifying faces,
/// WQR counted first names, WPR reported persons. A zero weight is the
/// "undefined" marker.
class MetricValue {
public:
    MetricValue(MetricKind kind, double female_mass, double weight);
    static MetricValue undefined(MetricKind kind) { return {kind, 0.0, 0.0}; }

    MetricKind kind() const noexcept { return kind_; }
    double female_mass() const noexcept { return female_; }
    double weight() const noexcept { return weight_; }
    bool defined() const noexcept { return weight_ > 0.0; }
    /// In [0, 100]; empty when undefined.
    std::optional<double> female_pct() const;
    std::optional<double> male_pct() const;

    MetricValue& operator+=(const MetricValue& other);
    friend MetricValue operator+(MetricValue a, const MetricValue& b) { return a += b; }
    friend bool operator==(const MetricValue&, const MetricValue&) = default;

private:
    MetricKind kind_;
    double female_;
    double weight_;
};

// ---------------------------------------------------------------------------
// Program classifications

struct PeakWindow {
    int start_minute = 0;  // minutes after local midnight
    int end_minute = 0;    // exclusive; must exceed start_minute

    friend bool operator==(const PeakWindow&, const PeakWindow&) = default;
};

/// Parses "HH:MM-HH:MM".
std::optional<PeakWindow> parse_peak_window(std::string_view text);
std::string format_peak_window(const PeakWindow& w);

struct SlotRules {
    TimeZone zone = TimeZone::europe_paris();
    PeakWindow tv{18 * 60, 23 * 60};
    PeakWindow radio{6 * 60, 9 * 60};

    const PeakWindow& window(Medium m) const { return m == Medium::TV ? tv : radio; }
};

/// Milliseconds of [start, end) that fall inside the medium's daily peak window.
Millis peak_overlap_ms(UtcTime start, UtcTime end, Medium medium, const SlotRules& rules);

/// High iff at least half of the program lies in its medium's peak window.
AudienceSlot classify_audience(const Program& program, const SlotRules& rules = {});

/// Local midnight of 2023-10-07 in the given zone.
UtcTime default_conflict_cutoff(const TimeZone& zone = TimeZone::europe_paris());

ConflictPeriod classify_conflict_period(const Program& program, UtcTime cutoff);

}  // namespace wre
