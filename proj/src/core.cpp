#include "wre/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace wre {

namespace {

constexpr std::int64_t kMinuteMs = 60'000;
constexpr std::int64_t kHourMs = 60 * kMinuteMs;
constexpr std::int64_t kDayMs = 24 * kHourMs;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    return sys_days{year{y} / month{m} / day{d}}.time_since_epoch().count();
}

struct Civil {
    int year;
    unsigned month;
    unsigned day;
    int hour;
    int minute;
    int second;
    int millis;
};

Civil civil_from_ms(std::int64_t ms) {
    using namespace std::chrono;
    const std::int64_t days = floor_div(ms, kDayMs);
    std::int64_t rem = ms - days * kDayMs;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    Civil c{};
    c.year = static_cast<int>(ymd.year());
    c.month = static_cast<unsigned>(ymd.month());
    c.day = static_cast<unsigned>(ymd.day());
    c.hour = static_cast<int>(rem / kHourMs);
    rem %= kHourMs;
    c.minute = static_cast<int>(rem / kMinuteMs);
    rem %= kMinuteMs;
    c.second = static_cast<int>(rem / 1000);
    c.millis = static_cast<int>(rem % 1000);
    return c;
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return true;
}

// Parses the civil part shared by UTC and local timestamps. Returns the number
// of characters consumed, or 0 on failure.
std::size_t parse_civil(std::string_view s, std::int64_t& out_ms) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, frac = 0;
    if (!read_int(s, 0, 4, y) || s.size() < 16 || s[4] != '-' || !read_int(s, 5, 2, mo) ||
        s[7] != '-' || !read_int(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
        !read_int(s, 11, 2, h) || s[13] != ':' || !read_int(s, 14, 2, mi))
        return 0;
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!read_int(s, pos + 1, 2, sec)) return 0;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            std::size_t digits = 0;
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                if (digits < 3) frac = frac * 10 + (s[pos] - '0');
                ++digits;
                ++pos;
            }
            if (digits == 0) return 0;
            for (std::size_t i = digits; i < 3; ++i) frac *= 10;
        }
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return 0;
    out_ms = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * kDayMs +
             h * kHourMs + mi * kMinuteMs + sec * 1000 + frac;
    return pos;
}

// Last Sunday of `month` at 01:00 UTC, the EU summer-time switch instant.
std::int64_t eu_switch_ms(int year, unsigned month) {
    using namespace std::chrono;
    const sys_days sunday{std::chrono::year{year} / std::chrono::month{month} / Sunday[std::chrono::last]};
    return sunday.time_since_epoch().count() * kDayMs + kHourMs;
}

}  // namespace

// ---------------------------------------------------------------------------

TimeInterval::TimeInterval(Millis start_ms, Millis end_ms) : start_(start_ms), end_(end_ms) {
    if (start_ms < 0 || start_ms >= end_ms)
        throw std::invalid_argument(
            fmt::format("invalid time interval [{}, {})", start_ms, end_ms));
}

Millis TimeInterval::overlap(const TimeInterval& other) const noexcept {
    const Millis lo = std::max(start_, other.start_);
    const Millis hi = std::min(end_, other.end_);
    return hi > lo ? hi - lo : 0;
}

std::optional<TimeInterval> TimeInterval::intersect(const TimeInterval& other) const {
    const Millis lo = std::max(start_, other.start_);
    const Millis hi = std::min(end_, other.end_);
    if (hi <= lo) return std::nullopt;
    return TimeInterval{lo, hi};
}

std::vector<TimeInterval> normalize_intervals(std::span<const TimeInterval> intervals) {
    std::vector<TimeInterval> sorted(intervals.begin(), intervals.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<TimeInterval> out;
    for (const auto& iv : sorted) {
        if (!out.empty() && iv.start_ms() <= out.back().end_ms()) {
            if (iv.end_ms() > out.back().end_ms())
                out.back() = TimeInterval{out.back().start_ms(), iv.end_ms()};
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

std::vector<TimeInterval> interval_subtract(const TimeInterval& base,
                                            std::span<const TimeInterval> cuts) {
    std::vector<TimeInterval> out;
    Millis cursor = base.start_ms();
    for (const auto& cut : normalize_intervals(cuts)) {
        if (cut.end_ms() <= cursor) continue;
        if (cut.start_ms() >= base.end_ms()) break;
        if (cut.start_ms() > cursor) out.emplace_back(cursor, cut.start_ms());
        cursor = cut.end_ms();
        if (cursor >= base.end_ms()) break;
    }
    if (cursor < base.end_ms()) out.emplace_back(cursor, base.end_ms());
    return out;
}

std::vector<TimeInterval> interval_intersect(const TimeInterval& base,
                                             std::span<const TimeInterval> cuts) {
    std::vector<TimeInterval> out;
    for (const auto& cut : normalize_intervals(cuts))
        if (auto piece = base.intersect(cut)) out.push_back(*piece);
    return out;
}

Millis total_duration(std::span<const TimeInterval> intervals) {
    Millis total = 0;
    for (const auto& iv : intervals) total += iv.duration();
    return total;
}

// ---------------------------------------------------------------------------

std::optional<UtcTime> parse_iso8601(std::string_view text) {
    std::int64_t ms = 0;
    const std::size_t pos = parse_civil(text, ms);
    if (pos == 0 || text[10] != 'T') return std::nullopt;
    const std::string_view tail = text.substr(pos);
    if (tail == "Z") return UtcTime{ms};
    int oh = 0, om = 0;
    if (tail.size() != 6 || (tail[0] != '+' && tail[0] != '-') || !read_int(tail, 1, 2, oh) ||
        tail[3] != ':' || !read_int(tail, 4, 2, om) || oh > 23 || om > 59)
        return std::nullopt;
    const std::int64_t offset = (oh * kHourMs + om * kMinuteMs) * (tail[0] == '-' ? -1 : 1);
    return UtcTime{ms - offset};
}

std::string format_iso8601(UtcTime t) {
    const Civil c = civil_from_ms(t.ms);
    std::string out = fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", c.year, c.month, c.day,
                                  c.hour, c.minute, c.second);
    if (c.millis != 0) out += fmt::format(".{:03}", c.millis);
    out += "+00:00";
    return out;
}

std::optional<LocalTime> parse_local(std::string_view text) {
    std::int64_t ms = 0;
    const std::size_t pos = parse_civil(text, ms);
    if (pos == 0 || pos != text.size()) return std::nullopt;
    return LocalTime{ms};
}

LocalTime local_from_civil(int year, unsigned month, unsigned day, int hour, int minute,
                           int second) {
    return LocalTime{days_from_civil(year, month, day) * kDayMs + hour * kHourMs +
                     minute * kMinuteMs + second * 1000};
}

TimeZone TimeZone::fixed(int offset_minutes) { return TimeZone{Rule::Fixed, offset_minutes}; }

TimeZone TimeZone::europe_paris() { return TimeZone{Rule::EuropeParis, 60}; }

std::optional<TimeZone> TimeZone::parse(std::string_view name) {
    if (name == "Europe/Paris") return europe_paris();
    if (name == "UTC" || name == "Z") return fixed(0);
    int h = 0, m = 0;
    if (name.size() == 6 && (name[0] == '+' || name[0] == '-') && read_int(name, 1, 2, h) &&
        name[3] == ':' && read_int(name, 4, 2, m) && h <= 23 && m <= 59)
        return fixed((h * 60 + m) * (name[0] == '-' ? -1 : 1));
    return std::nullopt;
}

int TimeZone::offset_minutes_at(UtcTime t) const {
    if (rule_ == Rule::Fixed) return offset_;
    const int year = civil_from_ms(t.ms).year;
    const bool summer = t.ms >= eu_switch_ms(year, 3) && t.ms < eu_switch_ms(year, 10);
    return offset_ + (summer ? 60 : 0);
}

LocalTime TimeZone::to_local(UtcTime t) const {
    return LocalTime{t.ms + offset_minutes_at(t) * kMinuteMs};
}

UtcTime TimeZone::to_utc(LocalTime t) const {
    if (rule_ == Rule::Fixed) return UtcTime{t.ms - offset_ * kMinuteMs};
    // Candidate offsets: summer first so a repeated hour resolves to its first occurrence.
    for (int offset : {offset_ + 60, offset_}) {
        const UtcTime guess{t.ms - offset * kMinuteMs};
        if (offset_minutes_at(guess) == offset) return guess;
    }
    return UtcTime{t.ms - offset_ * kMinuteMs};
}

std::string TimeZone::name() const {
    if (rule_ == Rule::EuropeParis) return "Europe/Paris";
    if (offset_ == 0) return "UTC";
    const int a = std::abs(offset_);
    return fmt::format("{}{:02}:{:02}", offset_ < 0 ? '-' : '+', a / 60, a % 60);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Medium v) { return v == Medium::TV ? "tv" : "radio"; }
std::string_view to_string(ChannelStatus v) {
    return v == ChannelStatus::Public ? "public" : "private";
}
std::string_view to_string(ProgramCategory v) {
    switch (v) {
        case ProgramCategory::News: return "news";
        case ProgramCategory::Entertainment: return "entertainment";
        case ProgramCategory::MagazineDocumentary: return "magazine_documentary";
        case ProgramCategory::Sport: return "sport";
    }
    return "?";
}
std::string_view to_string(AudienceSlot v) { return v == AudienceSlot::High ? "high" : "low"; }
std::string_view to_string(ConflictPeriod v) {
    return v == ConflictPeriod::Before ? "before" : "after";
}
std::string_view to_string(SpeechLabel v) {
    switch (v) {
        case SpeechLabel::MaleSpeech: return "male";
        case SpeechLabel::FemaleSpeech: return "female";
        case SpeechLabel::Music: return "music";
        case SpeechLabel::Noise: return "noise";
    }
    return "?";
}
std::string_view to_string(Role v) {
    switch (v) {
        case Role::Presenter: return "presenter";
        case Role::Journalist: return "journalist";
        case Role::PoliticalGuest: return "political_guest";
        case Role::Expert: return "expert";
        case Role::Other: return "other";
    }
    return "?";
}
std::string_view to_string(MetricKind k) {
    switch (k) {
        case MetricKind::WPR: return "WPR";
        case MetricKind::WSR: return "WSR";
        case MetricKind::WQR: return "WQR";
        case MetricKind::WFR: return "WFR";
    }
    return "?";
}

namespace {
template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view token, const std::array<E, N>& values) {
    for (E v : values)
        if (to_string(v) == token) return v;
    return std::nullopt;
}
}  // namespace

template <>
std::optional<Medium> parse_enum<Medium>(std::string_view t) {
    return lookup(t, std::array{Medium::TV, Medium::Radio});
}
template <>
std::optional<ChannelStatus> parse_enum<ChannelStatus>(std::string_view t) {
    return lookup(t, std::array{ChannelStatus::Public, ChannelStatus::Private});
}
template <>
std::optional<ProgramCategory> parse_enum<ProgramCategory>(std::string_view t) {
    return lookup(t, std::array{ProgramCategory::News, ProgramCategory::Entertainment,
                                ProgramCategory::MagazineDocumentary, ProgramCategory::Sport});
}
template <>
std::optional<AudienceSlot> parse_enum<AudienceSlot>(std::string_view t) {
    return lookup(t, std::array{AudienceSlot::High, AudienceSlot::Low});
}
template <>
std::optional<ConflictPeriod> parse_enum<ConflictPeriod>(std::string_view t) {
    return lookup(t, std::array{ConflictPeriod::Before, ConflictPeriod::After});
}
template <>
std::optional<SpeechLabel> parse_enum<SpeechLabel>(std::string_view t) {
    return lookup(t, std::array{SpeechLabel::MaleSpeech, SpeechLabel::FemaleSpeech,
                                SpeechLabel::Music, SpeechLabel::Noise});
}
template <>
std::optional<Role> parse_enum<Role>(std::string_view t) {
    return lookup(t, std::array{Role::Presenter, Role::Journalist, Role::PoliticalGuest,
                                Role::Expert, Role::Other});
}

// ---------------------------------------------------------------------------

MetricValue::MetricValue(MetricKind kind, double female_mass, double weight)
    : kind_(kind), female_(female_mass), weight_(weight) {
    if (!(weight >= 0.0) || !(female_mass >= 0.0) || female_mass > weight * (1.0 + 1e-12))
        throw std::invalid_argument(fmt::format("invalid {} mass {} / weight {}",
                                                to_string(kind), female_mass, weight));
}

std::optional<double> MetricValue::female_pct() const {
    if (!defined()) return std::nullopt;
    return std::clamp(100.0 * female_ / weight_, 0.0, 100.0);
}

std::optional<double> MetricValue::male_pct() const {
    if (auto f = female_pct()) return 100.0 - *f;
    return std::nullopt;
}

MetricValue& MetricValue::operator+=(const MetricValue& other) {
    if (other.kind_ != kind_) throw std::invalid_argument("merging metrics of different kinds");
    female_ += other.female_;
    weight_ += other.weight_;
    return *this;
}

// ---------------------------------------------------------------------------

std::optional<PeakWindow> parse_peak_window(std::string_view text) {
    int h1 = 0, m1 = 0, h2 = 0, m2 = 0;
    if (text.size() != 11 || !read_int(text, 0, 2, h1) || text[2] != ':' ||
        !read_int(text, 3, 2, m1) || text[5] != '-' || !read_int(text, 6, 2, h2) ||
        text[8] != ':' || !read_int(text, 9, 2, m2))
        return std::nullopt;
    PeakWindow w{h1 * 60 + m1, h2 * 60 + m2};
    if (m1 > 59 || m2 > 59 || w.start_minute >= w.end_minute || w.end_minute > 24 * 60)
        return std::nullopt;
    return w;
}

std::string format_peak_window(const PeakWindow& w) {
    return fmt::format("{:02}:{:02}-{:02}:{:02}", w.start_minute / 60, w.start_minute % 60,
                       w.end_minute / 60, w.end_minute % 60);
}

Millis peak_overlap_ms(UtcTime start, UtcTime end, Medium medium, const SlotRules& rules) {
    if (end.ms <= start.ms) return 0;
    const PeakWindow& w = rules.window(medium);
    const std::int64_t first_day = floor_div(rules.zone.to_local(start).ms, kDayMs) - 1;
    const std::int64_t last_day = floor_div(rules.zone.to_local(end).ms, kDayMs) + 1;
    Millis overlap = 0;
    for (std::int64_t day = first_day; day <= last_day; ++day) {
        const UtcTime lo = rules.zone.to_utc(LocalTime{day * kDayMs + w.start_minute * kMinuteMs});
        const UtcTime hi = rules.zone.to_utc(LocalTime{day * kDayMs + w.end_minute * kMinuteMs});
        const std::int64_t a = std::max(lo.ms, start.ms);
        const std::int64_t b = std::min(hi.ms, end.ms);
        if (b > a) overlap += b - a;
    }
    return overlap;
}

AudienceSlot classify_audience(const Program& program, const SlotRules& rules) {
    const Millis duration = program.end_utc.ms - program.start_utc.ms;
    const Millis overlap = peak_overlap_ms(program.start_utc, program.end_utc, program.medium, rules);
    return 2 * overlap >= duration ? AudienceSlot::High : AudienceSlot::Low;
}

UtcTime default_conflict_cutoff(const TimeZone& zone) {
    return zone.to_utc(local_from_civil(2023, 10, 7));
}

ConflictPeriod classify_conflict_period(const Program& program, UtcTime cutoff) {
    return program.start_utc >= cutoff ? ConflictPeriod::After : ConflictPeriod::Before;
}

}  // namespace wre
