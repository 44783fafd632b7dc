#include "wre/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wre/text.hpp"

namespace wre {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(IngestErrorKind kind) {
    switch (kind) {
        case IngestErrorKind::Io: return "Io";
        case IngestErrorKind::MalformedRecord: return "MalformedRecord";
        case IngestErrorKind::SchemaViolation: return "SchemaViolation";
        case IngestErrorKind::InvalidEnum: return "InvalidEnum";
        case IngestErrorKind::NonMonotoneTimes: return "NonMonotoneTimes";
        case IngestErrorKind::DuplicateProgramId: return "DuplicateProgramId";
        case IngestErrorKind::DuplicateReport: return "DuplicateReport";
        case IngestErrorKind::OverlappingSegments: return "OverlappingSegments";
        case IngestErrorKind::DanglingReference: return "DanglingReference";
    }
    return "?";
}

IngestError::IngestError(IngestErrorKind kind, std::string source, std::size_t line,
                         std::string detail)
    : Error(line > 0 ? fmt::format("{}:{}: {}: {}", source, line, to_string(kind), detail)
                     : fmt::format("{}: {}: {}", source, to_string(kind), detail)),
      kind_(kind),
      source_(std::move(source)),
      line_(line) {}

// ---------------------------------------------------------------------------

void NameLexicon::add(std::string_view raw_name, std::int64_t male_count,
                      std::int64_t female_count) {
    if (male_count < 0 || female_count < 0)
        throw std::invalid_argument("negative name count");
    if (male_count + female_count == 0) return;
    std::string key = text::canonical_name(raw_name);
    auto [it, inserted] = records_.try_emplace(key);
    if (inserted) it->second.name = std::move(key);
    it->second.total_count += male_count + female_count;
    it->second.female_count += female_count;
}

const NameRecord* NameLexicon::find(std::string_view canonical) const {
    const auto it = records_.find(canonical);
    return it == records_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------

namespace csv {

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

std::string join(const std::vector<std::string>& fields, char delim) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += delim;
        const std::string& f = fields[i];
        if (f.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos) {
            out += '"';
            for (char c : f) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    return out;
}

}  // namespace csv

namespace {

/// Line reader that tracks 1-based line numbers and strips CR and a leading BOM.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++number_;
        if (number_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Reads a delimited file whose first line must equal `header`; calls
/// `row(fields, line_number)` for every non-empty data line.
template <typename RowFn>
void read_table(std::istream& in, std::string_view source, char delim,
                const std::vector<std::string>& header, IngestErrorKind arity_error, RowFn row) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line))
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), 0,
                          "missing header row");
    if (csv::split(line, delim) != header)
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), 1,
                          fmt::format("expected header '{}'", csv::join(header, delim)));
    while (reader.next(line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = csv::split(line, delim);
        } catch (const std::invalid_argument& e) {
            throw IngestError(arity_error, std::string(source), reader.number(), e.what());
        }
        if (fields.size() != header.size())
            throw IngestError(arity_error, std::string(source), reader.number(),
                              fmt::format("expected {} fields, found {}", header.size(),
                                          fields.size()));
        row(fields, reader.number());
    }
}

template <typename E>
E require_enum(std::string_view token, std::string_view what, std::string_view source,
               std::size_t line) {
    if (auto v = parse_enum<E>(token)) return *v;
    throw IngestError(IngestErrorKind::InvalidEnum, std::string(source), line,
                      fmt::format("unknown {} '{}'", what, token));
}

Millis require_ms(std::string_view token, std::string_view what, std::string_view source,
                  std::size_t line) {
    Millis v = 0;
    if (!parse_int(token, v) || v < 0)
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), line,
                          fmt::format("{} must be a non-negative integer, got '{}'", what, token));
    return v;
}

void require_id(std::string_view token, std::string_view what, std::string_view source,
                std::size_t line) {
    if (token.empty())
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), line,
                          fmt::format("empty {}", what));
}

// --- JSON lines --------------------------------------------------------------

template <typename RowFn>
void read_jsonl(std::istream& in, std::string_view source,
                const std::vector<std::string_view>& keys, RowFn row) {
    LineReader reader(in);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const std::size_t n = reader.number();
        auto fail = [&](const std::string& detail) {
            return IngestError(IngestErrorKind::SchemaViolation, std::string(source), n, detail);
        };
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw fail(fmt::format("invalid JSON: {}", e.what()));
        }
        if (!record.is_object()) throw fail("record is not an object");
        if (record.size() != keys.size())
            throw fail(fmt::format("expected {} fields, found {}", keys.size(), record.size()));
        for (auto key : keys)
            if (!record.contains(key)) throw fail(fmt::format("missing field '{}'", key));
        try {
            row(record, n);
        } catch (const json::exception& e) {
            throw fail(fmt::format("wrong field type: {}", e.what()));
        }
    }
}

std::string json_string(const json& record, const char* key, std::string_view source,
                        std::size_t line) {
    const json& v = record.at(key);
    if (!v.is_string())
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), line,
                          fmt::format("'{}' must be a string", key));
    return v.get<std::string>();
}

Millis json_ms(const json& record, const char* key, std::string_view source, std::size_t line) {
    const json& v = record.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), line,
                          fmt::format("'{}' must be a non-negative integer", key));
    return v.get<Millis>();
}

double json_real(const json& record, const char* key, std::string_view source,
                 std::size_t line) {
    const json& v = record.at(key);
    if (!v.is_number())
        throw IngestError(IngestErrorKind::SchemaViolation, std::string(source), line,
                          fmt::format("'{}' must be a number", key));
    return v.get<double>();
}

TimeInterval json_span(const json& record, std::string_view source, std::size_t line) {
    const Millis start = json_ms(record, "start_ms", source, line);
    const Millis end = json_ms(record, "end_ms", source, line);
    if (end <= start)
        throw IngestError(IngestErrorKind::NonMonotoneTimes, std::string(source), line,
                          fmt::format("end_ms {} <= start_ms {}", end, start));
    return TimeInterval{start, end};
}

template <typename T, typename Key>
void sort_per_media(std::map<std::string, std::vector<std::pair<T, std::size_t>>>& staged,
                    std::map<std::string, std::vector<T>>& out, Key key) {
    for (auto& [media, items] : staged) {
        std::stable_sort(items.begin(), items.end(),
                         [&](const auto& a, const auto& b) { return key(a.first) < key(b.first); });
        auto& dest = out[media];
        dest.reserve(items.size());
        for (auto& item : items) dest.push_back(std::move(item.first));
    }
}

std::string format_real(double v) { return json(v).dump(); }

}  // namespace

// ---------------------------------------------------------------------------

NameLexicon parse_name_db(std::istream& in, std::string_view source) {
    NameLexicon lexicon;
    read_table(in, source, ';', {"sexe", "preusuel", "annais", "nombre"},
               IngestErrorKind::MalformedRecord,
               [&](const std::vector<std::string>& f, std::size_t line) {
                   auto malformed = [&](const std::string& detail) {
                       return IngestError(IngestErrorKind::MalformedRecord, std::string(source),
                                          line, detail);
                   };
                   if (f[0] != "1" && f[0] != "2")
                       throw malformed(fmt::format("sex code must be 1 or 2, got '{}'", f[0]));
                   std::int64_t count = 0;
                   if (!parse_int(f[3], count) || count < 0)
                       throw malformed(fmt::format("count must be a non-negative integer, got '{}'",
                                                   f[3]));
                   if (f[1] == kRareNameSentinel) return;
                   if (f[1].empty() || !text::is_valid_utf8(f[1]))
                       throw malformed("name must be non-empty UTF-8");
                   if (f[0] == "1")
                       lexicon.add(f[1], count, 0);
                   else
                       lexicon.add(f[1], 0, count);
               });
    return lexicon;
}

void write_name_db(std::ostream& out, const NameLexicon& lexicon) {
    out << "sexe;preusuel;annais;nombre\n";
    for (const auto& [name, rec] : lexicon.records()) {
        if (rec.male_count() > 0) out << "1;" << name << ";XXXX;" << rec.male_count() << '\n';
        if (rec.female_count > 0) out << "2;" << name << ";XXXX;" << rec.female_count << '\n';
    }
}

ProgramTable parse_programs(std::istream& in, std::string_view source) {
    ProgramTable programs;
    read_table(
        in, source, ',',
        {"program_id", "channel_id", "medium", "status", "category", "start_utc", "end_utc",
         "media_id", "media_start_ms", "media_end_ms"},
        IngestErrorKind::SchemaViolation,
        [&](const std::vector<std::string>& f, std::size_t line) {
            const std::string src(source);
            require_id(f[0], "program_id", source, line);
            require_id(f[1], "channel_id", source, line);
            require_id(f[7], "media_id", source, line);
            Program p;
            p.program_id = f[0];
            p.channel_id = f[1];
            p.medium = require_enum<Medium>(f[2], "medium", source, line);
            p.status = require_enum<ChannelStatus>(f[3], "status", source, line);
            p.category = require_enum<ProgramCategory>(f[4], "category", source, line);
            const auto start = parse_iso8601(f[5]);
            const auto end = parse_iso8601(f[6]);
            if (!start || !end)
                throw IngestError(IngestErrorKind::SchemaViolation, src, line,
                                  "timestamps must be ISO-8601 with an explicit offset");
            if (*end <= *start)
                throw IngestError(IngestErrorKind::NonMonotoneTimes, src, line,
                                  "end_utc must be after start_utc");
            p.start_utc = *start;
            p.end_utc = *end;
            p.media_id = f[7];
            const Millis ms_start = require_ms(f[8], "media_start_ms", source, line);
            const Millis ms_end = require_ms(f[9], "media_end_ms", source, line);
            if (ms_end <= ms_start)
                throw IngestError(IngestErrorKind::NonMonotoneTimes, src, line,
                                  "media_end_ms must be after media_start_ms");
            p.media_span = TimeInterval{ms_start, ms_end};
            const std::int64_t wall = end->ms - start->ms;
            if (std::abs(wall - p.media_span.duration()) > 1000)
                throw IngestError(IngestErrorKind::SchemaViolation, src, line,
                                  fmt::format("media span lasts {} ms but broadcast lasts {} ms",
                                              p.media_span.duration(), wall));
            if (programs.contains(p.program_id))
                throw IngestError(IngestErrorKind::DuplicateProgramId, src, line,
                                  fmt::format("program_id '{}' already defined", p.program_id));
            programs.emplace(p.program_id, std::move(p));
        });
    return programs;
}

void write_programs(std::ostream& out, const ProgramTable& programs) {
    out << "program_id,channel_id,medium,status,category,start_utc,end_utc,media_id,"
           "media_start_ms,media_end_ms\n";
    for (const auto& [id, p] : programs) {
        out << csv::join({p.program_id, p.channel_id, std::string(to_string(p.medium)),
                          std::string(to_string(p.status)), std::string(to_string(p.category)),
                          format_iso8601(p.start_utc), format_iso8601(p.end_utc), p.media_id,
                          std::to_string(p.media_span.start_ms()),
                          std::to_string(p.media_span.end_ms())},
                         ',')
            << '\n';
    }
}

std::vector<ChannelReport> parse_reports(std::istream& in, std::string_view source) {
    std::vector<ChannelReport> reports;
    std::set<std::pair<std::string, Role>> seen;
    read_table(in, source, ',', {"program_id", "role", "male_count", "female_count"},
               IngestErrorKind::SchemaViolation,
               [&](const std::vector<std::string>& f, std::size_t line) {
                   require_id(f[0], "program_id", source, line);
                   ChannelReport r;
                   r.program_id = f[0];
                   r.role = require_enum<Role>(f[1], "role", source, line);
                   if (!parse_int(f[2], r.male_count) || !parse_int(f[3], r.female_count) ||
                       r.male_count < 0 || r.female_count < 0)
                       throw IngestError(IngestErrorKind::SchemaViolation, std::string(source),
                                         line, "counts must be non-negative integers");
                   if (!seen.emplace(r.program_id, r.role).second)
                       throw IngestError(IngestErrorKind::DuplicateReport, std::string(source),
                                         line,
                                         fmt::format("second '{}' record for program '{}'",
                                                     f[1], r.program_id));
                   reports.push_back(std::move(r));
               });
    return reports;
}

void write_reports(std::ostream& out, const std::vector<ChannelReport>& reports) {
    out << "program_id,role,male_count,female_count\n";
    for (const auto& r : reports)
        out << csv::join({r.program_id, std::string(to_string(r.role)),
                          std::to_string(r.male_count), std::to_string(r.female_count)},
                         ',')
            << '\n';
}

BreakTable parse_breaks(std::istream& in, std::string_view source) {
    std::map<std::string, std::vector<std::pair<TimeInterval, std::size_t>>> staged;
    read_table(in, source, ',', {"media_id", "start_ms", "end_ms"},
               IngestErrorKind::SchemaViolation,
               [&](const std::vector<std::string>& f, std::size_t line) {
                   require_id(f[0], "media_id", source, line);
                   const Millis start = require_ms(f[1], "start_ms", source, line);
                   const Millis end = require_ms(f[2], "end_ms", source, line);
                   if (end <= start)
                       throw IngestError(IngestErrorKind::NonMonotoneTimes, std::string(source),
                                         line, "end_ms must be after start_ms");
                   staged[f[0]].emplace_back(TimeInterval{start, end}, line);
               });
    BreakTable out;
    sort_per_media(staged, out, [](const TimeInterval& iv) { return iv; });
    return out;
}

void write_breaks(std::ostream& out, const BreakTable& breaks) {
    out << "media_id,start_ms,end_ms\n";
    for (const auto& [media, spans] : breaks)
        for (const auto& iv : spans)
            out << csv::join({media, std::to_string(iv.start_ms()), std::to_string(iv.end_ms())},
                             ',')
                << '\n';
}

SegmentTable parse_segments(std::istream& in, std::string_view source) {
    std::map<std::string, std::vector<std::pair<SpeechSegment, std::size_t>>> staged;
    read_jsonl(in, source, {"media_id", "start_ms", "end_ms", "label"},
               [&](const json& r, std::size_t line) {
                   std::string media = json_string(r, "media_id", source, line);
                   require_id(media, "media_id", source, line);
                   const TimeInterval span = json_span(r, source, line);
                   const auto label = require_enum<SpeechLabel>(
                       json_string(r, "label", source, line), "label", source, line);
                   staged[media].emplace_back(SpeechSegment{media, span, label}, line);
               });
    for (auto& [media, items] : staged) {
        std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            return a.first.span < b.first.span;
        });
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].first.span.start_ms() < items[i - 1].first.span.end_ms())
                throw IngestError(
                    IngestErrorKind::OverlappingSegments, std::string(source),
                    std::max(items[i].second, items[i - 1].second),
                    fmt::format("segments [{}, {}) and [{}, {}) overlap in media '{}'",
                                items[i - 1].first.span.start_ms(),
                                items[i - 1].first.span.end_ms(), items[i].first.span.start_ms(),
                                items[i].first.span.end_ms(), media));
    }
    SegmentTable out;
    sort_per_media(staged, out, [](const SpeechSegment& s) { return s.span; });
    return out;
}

void write_segments(std::ostream& out, const SegmentTable& segments) {
    for (const auto& [media, list] : segments)
        for (const auto& s : list) {
            ordered_json r;
            r["media_id"] = s.media_id;
            r["start_ms"] = s.span.start_ms();
            r["end_ms"] = s.span.end_ms();
            r["label"] = to_string(s.label);
            out << r.dump() << '\n';
        }
}

UtteranceTable parse_utterances(std::istream& in, std::string_view source) {
    std::map<std::string, std::vector<std::pair<Utterance, std::size_t>>> staged;
    read_jsonl(in, source, {"media_id", "start_ms", "end_ms", "text"},
               [&](const json& r, std::size_t line) {
                   std::string media = json_string(r, "media_id", source, line);
                   require_id(media, "media_id", source, line);
                   const TimeInterval span = json_span(r, source, line);
                   std::string body = json_string(r, "text", source, line);
                   if (text::trim(body).empty())
                       throw IngestError(IngestErrorKind::SchemaViolation, std::string(source),
                                         line, "utterance text is empty");
                   staged[media].emplace_back(Utterance{media, span, std::move(body)}, line);
               });
    UtteranceTable out;
    sort_per_media(staged, out, [](const Utterance& u) { return u.span; });
    return out;
}

void write_utterances(std::ostream& out, const UtteranceTable& utterances) {
    for (const auto& [media, list] : utterances)
        for (const auto& u : list) {
            ordered_json r;
            r["media_id"] = u.media_id;
            r["start_ms"] = u.span.start_ms();
            r["end_ms"] = u.span.end_ms();
            r["text"] = u.text;
            out << r.dump() << '\n';
        }
}

FaceTable parse_faces(std::istream& in, std::string_view source) {
    std::map<std::string, std::vector<std::pair<FaceObservation, std::size_t>>> staged;
    read_jsonl(in, source, {"media_id", "frame_ms", "height_ratio", "female_score"},
               [&](const json& r, std::size_t line) {
                   FaceObservation f;
                   f.media_id = json_string(r, "media_id", source, line);
                   require_id(f.media_id, "media_id", source, line);
                   f.frame_ms = json_ms(r, "frame_ms", source, line);
                   f.height_ratio = json_real(r, "height_ratio", source, line);
                   f.female_score = json_real(r, "female_score", source, line);
                   if (!(f.height_ratio > 0.0 && f.height_ratio <= 1.0))
                       throw IngestError(IngestErrorKind::SchemaViolation, std::string(source),
                                         line,
                                         fmt::format("height_ratio {} outside (0, 1]",
                                                     f.height_ratio));
                   if (!(f.female_score >= 0.0 && f.female_score <= 1.0))
                       throw IngestError(IngestErrorKind::SchemaViolation, std::string(source),
                                         line,
                                         fmt::format("female_score {} outside [0, 1]",
                                                     f.female_score));
                   std::string media = f.media_id;
                   staged[media].emplace_back(std::move(f), line);
               });
    FaceTable out;
    sort_per_media(staged, out, [](const FaceObservation& f) { return f.frame_ms; });
    return out;
}

void write_faces(std::ostream& out, const FaceTable& faces) {
    for (const auto& [media, list] : faces)
        for (const auto& f : list)
            out << fmt::format(R"({{"media_id":{},"frame_ms":{},"height_ratio":{},"female_score":{}}})",
                               json(f.media_id).dump(), f.frame_ms, format_real(f.height_ratio),
                               format_real(f.female_score))
                << '\n';
}

std::vector<std::string> parse_stop_list(std::istream& in) {
    std::vector<std::string> names;
    LineReader reader(in);
    std::string line;
    while (reader.next(line)) {
        const auto trimmed = text::trim(line);
        if (!trimmed.empty()) names.push_back(text::canonical_name(trimmed));
    }
    return names;
}

// ---------------------------------------------------------------------------

ValidationReport validate_bundle(const CorpusBundle& bundle) {
    ValidationReport report;
    report.programs = bundle.programs.size();
    report.reports = bundle.reports.size();
    report.names = bundle.lexicon.size();

    std::set<std::string, std::less<>> media_ids;
    for (const auto& [id, p] : bundle.programs) media_ids.insert(p.media_id);

    auto check_media = [&](const auto& table, std::string_view kind, std::size_t& count) {
        for (const auto& [media, items] : table) {
            if (!media_ids.contains(media))
                throw IngestError(IngestErrorKind::DanglingReference, std::string(kind), 0,
                                  fmt::format("media '{}' is not referenced by any program",
                                              media));
            count += items.size();
        }
    };
    check_media(bundle.breaks, "breaks", report.breaks);
    check_media(bundle.segments, "segments", report.segments);
    check_media(bundle.utterances, "utterances", report.utterances);
    check_media(bundle.faces, "faces", report.faces);

    std::set<std::string, std::less<>> reported;
    for (const auto& r : bundle.reports) {
        if (!bundle.programs.contains(r.program_id))
            throw IngestError(IngestErrorKind::DanglingReference, "reports", 0,
                              fmt::format("report references unknown program '{}'",
                                          r.program_id));
        reported.insert(r.program_id);
    }

    for (const auto& [id, p] : bundle.programs) {
        const TimeInterval& span = p.media_span;
        if (!reported.contains(id))
            report.warnings.push_back(fmt::format("program '{}' has no channel report", id));

        bool any_segment = false;
        if (auto it = bundle.segments.find(p.media_id); it != bundle.segments.end())
            any_segment = std::any_of(it->second.begin(), it->second.end(),
                                      [&](const auto& s) { return s.span.overlap(span) > 0; });
        if (!any_segment)
            report.warnings.push_back(fmt::format("program '{}' has no speech segments", id));

        bool any_utterance = false;
        if (auto it = bundle.utterances.find(p.media_id); it != bundle.utterances.end())
            any_utterance = std::any_of(it->second.begin(), it->second.end(), [&](const auto& u) {
                return span.contains(u.span.start_ms() + u.span.duration() / 2);
            });
        if (!any_utterance)
            report.warnings.push_back(fmt::format("program '{}' has no utterances", id));

        if (p.medium == Medium::TV) {
            bool any_face = false;
            if (auto it = bundle.faces.find(p.media_id); it != bundle.faces.end())
                any_face = std::any_of(it->second.begin(), it->second.end(),
                                       [&](const auto& f) { return span.contains(f.frame_ms); });
            if (!any_face)
                report.warnings.push_back(fmt::format("TV program '{}' has no faces", id));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

BundlePaths BundlePaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "names.csv",      dir / "programs.csv",    dir / "reports.csv",
            dir / "breaks.csv",     dir / "segments.jsonl",  dir / "utterances.jsonl",
            dir / "faces.jsonl"};
}

namespace {

template <typename Parser>
auto parse_file(const std::filesystem::path& path, Parser parser) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestError(IngestErrorKind::Io, path.string(), 0, "cannot open file for reading");
    return parser(in, path.string());
}

void write_file(const std::filesystem::path& path, const auto& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IngestError(IngestErrorKind::Io, path.string(), 0, "cannot open file for writing");
    writer(out);
    if (!out) throw IngestError(IngestErrorKind::Io, path.string(), 0, "write failed");
}

}  // namespace

CorpusBundle load_bundle(const BundlePaths& paths) {
    CorpusBundle b;
    b.lexicon = parse_file(paths.names, [](auto& in, auto src) { return parse_name_db(in, src); });
    b.programs =
        parse_file(paths.programs, [](auto& in, auto src) { return parse_programs(in, src); });
    b.reports = parse_file(paths.reports, [](auto& in, auto src) { return parse_reports(in, src); });
    if (std::filesystem::exists(paths.breaks))
        b.breaks = parse_file(paths.breaks, [](auto& in, auto src) { return parse_breaks(in, src); });
    b.segments =
        parse_file(paths.segments, [](auto& in, auto src) { return parse_segments(in, src); });
    b.utterances = parse_file(paths.utterances,
                              [](auto& in, auto src) { return parse_utterances(in, src); });
    b.faces = parse_file(paths.faces, [](auto& in, auto src) { return parse_faces(in, src); });
    return b;
}

void save_bundle(const CorpusBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto paths = BundlePaths::in_directory(dir);
    write_file(paths.names, [&](std::ostream& o) { write_name_db(o, bundle.lexicon); });
    write_file(paths.programs, [&](std::ostream& o) { write_programs(o, bundle.programs); });
    write_file(paths.reports, [&](std::ostream& o) { write_reports(o, bundle.reports); });
    write_file(paths.breaks, [&](std::ostream& o) { write_breaks(o, bundle.breaks); });
    write_file(paths.segments, [&](std::ostream& o) { write_segments(o, bundle.segments); });
    write_file(paths.utterances, [&](std::ostream& o) { write_utterances(o, bundle.utterances); });
    write_file(paths.faces, [&](std::ostream& o) { write_faces(o, bundle.faces); });
}

}  // namespace wre
