#pragma once

// Strict parsers and writers for every corpus input file, and the bundle that
// holds a fully parsed corpus.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wre/core.hpp"

namespace wre {

enum class IngestErrorKind {
    Io,
    MalformedRecord,
    SchemaViolation,
    InvalidEnum,
    NonMonotoneTimes,
    DuplicateProgramId,
    DuplicateReport,
    OverlappingSegments,
    DanglingReference,
};

std::string_view to_string(IngestErrorKind kind);

/// Fatal input problem. `line` is 1-based; 0 when the error is not tied to a line.
class IngestError : public Error {
public:
    IngestError(IngestErrorKind kind, std::string source, std::size_t line, std::string detail);

    IngestErrorKind kind() const noexcept { return kind_; }
    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    IngestErrorKind kind_;
    std::string source_;
    std::size_t line_;
};

/// Canonical first name -> population record.
class NameLexicon {
public:
    /// Accumulates counts under the canonical form of `raw_name`.
    void add(std::string_view raw_name, std::int64_t male_count, std::int64_t female_count);

    const NameRecord* find(std::string_view canonical) const;
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::map<std::string, NameRecord, std::less<>>& records() const noexcept {
        return records_;
    }

    friend bool operator==(const NameLexicon&, const NameLexicon&) = default;

private:
    std::map<std::string, NameRecord, std::less<>> records_;
};

/// Placeholder used by the public birth-registration export for rare names.
inline constexpr std::string_view kRareNameSentinel = "_PRENOMS_RARES";

using ProgramTable = std::map<std::string, Program>;
using BreakTable = std::map<std::string, std::vector<TimeInterval>>;
using SegmentTable = std::map<std::string, std::vector<SpeechSegment>>;
using UtteranceTable = std::map<std::string, std::vector<Utterance>>;
using FaceTable = std::map<std::string, std::vector<FaceObservation>>;

NameLexicon parse_name_db(std::istream& in, std::string_view source = "names");
ProgramTable parse_programs(std::istream& in, std::string_view source = "programs");
std::vector<ChannelReport> parse_reports(std::istream& in, std::string_view source = "reports");
BreakTable parse_breaks(std::istream& in, std::string_view source = "breaks");
SegmentTable parse_segments(std::istream& in, std::string_view source = "segments");
UtteranceTable parse_utterances(std::istream& in, std::string_view source = "utterances");
FaceTable parse_faces(std::istream& in, std::string_view source = "faces");

/// Stop-list: one canonical name per line; blank lines ignored.
std::vector<std::string> parse_stop_list(std::istream& in);

void write_name_db(std::ostream& out, const NameLexicon& lexicon);
void write_programs(std::ostream& out, const ProgramTable& programs);
void write_reports(std::ostream& out, const std::vector<ChannelReport>& reports);
void write_breaks(std::ostream& out, const BreakTable& breaks);
void write_segments(std::ostream& out, const SegmentTable& segments);
void write_utterances(std::ostream& out, const UtteranceTable& utterances);
void write_faces(std::ostream& out, const FaceTable& faces);

struct CorpusBundle {
    ProgramTable programs;
    std::vector<ChannelReport> reports;
    BreakTable breaks;
    SegmentTable segments;
    UtteranceTable utterances;
    FaceTable faces;
    NameLexicon lexicon;

    friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

struct ValidationReport {
    std::size_t programs = 0;
    std::size_t reports = 0;
    std::size_t breaks = 0;
    std::size_t segments = 0;
    std::size_t utterances = 0;
    std::size_t faces = 0;
    std::size_t names = 0;
    std::vector<std::string> warnings;
};

/// Cross-reference checks. Throws IngestError(DanglingReference) on a report
/// for an unknown program or a descriptor for an unknown media file; softer
/// coverage gaps are returned as warnings.
ValidationReport validate_bundle(const CorpusBundle& bundle);

/// File layout of a bundle directory.
struct BundlePaths {
    std::filesystem::path names;
    std::filesystem::path programs;
    std::filesystem::path reports;
    std::filesystem::path breaks;  // optional on load
    std::filesystem::path segments;
    std::filesystem::path utterances;
    std::filesystem::path faces;

    static BundlePaths in_directory(const std::filesystem::path& dir);
};

CorpusBundle load_bundle(const BundlePaths& paths);
void save_bundle(const CorpusBundle& bundle, const std::filesystem::path& dir);

// Delimited-text helpers shared with the report writer.
namespace csv {
std::vector<std::string> split(std::string_view line, char delim);
std::string join(const std::vector<std::string>& fields, char delim);
}  // namespace csv

}  // namespace wre
