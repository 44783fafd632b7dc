#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "random_bundle.hpp"
#include "wre/ingest.hpp"

using namespace wre;

namespace {

template <typename Parse>
IngestErrorKind failure_kind(Parse parse, const std::string& content) {
    std::istringstream in(content);
    try {
        parse(in);
    } catch (const IngestError& e) {
        return e.kind();
    }
    FAIL("expected an IngestError");
    return IngestErrorKind::Io;
}

const char* kProgramsHeader =
    "program_id,channel_id,medium,status,category,start_utc,end_utc,media_id,media_start_ms,"
    "media_end_ms\n";

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wre_ingest_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("name database aggregates years and canonicalizes names") {
    std::istringstream in(
        "sexe;preusuel;annais;nombre\n"
        "1;CLAUDE;1950;400000\n"
        "1;CLAUDE;1960;12247\n"
        "2;CLAUDE;XXXX;56215\n"
        "2;_PRENOMS_RARES;1990;999\n"
        "2;JEAN-MARIE;1955;10\n"
        "1;jean-marie;1955;90\n");
    const NameLexicon lex = parse_name_db(in);
    CHECK(lex.size() == 2);
    const NameRecord* claude = lex.find("Claude");
    REQUIRE(claude != nullptr);
    CHECK(claude->total_count == 468'462);
    CHECK(claude->female_count == 56'215);
    CHECK(claude->female_prob() == doctest::Approx(0.12).epsilon(1e-4));
    CHECK(lex.find("Jean-Marie")->female_prob() == doctest::Approx(0.1));
    CHECK(lex.find("CLAUDE") == nullptr);
}

TEST_CASE("lexicon does not depend on row order") {
    std::vector<std::string> rows = {"1;LÉA;2000;3", "2;LÉA;2000;900", "2;LÉA;2001;77",
                                     "1;PIERRE;1980;5000", "2;PIERRE;1980;2", "2;ZOÉ;2010;40",
                                     "1;ZOÉ;2010;1", "2;_PRENOMS_RARES;2010;5"};
    auto parse = [](const std::vector<std::string>& r) {
        std::string text = "sexe;preusuel;annais;nombre\n";
        for (const auto& line : r) text += line + "\n";
        std::istringstream in(text);
        return parse_name_db(in);
    };
    const NameLexicon reference = parse(rows);
    synth::Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        for (std::size_t k = rows.size(); k > 1; --k)
            std::swap(rows[k - 1], rows[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(k) - 1))]);
        CHECK(parse(rows) == reference);
    }
}

TEST_CASE("female probabilities equal the count ratio") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto b = testing::random_bundle(seed);
        for (const auto& [name, rec] : b.lexicon.records()) {
            CHECK(rec.female_prob() >= 0.0);
            CHECK(rec.female_prob() <= 1.0);
            CHECK(std::fabs(rec.female_prob() - static_cast<double>(rec.female_count) /
                                                    static_cast<double>(rec.total_count)) < 1e-12);
        }
    }
}

TEST_CASE("name database rejects malformed rows") {
    auto parse = [](std::istream& in) { return parse_name_db(in); };
    CHECK(failure_kind(parse, "sexe;preusuel;annais;nombre\n3;LÉA;2000;1\n") ==
          IngestErrorKind::MalformedRecord);
    CHECK(failure_kind(parse, "sexe;preusuel;annais;nombre\n1;LÉA;2000;-1\n") ==
          IngestErrorKind::MalformedRecord);
    CHECK(failure_kind(parse, "sexe;preusuel;annais;nombre\n1;LÉA;2000\n") ==
          IngestErrorKind::MalformedRecord);
    CHECK(failure_kind(parse, "sexe;preusuel;annais\n") == IngestErrorKind::SchemaViolation);
}

TEST_CASE("programs: strict header, enums, times and unique ids") {
    auto parse = [](std::istream& in) { return parse_programs(in); };
    const std::string ok_row =
        "p1,ch,tv,public,news,2023-05-01T18:00:00Z,2023-05-01T19:00:00Z,m1,1000,3601000\n";
    std::istringstream in(kProgramsHeader + ok_row);
    const auto programs = parse_programs(in);
    REQUIRE(programs.size() == 1);
    CHECK(programs.at("p1").media_span == TimeInterval{1000, 3'601'000});

    CHECK(failure_kind(parse, kProgramsHeader + ok_row + ok_row) ==
          IngestErrorKind::DuplicateProgramId);
    CHECK(failure_kind(parse, std::string(kProgramsHeader) +
                                  "p1,ch,cable,public,news,2023-05-01T18:00:00Z,"
                                  "2023-05-01T19:00:00Z,m1,0,3600000\n") ==
          IngestErrorKind::InvalidEnum);
    CHECK(failure_kind(parse, std::string(kProgramsHeader) +
                                  "p1,ch,tv,public,news,2023-05-01T19:00:00Z,"
                                  "2023-05-01T18:00:00Z,m1,0,3600000\n") ==
          IngestErrorKind::NonMonotoneTimes);
    CHECK(failure_kind(parse, std::string(kProgramsHeader) +
                                  "p1,ch,tv,public,news,2023-05-01T18:00:00,"
                                  "2023-05-01T19:00:00Z,m1,0,3600000\n") ==
          IngestErrorKind::SchemaViolation);
    CHECK(failure_kind(parse, "program_id,channel\n") == IngestErrorKind::SchemaViolation);
}

TEST_CASE("JSON lines: exact keys, labels and non-overlapping segments") {
    auto segments = [](std::istream& in) { return parse_segments(in); };
    std::istringstream ok(
        R"({"media_id":"m","start_ms":10,"end_ms":20,"label":"female"})"
        "\n"
        R"({"media_id":"m","start_ms":0,"end_ms":10,"label":"music"})"
        "\n");
    const auto table = parse_segments(ok);
    REQUIRE(table.at("m").size() == 2);
    CHECK(table.at("m")[0].label == SpeechLabel::Music);  // sorted by start
    CHECK(failure_kind(segments, R"({"media_id":"m","start_ms":0,"end_ms":20,"label":"female"})"
                                 "\n"
                                 R"({"media_id":"m","start_ms":10,"end_ms":30,"label":"male"})"
                                 "\n") == IngestErrorKind::OverlappingSegments);
    CHECK(failure_kind(segments, R"({"media_id":"m","start_ms":0,"end_ms":20,"label":"jingle"})"
                                 "\n") == IngestErrorKind::InvalidEnum);
    CHECK(failure_kind(segments, R"({"media_id":"m","start_ms":0,"end_ms":20})"
                                 "\n") == IngestErrorKind::SchemaViolation);
    CHECK(failure_kind(segments,
                       R"({"media_id":"m","start_ms":0,"end_ms":20,"label":"male","x":1})"
                       "\n") == IngestErrorKind::SchemaViolation);
    CHECK(failure_kind(segments, "{not json}\n") == IngestErrorKind::SchemaViolation);

    auto faces = [](std::istream& in) { return parse_faces(in); };
    CHECK(failure_kind(faces, R"({"media_id":"m","frame_ms":0,"height_ratio":0,"female_score":0.5})"
                              "\n") == IngestErrorKind::SchemaViolation);
    CHECK(failure_kind(faces, R"({"media_id":"m","frame_ms":0,"height_ratio":0.5,"female_score":1.5})"
                              "\n") == IngestErrorKind::SchemaViolation);
    auto utterances = [](std::istream& in) { return parse_utterances(in); };
    CHECK(failure_kind(utterances, R"({"media_id":"m","start_ms":0,"end_ms":20,"text":"  "})"
                                   "\n") == IngestErrorKind::SchemaViolation);
}

TEST_CASE("reports reject duplicate (program, role) pairs") {
    auto parse = [](std::istream& in) { return parse_reports(in); };
    CHECK(failure_kind(parse, "program_id,role,male_count,female_count\n"
                              "p,presenter,1,0\np,presenter,0,1\n") ==
          IngestErrorKind::DuplicateReport);
    CHECK(failure_kind(parse, "program_id,role,male_count,female_count\np,host,1,0\n") ==
          IngestErrorKind::InvalidEnum);
}

TEST_CASE("errors carry source and line") {
    std::istringstream in(std::string(kProgramsHeader) + "p1,ch,tv\n");
    try {
        parse_programs(in, "programs.csv");
        FAIL("expected failure");
    } catch (const IngestError& e) {
        CHECK(e.source() == "programs.csv");
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).rfind("programs.csv:2:", 0) == 0);
    }
}

TEST_CASE("serialize then parse is the identity on random bundles") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        const CorpusBundle b = testing::random_bundle(seed);
        CHECK(testing::reparse(b) == b);
    }
}

TEST_CASE("bundle files round-trip through a directory") {
    const CorpusBundle b = testing::random_bundle(99);
    const auto dir = temp_dir("roundtrip");
    save_bundle(b, dir);
    CHECK(load_bundle(BundlePaths::in_directory(dir)) == b);
    std::filesystem::remove(dir / "breaks.csv");
    CorpusBundle without_breaks = b;
    without_breaks.breaks.clear();
    CHECK(load_bundle(BundlePaths::in_directory(dir)) == without_breaks);
    std::filesystem::remove(dir / "segments.jsonl");
    try {
        load_bundle(BundlePaths::in_directory(dir));
        FAIL("expected failure");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::Io);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("validation flags dangling references and coverage gaps") {
    CorpusBundle b = testing::random_bundle(5);
    CHECK_NOTHROW(validate_bundle(b));
    CorpusBundle dangling = b;
    dangling.reports.push_back({"nope", Role::Other, 1, 1});
    CHECK_THROWS_AS(validate_bundle(dangling), IngestError);
    CorpusBundle orphan = b;
    orphan.segments["unknown_media"].push_back({"unknown_media", TimeInterval{0, 1}, SpeechLabel::Noise});
    CHECK_THROWS_AS(validate_bundle(orphan), IngestError);

    CorpusBundle sparse = b;
    const std::string media = sparse.programs.begin()->second.media_id;
    sparse.segments.erase(media);
    const auto report = validate_bundle(sparse);
    CHECK(std::any_of(report.warnings.begin(), report.warnings.end(),
                      [](const std::string& w) { return w.find("segment") != std::string::npos; }));
}

TEST_CASE("stop list ignores blank lines and canonicalizes names") {
    std::istringstream in("Rose\n\n  ange  \n");
    CHECK(parse_stop_list(in) == std::vector<std::string>{"Rose", "Ange"});
}

TEST_CASE("CSV fields with delimiters and quotes survive") {
    const std::vector<std::string> fields{"a,b", "say \"hi\"", "", "plain"};
    CHECK(csv::split(csv::join(fields, ','), ',') == fields);
}

}  // TEST_SUITE
