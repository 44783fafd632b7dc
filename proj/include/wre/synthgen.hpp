#pragma once

// Seeded synthetic corpora with planted women-representation rates, plus a
// manifest of the exact realized counts and durations they contain.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wre/align.hpp"
#include "wre/core.hpp"
#include "wre/ingest.hpp"

namespace wre::synth {

class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// splitmix64 with rejection-sampled integer ranges, so streams are identical
/// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform integer in [lo, hi].
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);
    /// Uniform real in [0, 1).
    double unit();
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * unit(); }
    bool chance(double p) { return unit() < p; }

private:
    std::uint64_t state_;
};

struct RegionTargets {
    double wsr = 35.0;
    double wfr = 38.0;
    double wqr = 32.0;
};

struct SpeakerTargets {
    double female = 36.9;
    double male = 28.2;
};

struct CellSpec {
    Medium medium = Medium::TV;
    ChannelStatus status = ChannelStatus::Public;
    ProgramCategory category = ProgramCategory::News;
    AudienceSlot audience = AudienceSlot::Low;
    std::optional<ConflictPeriod> period;  // empty: May and October alike
    int programs = 10;
    int persons_per_program = 5;
    double wpr = 40.0;
    RegionTargets program;
    std::optional<RegionTargets> breaks;           // defaults to `program`
    std::optional<SpeakerTargets> wqr_by_speaker;  // in-program names per speaker gender
};

struct ChannelSpec {
    std::string id;
    Medium medium = Medium::TV;
    ChannelStatus status = ChannelStatus::Public;
    double break_fraction = 0.0;  // share of each program spent in commercial breaks
};

struct SynthSpec {
    std::uint64_t seed = 1;
    std::vector<ChannelSpec> channels;
    std::vector<CellSpec> cells;
    double faces_per_minute = 6.0;
    int min_minutes = 20;
    int max_minutes = 50;

    /// A small corpus spanning every medium, status, category and slot.
    static SynthSpec defaults();
    void validate() const;
};

SynthSpec read_spec(std::istream& in);
void write_spec(std::ostream& out, const SynthSpec& spec);

struct RegionTruth {
    std::int64_t female_speech_ms = 0;
    std::int64_t male_speech_ms = 0;
    std::int64_t female_faces = 0;
    std::int64_t faces = 0;  // qualifying faces only
    std::int64_t name_hits = 0;
    double name_female_mass = 0.0;
};

struct NameTruth {
    std::int64_t hits = 0;
    double female_mass = 0.0;
};

struct CellTruth {
    Medium medium = Medium::TV;
    ChannelStatus status = ChannelStatus::Public;
    ProgramCategory category = ProgramCategory::News;
    AudienceSlot audience = AudienceSlot::Low;
    std::optional<ConflictPeriod> period;
    int programs = 0;
    RegionTruth in_program;
    RegionTruth in_breaks;
    std::int64_t persons_female = 0;
    std::int64_t persons_total = 0;
    NameTruth female_speaker;  // in-program utterances in the analysis population
    NameTruth male_speaker;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::vector<CellTruth> cells;
};

void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest read_manifest(std::istream& in);

struct Generated {
    CorpusBundle bundle;
    Manifest manifest;
};

/// The bundled test lexicon: a couple of hundred first names with fixed counts.
NameLexicon fixture_lexicon();

Generated generate(const SynthSpec& spec);
/// Writes the bundle files plus manifest.json into `dir`.
void write_generated(const Generated& g, const std::filesystem::path& dir);

// --- Analysis populations ----------------------------------------------------

struct PopulationSpec {
    std::uint64_t seed = 1;
    std::size_t rows = 10'000;
    int tv_channels = 26;
    int radio_channels = 15;
    double female_speaker_mean = 0.369;
    double male_speaker_mean = 0.282;
    /// Additive shift of the row mean per factor level, e.g. {category: {sport: -0.1}}.
    std::map<align::Factor, std::map<std::string, double>> shifts;
    double noise_halfwidth = 0.25;
    /// Draw y independently of every factor (null model).
    bool null_model = false;
};

/// Rows with planted group means; noise is paired antithetically within each
/// speaker gender, so speaker means are reproduced up to the planted shifts.
std::vector<align::AnalysisRow> generate_population(const PopulationSpec& spec);

}  // namespace wre::synth
