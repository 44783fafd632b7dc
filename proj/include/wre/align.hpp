#pragma once

// Fuses transcribed utterances with speaker-gender segments and selects the
// utterance population used for effect modelling.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wre/core.hpp"
#include "wre/ingest.hpp"
#include "wre/metrics.hpp"
#include "wre/namex.hpp"

namespace wre::align {

class AlignError : public Error {
public:
    using Error::Error;
};

struct UtteranceAlignment {
    Millis male_ms = 0;
    Millis female_ms = 0;
    Millis music_ms = 0;
    Millis noise_ms = 0;
    Millis unlabeled_ms = 0;

    Millis span_ms() const { return male_ms + female_ms + music_ms + noise_ms + unlabeled_ms; }
    double vad_ratio() const;
    /// female / (female + male); empty when no gendered speech overlaps.
    std::optional<double> female_speech_ratio() const;

    friend bool operator==(const UtteranceAlignment&, const UtteranceAlignment&) = default;
};

/// Overlap of the utterance with each segment label. Segments must be sorted
/// and belong to the utterance's media file.
UtteranceAlignment align_utterance(const Utterance& u, std::span<const SpeechSegment> segments);

enum class SpeakerGenderClass { MostlyMale, MostlyFemale, Ambiguous };
std::string_view to_string(SpeakerGenderClass c);

struct PopulationThresholds {
    double min_vad_ratio = 0.50;     // inclusive
    double male_below = 0.20;        // strict
    double female_above = 0.80;      // strict
};

/// Throws AlignError when the female speech ratio is undefined.
SpeakerGenderClass classify_speaker_gender(const UtteranceAlignment& a,
                                           const PopulationThresholds& t = {});

/// Categorical factors carried by each analysis row, in export order.
enum class Factor { Medium, Channel, Status, Category, Audience, Conflict, SpeakerGender };
inline constexpr std::array<Factor, 7> kAllFactors{Factor::Medium,   Factor::Channel,
                                                   Factor::Status,   Factor::Category,
                                                   Factor::Audience, Factor::Conflict,
                                                   Factor::SpeakerGender};
std::string_view to_string(Factor f);
std::optional<Factor> parse_factor(std::string_view name);

struct AnalysisRow {
    double y = 0.0;  // mean female attribution probability of the utterance's names
    std::array<std::string, 7> factors;
    // Name counts behind `y`, used for hit-weighted group summaries.
    std::size_t hits = 0;
    double female_mass = 0.0;
    // Provenance, used for deterministic ordering.
    std::string program_id;
    Millis start_ms = 0;

    const std::string& factor(Factor f) const { return factors[static_cast<std::size_t>(f)]; }
};

/// An utterance attached to the program whose effective spans hold its midpoint.
struct UtteranceContext {
    const Program* program = nullptr;
    const Utterance* utterance = nullptr;
    namex::UtteranceNameStats names;
};

struct PopulationOptions {
    PopulationThresholds thresholds;
    SlotRules slots;
    UtcTime conflict_cutoff = default_conflict_cutoff();
};

/// Attaches every non-hallucinated utterance to the program holding its
/// midpoint (after break handling) and extracts its first names. Output is
/// ordered by (program_id, utterance start).
std::vector<UtteranceContext> attach_utterances(const CorpusBundle& bundle,
                                                const namex::NameExtractor& extractor,
                                                metrics::AdMode mode);

/// Keeps utterances with at least one name, enough voice activity and a
/// non-ambiguous speaker gender.
std::vector<AnalysisRow> select_stats_population(const CorpusBundle& bundle,
                                                 std::span<const UtteranceContext> contexts,
                                                 const PopulationOptions& options = {});

}  // namespace wre::align
