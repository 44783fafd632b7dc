#pragma once

// Run configuration, pipeline orchestration and table rendering.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wre/align.hpp"
#include "wre/ingest.hpp"
#include "wre/metrics.hpp"
#include "wre/stats.hpp"

namespace wre::report {

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class OutputFormat { Delimited, Structured, AlignedText };
std::string_view to_string(OutputFormat f);
std::optional<OutputFormat> parse_output_format(std::string_view s);

struct RunConfig {
    std::filesystem::path input_dir;  // default location of every input file
    std::map<std::string, std::filesystem::path> input_overrides;  // kind -> path
    std::string timezone = "Europe/Paris";
    std::string peak_tv = "18:00-23:00";
    std::string peak_radio = "06:00-09:00";
    std::string conflict_cutoff = "2023-10-07T00:00";  // local wall-clock time
    double vad_min = 0.5;
    double male_below = 0.2;
    double female_above = 0.8;
    double face_min_height = 0.10;
    double face_score_threshold = 0.5;
    metrics::AdMode ad_mode = metrics::AdMode::ExcludeBreaks;
    std::vector<std::vector<metrics::Dimension>> group_by;
    OutputFormat format = OutputFormat::AlignedText;
    std::optional<std::filesystem::path> stop_list;
    std::size_t min_population = 100;

    /// Every settable key, in the spelling used by files and flags.
    static const std::vector<std::string>& keys();
    /// Sets one key from its text form; throws ConfigError.
    void set(std::string_view key, std::string_view value);
    /// Text form of one key.
    std::string get(std::string_view key) const;
    /// Throws ConfigError when a value is out of range or malformed.
    void validate() const;

    BundlePaths bundle_paths() const;
    SlotRules slot_rules() const;
    UtcTime cutoff() const;
    align::PopulationOptions population_options() const;
    metrics::AggregateOptions aggregate_options() const;
};

/// Applies `key = value` lines; `#` starts a comment, blank lines are ignored.
void apply_config_file(RunConfig& config, std::istream& in, std::string_view source = "config");

// --- Tables ----------------------------------------------------------------------

struct Column {
    std::string name;
    bool is_value = true;
    int decimals = 1;
    bool show_sign = false;  // "+" on positive values

    friend bool operator==(const Column&, const Column&) = default;
};

/// A label, or a numeric value that may be undefined.
using Cell = std::variant<std::string, std::optional<double>>;

struct Table {
    std::string id;
    std::string title;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::string note;  // shown in place of, or below, the rows

    friend bool operator==(const Table&, const Table&) = default;
};

/// Rounds half away from zero and prints `decimals` digits; "-" when undefined.
std::string format_value(std::optional<double> v, int decimals = 1, bool show_sign = false);

/// Percentage of a metric, or nothing when absent or undefined.
std::optional<double> pct(const std::optional<MetricValue>& v);

/// TV programs against their commercial breaks; needs groups by (medium, ad_context).
Table table_ad_context(std::span<const metrics::GroupResult> groups);
/// Medium x audience slot; needs groups by (medium, audience).
Table table_audience(std::span<const metrics::GroupResult> groups);
/// Medium x channel status; needs groups by (medium, status).
Table table_status(std::span<const metrics::GroupResult> groups);
/// TV programs per category; needs groups by (medium, category).
Table table_category(std::span<const metrics::GroupResult> groups);
/// News after minus before the conflict cutoff per medium and status; needs
/// groups by (medium, status, category, conflict).
Table table_conflict(std::span<const metrics::GroupResult> groups);
/// Hit-weighted women's-name share of the analysis population per medium,
/// audience slot and speaker gender.
Table table_speaker(std::span<const align::AnalysisRow> rows);
/// Any grouping: one label column per dimension, then the four metrics.
Table table_groups(std::span<const metrics::GroupResult> groups,
                   std::span<const metrics::Dimension> dims, std::string id = "groups");
/// One row per factor with its one-way ANOVA.
Table table_anova(const stats::EffectReport& report);

void render(std::ostream& out, std::span<const Table> tables, OutputFormat format);
std::string render_text(std::span<const Table> tables);

/// Inverse of the delimited and structured renderings.
std::vector<Table> read_tables(std::istream& in, OutputFormat format);

// --- Pipeline ----------------------------------------------------------------

enum class ExitCode : int {
    Ok = 0,
    Failure = 1,
    ParseFailure = 2,
    ValidationFailure = 3,
    UsageError = 4,
    PopulationTooSmall = 5,
};

/// Parse-level ingest failures map to ParseFailure, structural ones to
/// ValidationFailure.
ExitCode exit_code_for(const IngestError& e);

struct InputDigest {
    std::string kind;
    std::filesystem::path path;
    std::uintmax_t bytes = 0;
    std::string sha256;  // lowercase hex
};

/// SHA-256 of every input file that exists, in BundlePaths order.
std::vector<InputDigest> digest_inputs(const RunConfig& config);
std::string sha256_hex(std::istream& in);

struct PipelineResult {
    ExitCode code = ExitCode::Ok;
    std::string error;  // set when the run failed before producing tables
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    std::vector<align::AnalysisRow> population;
};

/// Loads, validates and analyses the configured bundle. Inputs are fully read
/// before anything is written; on ingest failure no report file is produced.
/// Writes report.<ext> and run_manifest.json into `out_dir` when it is non-empty.
PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir = {});

/// The tables computed from an already loaded bundle.
PipelineResult analyse(const CorpusBundle& bundle, const RunConfig& config,
                       std::vector<std::string> stop_list = {});

std::string_view file_extension(OutputFormat f);

}  // namespace wre::report
