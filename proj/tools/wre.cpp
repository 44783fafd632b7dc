// Command-line front end: ingest-check, compute, stats, report and synth.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wre/align.hpp"
#include "wre/ingest.hpp"
#include "wre/metrics.hpp"
#include "wre/namex.hpp"
#include "wre/report.hpp"
#include "wre/stats.hpp"
#include "wre/synthgen.hpp"

namespace {

using wre::report::ExitCode;
using wre::report::RunConfig;

int code(ExitCode c) { return static_cast<int>(c); }

std::string describe(const std::string& key) {
    static const std::map<std::string, std::string> help = {
        {"input-dir", "Directory holding the bundle files"},
        {"names", "Name database (overrides input-dir)"},
        {"programs", "programs.csv (overrides input-dir)"},
        {"reports", "reports.csv (overrides input-dir)"},
        {"breaks", "breaks.csv (overrides input-dir; optional)"},
        {"segments", "segments.jsonl (overrides input-dir)"},
        {"utterances", "utterances.jsonl (overrides input-dir)"},
        {"faces", "faces.jsonl (overrides input-dir)"},
        {"timezone", "Europe/Paris, UTC or +HH:MM"},
        {"peak-tv", "TV peak window, HH:MM-HH:MM local"},
        {"peak-radio", "Radio peak window, HH:MM-HH:MM local"},
        {"conflict-cutoff", "Local time splitting before/after"},
        {"vad-min", "Minimum voice activity ratio (inclusive)"},
        {"male-below", "Female speech ratio below which a speaker is male"},
        {"female-above", "Female speech ratio above which a speaker is female"},
        {"face-min-height", "Minimum face height ratio (inclusive)"},
        {"face-score-threshold", "Female iff score is above this"},
        {"ad-mode", "exclude, only or raw"},
        {"group-by", "Groupings: dims joined by ',', groupings by ';'"},
        {"format", "delimited, structured or aligned-text"},
        {"stop-list", "File of names never counted"},
        {"min-population", "Rows required before running statistics"},
    };
    const auto it = help.find(key);
    return it == help.end() ? std::string() : it->second;
}

/// RunConfig keys exposed as kebab-case flags; a config file is applied first
/// and flags override it.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "key = value configuration file");
        const RunConfig defaults;
        for (const auto& key : RunConfig::keys())
            options[key] = app.add_option("--" + key, values[key], describe(key))
                               ->default_str(defaults.get(key));
    }

    RunConfig build() const {
        RunConfig config;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw wre::report::ConfigError(fmt::format("cannot open {}", config_file));
            wre::report::apply_config_file(config, in, config_file);
        }
        for (const auto& [key, option] : options)
            if (option->count() > 0) config.set(key, values.at(key));
        config.validate();
        return config;
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct LoadedBundle {
    wre::CorpusBundle bundle;
    std::vector<std::string> stop_list;
    wre::ValidationReport validation;
};

LoadedBundle load(const RunConfig& config) {
    LoadedBundle out;
    if (config.stop_list) {
        std::ifstream in(*config.stop_list, std::ios::binary);
        if (!in)
            throw wre::IngestError(wre::IngestErrorKind::Io, config.stop_list->string(), 0,
                                   "cannot open file");
        out.stop_list = wre::parse_stop_list(in);
    }
    out.bundle = wre::load_bundle(config.bundle_paths());
    out.validation = wre::validate_bundle(out.bundle);
    return out;
}

int run_ingest_check(const RunConfig& config) {
    const LoadedBundle b = load(config);
    const auto& v = b.validation;
    std::cout << fmt::format(
        "programs {}\nreports {}\nbreaks {}\nsegments {}\nutterances {}\nfaces {}\nnames {}\n",
        v.programs, v.reports, v.breaks, v.segments, v.utterances, v.faces, v.names);
    print_warnings(v.warnings);
    return code(ExitCode::Ok);
}

int run_compute(const RunConfig& config, const std::string& rows_out) {
    const LoadedBundle b = load(config);
    print_warnings(b.validation.warnings);
    const wre::namex::NameExtractor extractor(b.bundle.lexicon, b.stop_list);
    const auto names = wre::metrics::index_names(b.bundle, extractor);
    const auto options = config.aggregate_options();
    auto groupings = config.group_by;
    if (groupings.empty()) groupings.push_back({wre::metrics::Dimension::Medium});
    std::vector<wre::report::Table> tables;
    for (std::size_t i = 0; i < groupings.size(); ++i) {
        const auto& dims = groupings[i];
        const bool by_context = std::find(dims.begin(), dims.end(),
                                          wre::metrics::Dimension::AdContext) != dims.end();
        const auto programs = wre::metrics::per_program_metrics(b.bundle, names, options, by_context);
        tables.push_back(wre::report::table_groups(
            wre::metrics::merge_groups(programs, dims, options.merge), dims,
            fmt::format("groups{}", i + 1)));
    }
    if (!rows_out.empty()) {
        const auto contexts = wre::align::attach_utterances(b.bundle, extractor, config.ad_mode);
        const auto rows =
            wre::align::select_stats_population(b.bundle, contexts, config.population_options());
        std::ofstream out(rows_out, std::ios::binary);
        if (!out) throw wre::Error(fmt::format("cannot write {}", rows_out));
        wre::stats::write_rows(out, rows);
    }
    wre::report::render(std::cout, tables, config.format);
    return code(ExitCode::Ok);
}

int run_stats(const RunConfig& config, const std::string& rows_in) {
    std::vector<wre::align::AnalysisRow> rows;
    if (!rows_in.empty()) {
        std::ifstream in(rows_in, std::ios::binary);
        if (!in) throw wre::IngestError(wre::IngestErrorKind::Io, rows_in, 0, "cannot open file");
        rows = wre::stats::read_rows(in, rows_in);
    } else {
        const LoadedBundle b = load(config);
        print_warnings(b.validation.warnings);
        const wre::namex::NameExtractor extractor(b.bundle.lexicon, b.stop_list);
        const auto contexts = wre::align::attach_utterances(b.bundle, extractor, config.ad_mode);
        rows = wre::align::select_stats_population(b.bundle, contexts, config.population_options());
    }
    if (rows.size() < config.min_population) {
        std::cerr << fmt::format(
            "warning: statistics skipped: population of {} rows is below the minimum of {}\n",
            rows.size(), config.min_population);
        return code(ExitCode::PopulationTooSmall);
    }
    const std::vector<wre::report::Table> tables{
        wre::report::table_anova(wre::stats::effect_report(rows))};
    wre::report::render(std::cout, tables, config.format);
    return code(ExitCode::Ok);
}

int run_report(const RunConfig& config, const std::string& out_dir) {
    const auto result = wre::report::run_pipeline(config, out_dir);
    if (!result.error.empty()) {
        std::cerr << "error: " << result.error << '\n';
        return code(result.code);
    }
    print_warnings(result.warnings);
    wre::report::render(std::cout, result.tables, config.format);
    return code(result.code);
}

struct SynthFlags {
    std::string spec_file;
    std::string out_dir;
    std::string write_spec;
    std::optional<std::uint64_t> seed;
    std::size_t population = 0;
    std::string rows_out;
};

int run_synth(const SynthFlags& f) {
    wre::synth::SynthSpec spec = wre::synth::SynthSpec::defaults();
    if (!f.spec_file.empty()) {
        std::ifstream in(f.spec_file, std::ios::binary);
        if (!in) throw wre::synth::InvalidSpec(fmt::format("cannot open {}", f.spec_file));
        spec = wre::synth::read_spec(in);
    }
    if (f.seed) spec.seed = *f.seed;
    if (!f.write_spec.empty()) {
        std::ofstream out(f.write_spec, std::ios::binary);
        wre::synth::write_spec(out, spec);
    }
    if (!f.out_dir.empty()) wre::synth::write_generated(wre::synth::generate(spec), f.out_dir);
    if (f.population > 0) {
        wre::synth::PopulationSpec p;
        p.seed = spec.seed;
        p.rows = f.population;
        const auto rows = wre::synth::generate_population(p);
        if (f.rows_out.empty()) {
            wre::stats::write_rows(std::cout, rows);
        } else {
            std::ofstream out(f.rows_out, std::ios::binary);
            wre::stats::write_rows(out, rows);
        }
    }
    return code(ExitCode::Ok);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Women representation estimates from broadcast descriptor streams"};
    app.require_subcommand(1);

    ConfigFlags check_flags, compute_flags, stats_flags, report_flags;
    auto* check = app.add_subcommand("ingest-check", "Load and validate a bundle");
    check_flags.attach(*check);

    std::string rows_out;
    auto* compute = app.add_subcommand("compute", "Grouped metrics for --group-by groupings");
    compute_flags.attach(*compute);
    compute->add_option("--rows-out", rows_out, "Also write the analysis population rows");

    std::string rows_in;
    auto* stats = app.add_subcommand("stats", "One-way ANOVA per factor on the analysis population");
    stats_flags.attach(*stats);
    stats->add_option("--rows", rows_in, "Read rows from a file instead of a bundle");

    std::string out_dir;
    auto* report = app.add_subcommand("report", "Every table plus a run manifest");
    report_flags.attach(*report);
    report->add_option("--out-dir", out_dir, "Directory for report and run_manifest.json");

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic bundle or population");
    synth->add_option("--spec", synth_flags.spec_file, "JSON generator spec (default: built-in)");
    synth->add_option("--seed", synth_flags.seed, "Override the spec seed");
    synth->add_option("--out-dir", synth_flags.out_dir, "Write bundle files and manifest.json here");
    synth->add_option("--write-spec", synth_flags.write_spec, "Write the effective spec as JSON");
    synth->add_option("--population", synth_flags.population, "Rows of a synthetic stats population");
    synth->add_option("--rows-out", synth_flags.rows_out, "Population output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(ExitCode::UsageError);
    }

    try {
        if (*check) return run_ingest_check(check_flags.build());
        if (*compute) return run_compute(compute_flags.build(), rows_out);
        if (*stats) return run_stats(stats_flags.build(), rows_in);
        if (*report) return run_report(report_flags.build(), out_dir);
        if (*synth) return run_synth(synth_flags);
    } catch (const wre::report::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return code(ExitCode::UsageError);
    } catch (const wre::synth::InvalidSpec& e) {
        std::cerr << "error: " << e.what() << '\n';
        return code(ExitCode::UsageError);
    } catch (const wre::IngestError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return code(wre::report::exit_code_for(e));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return code(ExitCode::Failure);
    }
    return code(ExitCode::Failure);
}
