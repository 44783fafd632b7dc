#include "wre/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "wre/namex.hpp"
#include "wre/text.hpp"

namespace wre::report {

using json = nlohmann::ordered_json;
using metrics::Dimension;
using metrics::GroupKey;
using metrics::GroupResult;

std::string_view to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Delimited: return "delimited";
        case OutputFormat::Structured: return "structured";
        case OutputFormat::AlignedText: return "aligned-text";
    }
    return "?";
}

std::optional<OutputFormat> parse_output_format(std::string_view s) {
    for (auto f : {OutputFormat::Delimited, OutputFormat::Structured, OutputFormat::AlignedText})
        if (to_string(f) == s) return f;
    return std::nullopt;
}

std::string_view file_extension(OutputFormat f) {
    switch (f) {
        case OutputFormat::Delimited: return "csv";
        case OutputFormat::Structured: return "json";
        case OutputFormat::AlignedText: return "txt";
    }
    return "txt";
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

constexpr const char* kInputKinds[] = {"names",    "programs",   "reports", "breaks",
                                       "segments", "utterances", "faces"};

bool is_input_kind(std::string_view key) {
    return std::find(std::begin(kInputKinds), std::end(kInputKinds), key) != std::end(kInputKinds);
}

double parse_number(std::string_view key, std::string_view value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v))
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, value));
    return v;
}

std::vector<std::vector<Dimension>> parse_groupings(std::string_view value) {
    std::vector<std::vector<Dimension>> out;
    for (const auto& group : csv::split(value, ';')) {
        const std::string g(text::trim(group));
        if (g.empty()) continue;
        std::vector<Dimension> dims;
        for (const auto& name : csv::split(g, ',')) {
            const auto d = metrics::parse_dimension(text::trim(name));
            if (!d) throw ConfigError(fmt::format("group-by: unknown dimension '{}'", name));
            if (std::find(dims.begin(), dims.end(), *d) != dims.end())
                throw ConfigError(fmt::format("group-by: dimension '{}' repeated", name));
            dims.push_back(*d);
        }
        out.push_back(std::move(dims));
    }
    return out;
}

std::string format_groupings(const std::vector<std::vector<Dimension>>& groups) {
    std::vector<std::string> parts;
    for (const auto& dims : groups) {
        std::vector<std::string> names;
        for (Dimension d : dims) names.emplace_back(metrics::to_string(d));
        parts.push_back(fmt::format("{}", fmt::join(names, ",")));
    }
    return fmt::format("{}", fmt::join(parts, ";"));
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> keys = {
        "input-dir",      "names",           "programs",         "reports",
        "breaks",         "segments",        "utterances",       "faces",
        "timezone",       "peak-tv",         "peak-radio",       "conflict-cutoff",
        "vad-min",        "male-below",      "female-above",     "face-min-height",
        "face-score-threshold", "ad-mode",   "group-by",         "format",
        "stop-list",      "min-population"};
    return keys;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
    const std::string value(text::trim(raw));
    if (key == "input-dir") {
        input_dir = value;
    } else if (is_input_kind(key)) {
        input_overrides[std::string(key)] = value;
    } else if (key == "timezone") {
        timezone = value;
    } else if (key == "peak-tv") {
        peak_tv = value;
    } else if (key == "peak-radio") {
        peak_radio = value;
    } else if (key == "conflict-cutoff") {
        conflict_cutoff = value;
    } else if (key == "vad-min") {
        vad_min = parse_number(key, value);
    } else if (key == "male-below") {
        male_below = parse_number(key, value);
    } else if (key == "female-above") {
        female_above = parse_number(key, value);
    } else if (key == "face-min-height") {
        face_min_height = parse_number(key, value);
    } else if (key == "face-score-threshold") {
        face_score_threshold = parse_number(key, value);
    } else if (key == "ad-mode") {
        const auto m = metrics::parse_ad_mode(value);
        if (!m) throw ConfigError(fmt::format("ad-mode: expected exclude, only or raw, got '{}'", value));
        ad_mode = *m;
    } else if (key == "group-by") {
        group_by = parse_groupings(value);
    } else if (key == "format") {
        const auto f = parse_output_format(value);
        if (!f)
            throw ConfigError(fmt::format(
                "format: expected delimited, structured or aligned-text, got '{}'", value));
        format = *f;
    } else if (key == "stop-list") {
        if (value.empty())
            stop_list.reset();
        else
            stop_list = value;
    } else if (key == "min-population") {
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw ConfigError(fmt::format("min-population: expected a count, got '{}'", value));
        min_population = n;
    } else {
        throw ConfigError(fmt::format("unknown configuration key '{}'", key));
    }
}

std::string RunConfig::get(std::string_view key) const {
    if (key == "input-dir") return input_dir.string();
    if (is_input_kind(key)) {
        const auto it = input_overrides.find(std::string(key));
        return it == input_overrides.end() ? std::string() : it->second.string();
    }
    if (key == "timezone") return timezone;
    if (key == "peak-tv") return peak_tv;
    if (key == "peak-radio") return peak_radio;
    if (key == "conflict-cutoff") return conflict_cutoff;
    if (key == "vad-min") return fmt::format("{}", vad_min);
    if (key == "male-below") return fmt::format("{}", male_below);
    if (key == "female-above") return fmt::format("{}", female_above);
    if (key == "face-min-height") return fmt::format("{}", face_min_height);
    if (key == "face-score-threshold") return fmt::format("{}", face_score_threshold);
    if (key == "ad-mode") return std::string(metrics::to_string(ad_mode));
    if (key == "group-by") return format_groupings(group_by);
    if (key == "format") return std::string(to_string(format));
    if (key == "stop-list") return stop_list ? stop_list->string() : std::string();
    if (key == "min-population") return std::to_string(min_population);
    throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

void RunConfig::validate() const {
    const std::pair<const char*, double> unit_values[] = {
        {"vad-min", vad_min},
        {"male-below", male_below},
        {"female-above", female_above},
        {"face-min-height", face_min_height},
        {"face-score-threshold", face_score_threshold}};
    for (const auto& [key, v] : unit_values)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1], got {}", key, v));
    if (male_below > female_above)
        throw ConfigError("male-below must not exceed female-above");
    if (!TimeZone::parse(timezone))
        throw ConfigError(fmt::format("timezone: expected Europe/Paris, UTC or +HH:MM, got '{}'", timezone));
    for (const auto& [key, w] : {std::pair{"peak-tv", peak_tv}, std::pair{"peak-radio", peak_radio}})
        if (!parse_peak_window(w))
            throw ConfigError(fmt::format("{}: expected HH:MM-HH:MM with start before end, got '{}'", key, w));
    if (!parse_local(conflict_cutoff))
        throw ConfigError(
            fmt::format("conflict-cutoff: expected YYYY-MM-DDTHH:MM, got '{}'", conflict_cutoff));
}

BundlePaths RunConfig::bundle_paths() const {
    BundlePaths p = BundlePaths::in_directory(input_dir);
    std::filesystem::path* slots[] = {&p.names,    &p.programs,   &p.reports, &p.breaks,
                                      &p.segments, &p.utterances, &p.faces};
    for (std::size_t i = 0; i < std::size(kInputKinds); ++i)
        if (auto it = input_overrides.find(kInputKinds[i]); it != input_overrides.end())
            *slots[i] = it->second;
    return p;
}

SlotRules RunConfig::slot_rules() const {
    validate();
    return SlotRules{*TimeZone::parse(timezone), *parse_peak_window(peak_tv),
                     *parse_peak_window(peak_radio)};
}

UtcTime RunConfig::cutoff() const {
    validate();
    return TimeZone::parse(timezone)->to_utc(*parse_local(conflict_cutoff));
}

align::PopulationOptions RunConfig::population_options() const {
    align::PopulationOptions o;
    o.thresholds = {vad_min, male_below, female_above};
    o.slots = slot_rules();
    o.conflict_cutoff = cutoff();
    return o;
}

metrics::AggregateOptions RunConfig::aggregate_options() const {
    metrics::AggregateOptions o;
    o.mode = ad_mode;
    o.slots = slot_rules();
    o.conflict_cutoff = cutoff();
    o.faces = {face_min_height, face_score_threshold};
    return o;
}

void apply_config_file(RunConfig& config, std::istream& in, std::string_view source) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string trimmed(text::trim(line));
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, number));
        const std::string key(text::trim(std::string_view(trimmed).substr(0, eq)));
        try {
            config.set(key, std::string_view(trimmed).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", source, number, e.what()));
        }
    }
}

// ---------------------------------------------------------------------------
// Tables

std::string format_value(std::optional<double> v, int decimals, bool show_sign) {
    if (!v) return "-";
    const double scale = std::pow(10.0, decimals);
    double r = std::round(*v * scale) / scale;
    if (r == 0.0) r = 0.0;  // no "-0.0"
    std::string s = fmt::format("{:.{}f}", r, decimals);
    if (show_sign && r > 0.0) s.insert(s.begin(), '+');
    return s;
}

std::optional<double> pct(const std::optional<MetricValue>& v) {
    if (!v) return std::nullopt;
    return v->female_pct();
}

namespace {

Column label(std::string name) { return Column{std::move(name), false, 0, false}; }
Column value(std::string name, int decimals = 1, bool show_sign = false) {
    return Column{std::move(name), true, decimals, show_sign};
}

const GroupResult* find_group(std::span<const GroupResult> groups, const GroupKey& key) {
    for (const auto& g : groups)
        if (g.key == key) return &g;
    return nullptr;
}

std::string medium_label(Medium m) { return m == Medium::TV ? "TV" : "Radio"; }

std::string category_label(ProgramCategory c) {
    switch (c) {
        case ProgramCategory::Entertainment: return "Entertainment";
        case ProgramCategory::News: return "News";
        case ProgramCategory::MagazineDocumentary: return "Magazine/Documentary";
        case ProgramCategory::Sport: return "Sport";
    }
    return "?";
}

/// Manual, speech, name and face percentages of a group (all undefined when missing).
std::array<std::optional<double>, 4> four(const GroupResult* g) {
    if (g == nullptr) return {};
    return {pct(g->wpr), pct(g->wsr), pct(g->wqr), pct(g->wfr)};
}

std::vector<Column> four_columns(std::vector<Column> head) {
    for (const char* name : {"Manual", "Speech", "Name", "Face"}) head.push_back(value(name));
    return head;
}

void append(std::vector<Cell>& row, const std::array<std::optional<double>, 4>& values) {
    row.insert(row.end(), values.begin(), values.end());
}

constexpr Medium kMedia[] = {Medium::Radio, Medium::TV};

}  // namespace

Table table_ad_context(std::span<const GroupResult> groups) {
    Table t{"table1", "Women (%) inside TV programs and in commercial breaks",
            {label("Descriptor"), value("TV program"), value("Advertisements")}, {}, {}};
    GroupKey in_program{.medium = Medium::TV, .ad_context = metrics::AdContext::InProgram};
    GroupKey in_break{.medium = Medium::TV, .ad_context = metrics::AdContext::InBreak};
    const GroupResult* p = find_group(groups, in_program);
    const GroupResult* b = find_group(groups, in_break);
    auto get = [](const GroupResult* g, std::optional<MetricValue> GroupResult::*field) {
        return g == nullptr ? std::nullopt : pct(g->*field);
    };
    t.rows.push_back({std::string("Speech %"), get(p, &GroupResult::wsr), get(b, &GroupResult::wsr)});
    t.rows.push_back({std::string("Face %"), get(p, &GroupResult::wfr), get(b, &GroupResult::wfr)});
    t.rows.push_back(
        {std::string("First Names %"), get(p, &GroupResult::wqr), get(b, &GroupResult::wqr)});
    return t;
}

Table table_audience(std::span<const GroupResult> groups) {
    Table t{"table2", "Women (%) by medium and audience slot",
            four_columns({label("Media"), label("Audience")}), {}, {}};
    for (Medium m : kMedia)
        for (AudienceSlot a : {AudienceSlot::Low, AudienceSlot::High}) {
            std::vector<Cell> row{medium_label(m), std::string(to_string(a))};
            append(row, four(find_group(groups, GroupKey{.medium = m, .audience = a})));
            t.rows.push_back(std::move(row));
        }
    return t;
}

Table table_status(std::span<const GroupResult> groups) {
    Table t{"table3", "Women (%) by medium and channel status",
            four_columns({label("Media"), label("chan. status")}), {}, {}};
    for (Medium m : kMedia)
        for (ChannelStatus s : {ChannelStatus::Private, ChannelStatus::Public}) {
            std::vector<Cell> row{medium_label(m), std::string(to_string(s))};
            append(row, four(find_group(groups, GroupKey{.medium = m, .status = s})));
            t.rows.push_back(std::move(row));
        }
    return t;
}

Table table_category(std::span<const GroupResult> groups) {
    Table t{"table4", "Women (%) in TV programs by category", four_columns({label("Program type")}),
            {}, {}};
    for (ProgramCategory c : {ProgramCategory::Entertainment, ProgramCategory::News,
                              ProgramCategory::MagazineDocumentary, ProgramCategory::Sport}) {
        std::vector<Cell> row{category_label(c)};
        append(row, four(find_group(groups, GroupKey{.medium = Medium::TV, .category = c})));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table table_conflict(std::span<const GroupResult> groups) {
    Table t{"table5", "Change in women (%) in news after the conflict cutoff (after - before)",
            {label("Media"), label("chan. status"), value("Manual", 1, true), value("Speech", 1, true),
             value("Name", 1, true), value("Face", 1, true)},
            {},
            {}};
    for (Medium m : kMedia)
        for (ChannelStatus s : {ChannelStatus::Private, ChannelStatus::Public}) {
            GroupKey key{.medium = m, .status = s, .category = ProgramCategory::News};
            key.conflict = ConflictPeriod::Before;
            const auto before = four(find_group(groups, key));
            key.conflict = ConflictPeriod::After;
            const auto after = four(find_group(groups, key));
            std::vector<Cell> row{medium_label(m), std::string(to_string(s))};
            for (std::size_t i = 0; i < 4; ++i)
                row.emplace_back(before[i] && after[i] ? std::optional(*after[i] - *before[i])
                                                       : std::nullopt);
            t.rows.push_back(std::move(row));
        }
    return t;
}

Table table_speaker(std::span<const align::AnalysisRow> rows) {
    using align::Factor;
    Table t{"table6", "Women's first names (%) by speaker gender, medium and audience slot",
            {label("Media"), label("Audience"), value("female speaker"), value("male speaker")},
            {},
            {}};
    std::map<std::array<std::string, 3>, std::pair<double, double>> sums;  // (mass, hits)
    for (const auto& r : rows) {
        auto& s = sums[{r.factor(Factor::Medium), r.factor(Factor::Audience),
                        r.factor(Factor::SpeakerGender)}];
        s.first += r.female_mass;
        s.second += static_cast<double>(r.hits);
    }
    for (Medium m : kMedia)
        for (AudienceSlot a : {AudienceSlot::Low, AudienceSlot::High}) {
            std::vector<Cell> row{medium_label(m), std::string(to_string(a))};
            for (const char* speaker : {"female", "male"}) {
                const auto it = sums.find(
                    {std::string(to_string(m)), std::string(to_string(a)), std::string(speaker)});
                if (it == sums.end() || it->second.second <= 0.0)
                    row.emplace_back(std::optional<double>{});
                else
                    row.emplace_back(std::optional(100.0 * it->second.first / it->second.second));
            }
            t.rows.push_back(std::move(row));
        }
    return t;
}

Table table_groups(std::span<const GroupResult> groups, std::span<const Dimension> dims,
                   std::string id) {
    std::vector<Column> head;
    for (Dimension d : dims) head.push_back(label(std::string(metrics::to_string(d))));
    if (dims.empty()) head.push_back(label("group"));
    Table t{std::move(id), fmt::format("Women (%) grouped by {}", dims.empty() ? "nothing" : ""),
            four_columns(std::move(head)), {}, {}};
    std::vector<std::string> names;
    for (Dimension d : dims) names.emplace_back(metrics::to_string(d));
    if (!dims.empty()) t.title = fmt::format("Women (%) grouped by {}", fmt::join(names, ", "));
    for (const auto& g : groups) {
        std::vector<Cell> row;
        const GroupKey& k = g.key;
        for (Dimension d : dims) {
            switch (d) {
                case Dimension::Medium: row.emplace_back(std::string(to_string(*k.medium))); break;
                case Dimension::Status: row.emplace_back(std::string(to_string(*k.status))); break;
                case Dimension::Category: row.emplace_back(std::string(to_string(*k.category))); break;
                case Dimension::Audience: row.emplace_back(std::string(to_string(*k.audience))); break;
                case Dimension::Conflict: row.emplace_back(std::string(to_string(*k.conflict))); break;
                case Dimension::Channel: row.emplace_back(*k.channel); break;
                case Dimension::AdContext:
                    row.emplace_back(std::string(metrics::to_string(*k.ad_context)));
                    break;
            }
        }
        if (dims.empty()) row.emplace_back(std::string("all"));
        append(row, four(&g));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table table_anova(const stats::EffectReport& report) {
    Table t{"anova",
            "One-way ANOVA of the per-utterance women's-name share",
            {label("factor"), value("levels", 0), value("df effect", 0), value("df residual", 0),
             value("F", 3), value("p", 4), value("eta2", 4), label("effect"), label("significant")},
            {},
            {}};
    std::vector<std::string> notes{fmt::format("n = {}", report.n)};
    for (const auto& f : report.factors) {
        std::vector<Cell> row{std::string(align::to_string(f.factor))};
        if (f.anova) {
            const auto& a = *f.anova;
            row.emplace_back(std::optional(static_cast<double>(a.levels.size())));
            row.emplace_back(std::optional(a.df_effect));
            row.emplace_back(std::optional(a.df_residual));
            row.emplace_back(std::optional(a.f_stat));
            row.emplace_back(std::optional(a.p_value));
            row.emplace_back(std::optional(a.eta_squared));
            row.emplace_back(std::string(stats::to_string(f.tier)));
            row.emplace_back(std::string(f.significant ? "yes" : "no"));
        } else {
            for (int i = 0; i < 6; ++i) row.emplace_back(std::optional<double>{});
            row.emplace_back(std::string("-"));
            row.emplace_back(std::string("-"));
            notes.push_back(fmt::format("{} skipped: {}", align::to_string(f.factor), f.skipped));
        }
        t.rows.push_back(std::move(row));
    }
    if (report.joint) {
        notes.push_back(fmt::format("joint fit: {} columns, R2 = {:.4f}", report.joint->columns.size(),
                                    report.joint->r_squared));
        if (!report.joint->aliased.empty())
            notes.push_back(fmt::format("aliased: {}", fmt::join(report.joint->aliased, " ")));
    }
    t.note = fmt::format("{}", fmt::join(notes, "; "));
    return t;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::string cell_text(const Cell& c, const Column& col) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return format_value(std::get<std::optional<double>>(c), col.decimals, col.show_sign);
}

std::string exact_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    const auto& v = std::get<std::optional<double>>(c);
    return v ? fmt::format("{:.17g}", *v) : std::string();
}

void render_table_text(std::ostream& out, const Table& t) {
    out << t.title << '\n';
    std::vector<std::size_t> width(t.columns.size());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = display_width(t.columns[i].name);
    for (const auto& row : t.rows) {
        std::vector<std::string> line;
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            line.push_back(i < row.size() ? cell_text(row[i], t.columns[i]) : std::string());
            width[i] = std::max(width[i], display_width(line.back()));
        }
        cells.push_back(std::move(line));
    }
    auto emit = [&](const std::vector<std::string>& line) {
        std::string s;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i > 0) s += "  ";
            const std::string pad(width[i] - display_width(line[i]), ' ');
            s += t.columns[i].is_value ? pad + line[i] : line[i] + pad;
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        out << s << '\n';
    };
    if (!t.columns.empty()) {
        std::vector<std::string> head;
        for (const auto& c : t.columns) head.push_back(c.name);
        emit(head);
        for (const auto& line : cells) emit(line);
    }
    if (!t.note.empty()) out << "note: " << t.note << '\n';
}

void render_delimited(std::ostream& out, const Table& t) {
    out << csv::join({"table", t.id, t.title, t.note}, ';') << '\n';
    for (const auto& c : t.columns) {
        if (c.is_value)
            out << csv::join({"column", c.name, "value", std::to_string(c.decimals),
                              c.show_sign ? "signed" : "plain"},
                             ';')
                << '\n';
        else
            out << csv::join({"column", c.name, "label"}, ';') << '\n';
    }
    for (const auto& row : t.rows) {
        std::vector<std::string> fields{"row"};
        for (const auto& c : row) fields.push_back(exact_text(c));
        out << csv::join(fields, ';') << '\n';
    }
    out << "end\n";
}

json table_json(const Table& t) {
    json j{{"id", t.id}, {"title", t.title}, {"note", t.note}, {"columns", json::array()},
           {"rows", json::array()}};
    for (const auto& c : t.columns)
        j["columns"].push_back({{"name", c.name},
                                {"kind", c.is_value ? "value" : "label"},
                                {"decimals", c.decimals},
                                {"show_sign", c.show_sign}});
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& c : row) {
            if (const auto* s = std::get_if<std::string>(&c))
                r.push_back(*s);
            else if (const auto& v = std::get<std::optional<double>>(c))
                r.push_back(*v);
            else
                r.push_back(nullptr);
        }
        j["rows"].push_back(std::move(r));
    }
    return j;
}

class TableFormatError : public Error {
public:
    TableFormatError(std::size_t line, const std::string& detail)
        : Error(fmt::format("report:{}: {}", line, detail)) {}
};

std::optional<double> parse_exact(const std::string& s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw TableFormatError(line, fmt::format("bad number '{}'", s));
    return v;
}

std::vector<Table> read_delimited(std::istream& in) {
    std::vector<Table> tables;
    std::optional<Table> current;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        const auto f = csv::split(line, ';');
        const std::string& tag = f.front();
        if (tag == "table") {
            if (current || f.size() != 4) throw TableFormatError(number, "unexpected table line");
            current = Table{f[1], f[2], {}, {}, f[3]};
        } else if (!current) {
            throw TableFormatError(number, "content outside a table");
        } else if (tag == "column") {
            if (f.size() == 3 && f[2] == "label") {
                current->columns.push_back(label(f[1]));
            } else if (f.size() == 5 && f[2] == "value") {
                current->columns.push_back(value(f[1], std::stoi(f[3]), f[4] == "signed"));
            } else {
                throw TableFormatError(number, "bad column line");
            }
        } else if (tag == "row") {
            if (f.size() != current->columns.size() + 1)
                throw TableFormatError(number, "row width differs from the columns");
            std::vector<Cell> row;
            for (std::size_t i = 0; i < current->columns.size(); ++i) {
                if (current->columns[i].is_value)
                    row.emplace_back(parse_exact(f[i + 1], number));
                else
                    row.emplace_back(f[i + 1]);
            }
            current->rows.push_back(std::move(row));
        } else if (tag == "end") {
            tables.push_back(std::move(*current));
            current.reset();
        } else {
            throw TableFormatError(number, fmt::format("unknown line tag '{}'", tag));
        }
    }
    if (current) throw TableFormatError(number, "unterminated table");
    return tables;
}

std::vector<Table> read_structured(std::istream& in) {
    std::vector<Table> tables;
    try {
        const json j = json::parse(in);
        for (const auto& jt : j.at("tables")) {
            Table t{jt.at("id"), jt.at("title"), {}, {}, jt.at("note")};
            for (const auto& c : jt.at("columns"))
                t.columns.push_back({c.at("name"), c.at("kind") == "value", c.at("decimals"),
                                     c.at("show_sign")});
            for (const auto& jr : jt.at("rows")) {
                std::vector<Cell> row;
                for (const auto& c : jr) {
                    if (c.is_string())
                        row.emplace_back(c.get<std::string>());
                    else if (c.is_null())
                        row.emplace_back(std::optional<double>{});
                    else
                        row.emplace_back(std::optional(c.get<double>()));
                }
                t.rows.push_back(std::move(row));
            }
            tables.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw Error(fmt::format("malformed structured report: {}", e.what()));
    }
    return tables;
}

}  // namespace

void render(std::ostream& out, std::span<const Table> tables, OutputFormat format) {
    switch (format) {
        case OutputFormat::AlignedText:
            for (std::size_t i = 0; i < tables.size(); ++i) {
                if (i > 0) out << '\n';
                render_table_text(out, tables[i]);
            }
            break;
        case OutputFormat::Delimited:
            for (const auto& t : tables) render_delimited(out, t);
            break;
        case OutputFormat::Structured: {
            json j{{"tables", json::array()}};
            for (const auto& t : tables) j["tables"].push_back(table_json(t));
            out << j.dump(2) << '\n';
            break;
        }
    }
}

std::string render_text(std::span<const Table> tables) {
    std::ostringstream out;
    render(out, tables, OutputFormat::AlignedText);
    return out.str();
}

std::vector<Table> read_tables(std::istream& in, OutputFormat format) {
    switch (format) {
        case OutputFormat::Delimited: return read_delimited(in);
        case OutputFormat::Structured: return read_structured(in);
        case OutputFormat::AlignedText: break;
    }
    throw Error("aligned-text reports cannot be read back");
}

// ---------------------------------------------------------------------------
// Pipeline

ExitCode exit_code_for(const IngestError& e) {
    switch (e.kind()) {
        case IngestErrorKind::Io:
        case IngestErrorKind::MalformedRecord:
        case IngestErrorKind::SchemaViolation:
        case IngestErrorKind::InvalidEnum: return ExitCode::ParseFailure;
        default: return ExitCode::ValidationFailure;
    }
}

std::string sha256_hex(std::istream& in) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 unavailable");
    char buffer[1 << 16];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0)
        EVP_DigestUpdate(ctx.get(), buffer, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &length);
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::vector<InputDigest> digest_inputs(const RunConfig& config) {
    const BundlePaths p = config.bundle_paths();
    std::vector<std::pair<std::string, std::filesystem::path>> files = {
        {"names", p.names},       {"programs", p.programs},     {"reports", p.reports},
        {"breaks", p.breaks},     {"segments", p.segments},     {"utterances", p.utterances},
        {"faces", p.faces}};
    if (config.stop_list) files.emplace_back("stop-list", *config.stop_list);
    std::vector<InputDigest> out;
    for (const auto& [kind, path] : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        InputDigest d{kind, path, std::filesystem::file_size(path), sha256_hex(in)};
        out.push_back(std::move(d));
    }
    return out;
}

PipelineResult analyse(const CorpusBundle& bundle, const RunConfig& config,
                       std::vector<std::string> stop_list) {
    PipelineResult result;
    const namex::NameExtractor extractor(bundle.lexicon, std::move(stop_list));
    const metrics::NameIndex names = metrics::index_names(bundle, extractor);
    const metrics::AggregateOptions options = config.aggregate_options();

    const auto split = metrics::per_program_metrics(bundle, names, options, true);
    const auto plain = metrics::per_program_metrics(bundle, names, options, false);
    auto groups = [&](std::initializer_list<Dimension> dims) {
        const std::vector<Dimension> d(dims);
        return metrics::merge_groups(plain, d, options.merge);
    };
    const std::vector<Dimension> ad_dims{Dimension::Medium, Dimension::AdContext};
    result.tables.push_back(table_ad_context(metrics::merge_groups(split, ad_dims, options.merge)));
    result.tables.push_back(table_audience(groups({Dimension::Medium, Dimension::Audience})));
    result.tables.push_back(table_status(groups({Dimension::Medium, Dimension::Status})));
    result.tables.push_back(table_category(groups({Dimension::Medium, Dimension::Category})));
    result.tables.push_back(table_conflict(groups(
        {Dimension::Medium, Dimension::Status, Dimension::Category, Dimension::Conflict})));

    const auto contexts = align::attach_utterances(bundle, extractor, config.ad_mode);
    result.population =
        align::select_stats_population(bundle, contexts, config.population_options());
    result.tables.push_back(table_speaker(result.population));

    if (result.population.size() < config.min_population) {
        const std::string warning =
            fmt::format("statistics skipped: population of {} rows is below the minimum of {}",
                        result.population.size(), config.min_population);
        result.warnings.push_back(warning);
        result.tables.push_back(Table{"anova", "One-way ANOVA of the per-utterance women's-name share",
                                      {}, {}, warning});
        result.code = ExitCode::PopulationTooSmall;
    } else {
        result.tables.push_back(table_anova(stats::effect_report(result.population)));
    }

    for (std::size_t i = 0; i < config.group_by.size(); ++i) {
        const auto& dims = config.group_by[i];
        const bool by_context =
            std::find(dims.begin(), dims.end(), Dimension::AdContext) != dims.end();
        result.tables.push_back(table_groups(
            metrics::merge_groups(by_context ? split : plain, dims, options.merge), dims,
            fmt::format("groups{}", i + 1)));
    }
    return result;
}

PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir) {
    PipelineResult failed;
    try {
        config.validate();
    } catch (const ConfigError& e) {
        failed.code = ExitCode::UsageError;
        failed.error = e.what();
        return failed;
    }

    CorpusBundle bundle;
    std::vector<std::string> stop_list;
    ValidationReport validation;
    try {
        if (config.stop_list) {
            std::ifstream in(*config.stop_list, std::ios::binary);
            if (!in)
                throw IngestError(IngestErrorKind::Io, config.stop_list->string(), 0, "cannot open file");
            stop_list = parse_stop_list(in);
        }
        bundle = load_bundle(config.bundle_paths());
        validation = validate_bundle(bundle);
    } catch (const IngestError& e) {
        failed.code = exit_code_for(e);
        failed.error = e.what();
        return failed;
    }

    PipelineResult result = analyse(bundle, config, std::move(stop_list));
    result.warnings.insert(result.warnings.begin(), validation.warnings.begin(),
                           validation.warnings.end());
    if (out_dir.empty()) return result;

    std::filesystem::create_directories(out_dir);
    const auto report_path = out_dir / fmt::format("report.{}", file_extension(config.format));
    {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw Error(fmt::format("cannot write {}", report_path.string()));
        render(out, result.tables, config.format);
    }

    json manifest;
    manifest["config"] = json::object();
    for (const auto& key : RunConfig::keys()) manifest["config"][key] = config.get(key);
    manifest["inputs"] = json::array();
    for (const auto& d : digest_inputs(config))
        manifest["inputs"].push_back(
            {{"kind", d.kind}, {"path", d.path.string()}, {"bytes", d.bytes}, {"sha256", d.sha256}});
    double hits = 0.0;
    for (const auto& r : result.population) hits += static_cast<double>(r.hits);
    manifest["counts"] = {{"programs", validation.programs},
                          {"reports", validation.reports},
                          {"breaks", validation.breaks},
                          {"segments", validation.segments},
                          {"utterances", validation.utterances},
                          {"faces", validation.faces},
                          {"names", validation.names},
                          {"population_rows", result.population.size()},
                          {"population_hits", hits}};
    manifest["report"] = report_path.filename().string();
    manifest["exit_code"] = static_cast<int>(result.code);
    manifest["warnings"] = result.warnings;
    std::ofstream out(out_dir / "run_manifest.json", std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", (out_dir / "run_manifest.json").string()));
    out << manifest.dump(2) << '\n';
    return result;
}

}  // namespace wre::report
