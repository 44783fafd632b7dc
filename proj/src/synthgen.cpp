#include "wre/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace wre::synth {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Random numbers

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = range == 0 ? 0 : (~std::uint64_t{0} / range) * range;
    std::uint64_t v = next();
    while (limit != 0 && v >= limit) v = next();
    return lo + static_cast<std::int64_t>(range == 0 ? v : v % range);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Fixture lexicon

namespace {

constexpr const char* kFemaleNames[] = {
    "Léa",       "Chloé",     "Zoé",       "Emma",     "Jade",      "Louise",    "Alice",
    "Lina",      "Rose",      "Anna",      "Julia",    "Inès",      "Ambre",     "Mila",
    "Juliette",  "Agathe",    "Clara",     "Margaux",  "Lucie",     "Nathalie",  "Isabelle",
    "Sylvie",    "Catherine", "Françoise", "Martine",  "Christine", "Monique",   "Valérie",
    "Sophie",    "Sandrine",  "Céline",    "Aurélie",  "Élodie",    "Hélène",    "Caroline",
    "Virginie",  "Émilie",    "Julie",     "Laura",    "Sarah",     "Manon",     "Anaïs",
    "Noémie",    "Gaëlle",    "Brigitte",  "Nicole",   "Jacqueline", "Anne",     "Sabine",
    "Patricia",  "Laurence",  "Corinne",   "Véronique", "Marine",   "Pauline",   "Charlotte",
    "Mathilde",  "Océane",    "Marion",    "Amandine", "Audrey",    "Claire",    "Elisabeth",
    "Ségolène",  "Ursula",    "Giorgia",   "Kamala",   "Rachida",   "Najat",     "Aya",
    "Olena",     "Marie-Claire", "Anne-Sophie", "Marie-Christine", "Agnès", "Delphine",
    "Florence",  "Karine",    "Stéphanie", "Estelle",
};

constexpr const char* kMaleNames[] = {
    "Vladimir",  "Gazi",      "Mustafa",   "Kemal",    "Emmanuel",  "Jean",      "Pierre",
    "Michel",    "Philippe",  "Alain",     "Nicolas",  "Christophe", "Patrick",  "Daniel",
    "Bernard",   "Éric",      "Laurent",   "Frédéric", "Stéphane",  "David",     "Olivier",
    "Julien",    "Thierry",   "Sébastien", "François", "Jérôme",    "Thomas",    "Vincent",
    "Bruno",     "Didier",    "Hugo",      "Lucas",    "Louis",     "Gabriel",   "Arthur",
    "Jules",     "Raphaël",   "Léo",       "Adam",     "Paul",      "Antoine",   "Benjamin",
    "Bachar",    "Benyamin",  "Joe",       "Donald",   "Volodymyr", "Olaf",      "Gérald",
    "Jordan",    "Kylian",    "Zinédine",  "Joël",     "Loïc",      "Jean-Pierre", "Jean-Luc",
    "Marc",      "Luc",       "Yves",      "Gilles",   "Xavier",    "Fabien",    "Mathieu",
    "Guillaume", "Romain",    "Hervé",     "Rémi",     "Édouard",   "Georges",   "Henri",
    "Jacques",   "René",      "Roger",     "Serge",    "Tony",      "Wagner",    "Yannick",
    "Arnaud",    "Benoît",    "Cédric",
};

struct MixedName {
    const char* name;
    std::int64_t male;
    std::int64_t female;
};

constexpr MixedName kMixedNames[] = {
    {"Claude", 412'247, 56'215},   {"Marie", 4'500, 2'245'500}, {"Dominique", 240'000, 210'000},
    {"Camille", 40'000, 260'000},  {"Sacha", 30'000, 12'000},   {"Alix", 4'000, 9'000},
    {"Charlie", 15'000, 14'000},   {"Eden", 9'000, 11'000},     {"Andréa", 4'000, 30'000},
    {"Maël", 28'000, 1'200},       {"Noa", 7'000, 5'000},       {"Ange", 6'000, 2'500},
    {"Lou", 900, 14'000},          {"Morgan", 9'000, 4'000},    {"Yaël", 1'500, 4'000},
    {"Maxime", 150'000, 900},      {"Jean-Marie", 98'000, 400}, {"Frédérique", 700, 61'000},
};

struct NamePools {
    std::vector<std::string> female;  // attribution exactly 1
    std::vector<std::string> male;    // attribution exactly 0
    std::vector<std::pair<std::string, double>> mixed;
    std::vector<std::string> all;
};

NamePools name_pools(const NameLexicon& lexicon) {
    NamePools pools;
    for (const auto& [name, rec] : lexicon.records()) {
        pools.all.push_back(name);
        if (rec.female_count == rec.total_count)
            pools.female.push_back(name);
        else if (rec.female_count == 0)
            pools.male.push_back(name);
        else
            pools.mixed.emplace_back(name, rec.female_prob());
    }
    return pools;
}

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

std::string ascii_upper(std::string s) {
    for (char& c : s)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
    return s;
}

std::string ascii_lower(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    return s;
}

}  // namespace

NameLexicon fixture_lexicon() {
    NameLexicon lexicon;
    std::int64_t i = 0;
    for (const char* name : kFemaleNames) lexicon.add(name, 0, 5'000 + 1'733 * i++);
    i = 0;
    for (const char* name : kMaleNames) lexicon.add(name, 6'000 + 1'511 * i++, 0);
    for (const auto& m : kMixedNames) lexicon.add(m.name, m.male, m.female);
    return lexicon;
}

// ---------------------------------------------------------------------------
// Spec

SynthSpec SynthSpec::defaults() {
    SynthSpec spec;
    spec.seed = 2023;
    spec.channels = {
        {"tv_public_1", Medium::TV, ChannelStatus::Public, 0.033},
        {"tv_public_2", Medium::TV, ChannelStatus::Public, 0.0},
        {"tv_private_1", Medium::TV, ChannelStatus::Private, 0.115},
        {"tv_private_2", Medium::TV, ChannelStatus::Private, 0.09},
        {"radio_public_1", Medium::Radio, ChannelStatus::Public, 0.0},
        {"radio_public_2", Medium::Radio, ChannelStatus::Public, 0.0},
        {"radio_private_1", Medium::Radio, ChannelStatus::Private, 0.0},
    };
    // Per-category base rates, shifted by status and audience slot.
    struct Base {
        ProgramCategory category;
        double wpr, wsr, wqr, wfr;
    };
    const Base bases[] = {{ProgramCategory::Entertainment, 44.0, 36.0, 43.1, 46.7},
                          {ProgramCategory::News, 42.6, 37.1, 30.4, 33.1},
                          {ProgramCategory::MagazineDocumentary, 46.7, 38.3, 39.1, 45.0},
                          {ProgramCategory::Sport, 21.5, 11.4, 10.9, 12.0}};
    for (Medium medium : {Medium::TV, Medium::Radio})
        for (ChannelStatus status : {ChannelStatus::Public, ChannelStatus::Private})
            for (const auto& b : bases)
                for (AudienceSlot slot : {AudienceSlot::High, AudienceSlot::Low}) {
                    const double offset = (status == ChannelStatus::Public ? 2.0 : -2.0) +
                                          (slot == AudienceSlot::High ? -1.0 : 1.0);
                    CellSpec c;
                    c.medium = medium;
                    c.status = status;
                    c.category = b.category;
                    c.audience = slot;
                    c.programs = 4;
                    c.wpr = b.wpr + offset;
                    c.program = {b.wsr + offset, b.wfr + offset, b.wqr + offset};
                    c.breaks = RegionTargets{43.3, 47.9, 36.2};
                    spec.cells.push_back(c);
                }
    return spec;
}

void SynthSpec::validate() const {
    auto pct_ok = [](double v) { return v >= 0.0 && v <= 100.0; };
    if (min_minutes < 2 || max_minutes < min_minutes || max_minutes > 120)
        throw InvalidSpec("program duration bounds must satisfy 2 <= min <= max <= 120 minutes");
    if (!(faces_per_minute >= 0.0 && faces_per_minute <= 60.0))
        throw InvalidSpec("faces_per_minute must lie in [0, 60]");
    for (const auto& ch : channels) {
        if (ch.id.empty()) throw InvalidSpec("channel id must not be empty");
        if (!(ch.break_fraction >= 0.0 && ch.break_fraction < 0.5))
            throw InvalidSpec(fmt::format("channel '{}': break_fraction must lie in [0, 0.5)", ch.id));
        if (ch.medium == Medium::Radio && ch.break_fraction > 0.0)
            throw InvalidSpec(fmt::format("channel '{}': radio channels carry no break data", ch.id));
    }
    for (const auto& c : cells) {
        if (c.programs < 0) throw InvalidSpec("program counts must be >= 0");
        if (c.persons_per_program < 1) throw InvalidSpec("persons_per_program must be >= 1");
        const RegionTargets b = c.breaks.value_or(c.program);
        for (double v : {c.wpr, c.program.wsr, c.program.wfr, c.program.wqr, b.wsr, b.wfr, b.wqr})
            if (!pct_ok(v)) throw InvalidSpec("targets must lie in [0, 100]");
        if (c.wqr_by_speaker &&
            (!pct_ok(c.wqr_by_speaker->female) || !pct_ok(c.wqr_by_speaker->male)))
            throw InvalidSpec("speaker targets must lie in [0, 100]");
        const bool has_channel = std::any_of(channels.begin(), channels.end(), [&](const auto& ch) {
            return ch.medium == c.medium && ch.status == c.status;
        });
        if (c.programs > 0 && !has_channel)
            throw InvalidSpec(fmt::format("no {} {} channel for a cell with programs",
                                          to_string(c.status), to_string(c.medium)));
    }
}

namespace {

template <typename E>
E enum_field(const json& j, const char* key) {
    const auto token = j.at(key).get<std::string>();
    if (auto v = parse_enum<E>(token)) return *v;
    throw InvalidSpec(fmt::format("unknown {} '{}'", key, token));
}

json targets_json(const RegionTargets& t) { return {{"wsr", t.wsr}, {"wfr", t.wfr}, {"wqr", t.wqr}}; }

RegionTargets targets_from(const json& j) {
    return {j.at("wsr").get<double>(), j.at("wfr").get<double>(), j.at("wqr").get<double>()};
}

}  // namespace

SynthSpec read_spec(std::istream& in) {
    SynthSpec spec;
    try {
        const json j = json::parse(in);
        spec.seed = j.value("seed", spec.seed);
        spec.faces_per_minute = j.value("faces_per_minute", spec.faces_per_minute);
        spec.min_minutes = j.value("min_minutes", spec.min_minutes);
        spec.max_minutes = j.value("max_minutes", spec.max_minutes);
        for (const auto& c : j.at("channels")) {
            ChannelSpec ch;
            ch.id = c.at("id").get<std::string>();
            ch.medium = enum_field<Medium>(c, "medium");
            ch.status = enum_field<ChannelStatus>(c, "status");
            ch.break_fraction = c.value("break_fraction", 0.0);
            spec.channels.push_back(ch);
        }
        for (const auto& c : j.at("cells")) {
            CellSpec cell;
            cell.medium = enum_field<Medium>(c, "medium");
            cell.status = enum_field<ChannelStatus>(c, "status");
            cell.category = enum_field<ProgramCategory>(c, "category");
            cell.audience = enum_field<AudienceSlot>(c, "audience");
            if (c.contains("period")) cell.period = enum_field<ConflictPeriod>(c, "period");
            cell.programs = c.at("programs").get<int>();
            cell.persons_per_program = c.value("persons_per_program", cell.persons_per_program);
            cell.wpr = c.at("wpr").get<double>();
            cell.program = targets_from(c.at("program"));
            if (c.contains("breaks")) cell.breaks = targets_from(c.at("breaks"));
            if (c.contains("wqr_by_speaker"))
                cell.wqr_by_speaker = SpeakerTargets{c["wqr_by_speaker"].at("female").get<double>(),
                                                     c["wqr_by_speaker"].at("male").get<double>()};
            spec.cells.push_back(cell);
        }
    } catch (const json::exception& e) {
        throw InvalidSpec(fmt::format("malformed synth spec: {}", e.what()));
    }
    spec.validate();
    return spec;
}

void write_spec(std::ostream& out, const SynthSpec& spec) {
    json j;
    j["seed"] = spec.seed;
    j["faces_per_minute"] = spec.faces_per_minute;
    j["min_minutes"] = spec.min_minutes;
    j["max_minutes"] = spec.max_minutes;
    j["channels"] = json::array();
    for (const auto& ch : spec.channels)
        j["channels"].push_back({{"id", ch.id},
                                 {"medium", to_string(ch.medium)},
                                 {"status", to_string(ch.status)},
                                 {"break_fraction", ch.break_fraction}});
    j["cells"] = json::array();
    for (const auto& c : spec.cells) {
        json cell{{"medium", to_string(c.medium)},
                  {"status", to_string(c.status)},
                  {"category", to_string(c.category)},
                  {"audience", to_string(c.audience)}};
        if (c.period) cell["period"] = to_string(*c.period);
        cell["programs"] = c.programs;
        cell["persons_per_program"] = c.persons_per_program;
        cell["wpr"] = c.wpr;
        cell["program"] = targets_json(c.program);
        if (c.breaks) cell["breaks"] = targets_json(*c.breaks);
        if (c.wqr_by_speaker)
            cell["wqr_by_speaker"] = {{"female", c.wqr_by_speaker->female},
                                      {"male", c.wqr_by_speaker->male}};
        j["cells"].push_back(cell);
    }
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

json region_json(const RegionTruth& r) {
    return {{"female_speech_ms", r.female_speech_ms}, {"male_speech_ms", r.male_speech_ms},
            {"female_faces", r.female_faces},         {"faces", r.faces},
            {"name_hits", r.name_hits},               {"name_female_mass", r.name_female_mass}};
}

RegionTruth region_from(const json& j) {
    RegionTruth r;
    r.female_speech_ms = j.at("female_speech_ms").get<std::int64_t>();
    r.male_speech_ms = j.at("male_speech_ms").get<std::int64_t>();
    r.female_faces = j.at("female_faces").get<std::int64_t>();
    r.faces = j.at("faces").get<std::int64_t>();
    r.name_hits = j.at("name_hits").get<std::int64_t>();
    r.name_female_mass = j.at("name_female_mass").get<double>();
    return r;
}

json names_json(const NameTruth& n) { return {{"hits", n.hits}, {"female_mass", n.female_mass}}; }

NameTruth names_from(const json& j) {
    return {j.at("hits").get<std::int64_t>(), j.at("female_mass").get<double>()};
}

}  // namespace

void write_manifest(std::ostream& out, const Manifest& manifest) {
    json j;
    j["seed"] = manifest.seed;
    j["cells"] = json::array();
    for (const auto& c : manifest.cells) {
        json cell{{"medium", to_string(c.medium)},
                  {"status", to_string(c.status)},
                  {"category", to_string(c.category)},
                  {"audience", to_string(c.audience)}};
        if (c.period) cell["period"] = to_string(*c.period);
        cell["programs"] = c.programs;
        cell["in_program"] = region_json(c.in_program);
        cell["in_breaks"] = region_json(c.in_breaks);
        cell["persons_female"] = c.persons_female;
        cell["persons_total"] = c.persons_total;
        cell["female_speaker"] = names_json(c.female_speaker);
        cell["male_speaker"] = names_json(c.male_speaker);
        j["cells"].push_back(cell);
    }
    out << j.dump(2) << '\n';
}

Manifest read_manifest(std::istream& in) {
    Manifest m;
    try {
        const json j = json::parse(in);
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& c : j.at("cells")) {
            CellTruth t;
            t.medium = enum_field<Medium>(c, "medium");
            t.status = enum_field<ChannelStatus>(c, "status");
            t.category = enum_field<ProgramCategory>(c, "category");
            t.audience = enum_field<AudienceSlot>(c, "audience");
            if (c.contains("period")) t.period = enum_field<ConflictPeriod>(c, "period");
            t.programs = c.at("programs").get<int>();
            t.in_program = region_from(c.at("in_program"));
            t.in_breaks = region_from(c.at("in_breaks"));
            t.persons_female = c.at("persons_female").get<std::int64_t>();
            t.persons_total = c.at("persons_total").get<std::int64_t>();
            t.female_speaker = names_from(c.at("female_speaker"));
            t.male_speaker = names_from(c.at("male_speaker"));
            m.cells.push_back(t);
        }
    } catch (const json::exception& e) {
        throw InvalidSpec(fmt::format("malformed manifest: {}", e.what()));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

/// Integer error diffusion: after every call the cumulative female count is
/// the rounded share of the cumulative weight.
class CountQuota {
public:
    explicit CountQuota(double share) : share_(share) {}
    std::int64_t take(std::int64_t weight) {
        cumulative_weight_ += weight;
        const auto want = static_cast<std::int64_t>(
            std::llround(share_ * static_cast<double>(cumulative_weight_)));
        const std::int64_t female = std::clamp<std::int64_t>(want - cumulative_female_, 0, weight);
        cumulative_female_ += female;
        return female;
    }

private:
    double share_;
    std::int64_t cumulative_weight_ = 0;
    std::int64_t cumulative_female_ = 0;
};

/// Error diffusion over attribution probabilities: keeps the cumulative
/// female mass within half a name of the target.
class NameQuota {
public:
    explicit NameQuota(double share) : share_(share) {}

    /// Picks the probability class of the next counted name: a mixed name with
    /// probability `mixed_prob` when that keeps the running error bounded,
    /// otherwise a pure female (1) or pure male (0) name.
    double next(std::optional<double> mixed_prob) {
        target_ += share_;
        const double deficit = target_ - mass_;
        double p;
        if (mixed_prob && std::fabs(deficit - *mixed_prob) <= 0.5)
            p = *mixed_prob;
        else
            p = deficit >= 0.5 ? 1.0 : 0.0;
        mass_ += p;
        return p;
    }

private:
    double share_;
    double target_ = 0.0;
    double mass_ = 0.0;
};

enum class Region { Program, Break, Outside };

struct Layout {
    TimeInterval span;
    Region region;
};

struct Stream {
    std::size_t cell;
    Region region;
    int kind;     // 0 speech, 1 faces, 2 names, 3 persons
    int speaker;  // names only: 0 shared, 1 female speaker, 2 male speaker

    friend auto operator<=>(const Stream&, const Stream&) = default;
};

constexpr const char* kOpenings[] = {"Bonjour", "Alors", "Oui", "Ce matin", "Selon nos informations",
                                     "Eh bien", "Aujourd'hui", "Voilà"};
constexpr const char* kConnectors[] = {"avec", "et", "selon", "pour", "chez", "merci", "comme",
                                       "face à", "puis", "aussi"};
constexpr const char* kClosings[] = {"ce soir", "à Paris", "dans le studio", "en direct",
                                     "sur le terrain", "depuis Lyon", "cette semaine"};
constexpr const char* kHallucinations[] = {"Sous-titrage Société Radio-Canada",
                                           "Sous-titres par Marie Dupont",
                                           "« Sous-titrage ST' 501 »",
                                           "SOUS-TITRES PAR LA COMMUNAUTÉ D'AMARA.ORG"};

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&items)[N]) {
    return items[static_cast<std::size_t>(rng.uniform(0, N - 1))];
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(items.size()) - 1))];
}

class Generator {
public:
    Generator(const SynthSpec& spec)
        : spec_(spec), rng_(spec.seed), lexicon_(fixture_lexicon()), pools_(name_pools(lexicon_)) {}

    Generated run() {
        Generated g;
        g.bundle.lexicon = lexicon_;
        g.manifest.seed = spec_.seed;
        std::map<std::pair<Medium, ChannelStatus>, std::size_t> round_robin;
        int program_number = 0;
        for (std::size_t c = 0; c < spec_.cells.size(); ++c) {
            const CellSpec& cell = spec_.cells[c];
            CellTruth truth;
            truth.medium = cell.medium;
            truth.status = cell.status;
            truth.category = cell.category;
            truth.audience = cell.audience;
            truth.period = cell.period;
            truth.programs = cell.programs;
            std::vector<const ChannelSpec*> channels;
            for (const auto& ch : spec_.channels)
                if (ch.medium == cell.medium && ch.status == cell.status) channels.push_back(&ch);
            for (int i = 0; i < cell.programs; ++i) {
                auto& rr = round_robin[{cell.medium, cell.status}];
                const ChannelSpec& channel = *channels[rr++ % channels.size()];
                make_program(g.bundle, c, cell, channel, ++program_number, truth);
            }
            g.manifest.cells.push_back(truth);
        }
        return g;
    }

private:
    CountQuota& count_quota(Stream s, double pct) {
        return count_quotas_.try_emplace(s, pct / 100.0).first->second;
    }
    NameQuota& name_quota(Stream s, double pct) {
        return name_quotas_.try_emplace(s, pct / 100.0).first->second;
    }

    LocalTime pick_start(const CellSpec& cell, int minutes) {
        // Candidate days: May and October 2023, restricted by conflict period.
        std::vector<std::pair<unsigned, unsigned>> days;
        for (unsigned d = 1; d <= 31; ++d) {
            if (!cell.period || *cell.period == ConflictPeriod::Before) days.emplace_back(5, d);
        }
        for (unsigned d = 1; d <= 31; ++d) {
            const bool after = d >= 7;
            if (!cell.period || (*cell.period == ConflictPeriod::After) == after)
                days.emplace_back(10, d);
        }
        const auto [month, day] = pick(rng_, days);
        int window_lo, window_hi;  // minutes after midnight, program must fit inside
        if (cell.audience == AudienceSlot::High) {
            const PeakWindow& w = cell.medium == Medium::TV ? SlotRules{}.tv : SlotRules{}.radio;
            window_lo = w.start_minute;
            window_hi = w.end_minute;
        } else if (cell.medium == Medium::TV) {
            window_lo = 7 * 60;
            window_hi = 17 * 60 + 30;
        } else {
            window_lo = 10 * 60;
            window_hi = 17 * 60;
        }
        const auto start_minute = static_cast<int>(rng_.uniform(window_lo, window_hi - minutes));
        return local_from_civil(2023, month, day, start_minute / 60, start_minute % 60);
    }

    void make_program(CorpusBundle& bundle, std::size_t cell_index, const CellSpec& cell,
                      const ChannelSpec& channel, int number, CellTruth& truth) {
        const int minutes = static_cast<int>(rng_.uniform(spec_.min_minutes, spec_.max_minutes));
        const Millis duration = minutes * 60'000LL;
        const Millis lead = rng_.uniform(0, 120) * 1000;
        const Millis tail = 60'000;

        Program p;
        p.program_id = fmt::format("p{:05}", number);
        p.channel_id = channel.id;
        p.medium = cell.medium;
        p.status = cell.status;
        p.category = cell.category;
        p.start_utc = TimeZone::europe_paris().to_utc(pick_start(cell, minutes));
        p.end_utc = UtcTime{p.start_utc.ms + duration};
        p.media_id = fmt::format("m{:05}", number);
        p.media_span = TimeInterval{lead, lead + duration};

        // Commercial breaks, whole seconds, strictly inside the program.
        std::vector<TimeInterval> breaks;
        const Millis break_total =
            std::llround(channel.break_fraction * static_cast<double>(duration) / 1000.0) * 1000;
        if (break_total >= 2000) {
            const int count = break_total >= 120'000 ? 2 : 1;
            for (int k = 0; k < count; ++k) {
                const Millis len = k + 1 < count ? (break_total / count / 1000) * 1000
                                                 : break_total - (count - 1) * ((break_total / count / 1000) * 1000);
                const Millis centre = lead + duration * (k + 1) / (count + 1);
                const Millis start = ((centre - len / 2) / 1000) * 1000;
                breaks.emplace_back(start, start + len);
            }
            bundle.breaks[p.media_id] = breaks;
        }

        std::vector<Layout> layout;
        if (lead > 0) layout.push_back({TimeInterval{0, lead}, Region::Outside});
        Millis cursor = lead;
        for (const auto& b : breaks) {
            layout.push_back({TimeInterval{cursor, b.start_ms()}, Region::Program});
            layout.push_back({b, Region::Break});
            cursor = b.end_ms();
        }
        layout.push_back({TimeInterval{cursor, lead + duration}, Region::Program});
        layout.push_back({TimeInterval{lead + duration, lead + duration + tail}, Region::Outside});

        auto& segments = bundle.segments[p.media_id];
        auto& utterances = bundle.utterances[p.media_id];
        for (const auto& part : layout) {
            RegionTruth* region_truth = part.region == Region::Program ? &truth.in_program
                                        : part.region == Region::Break ? &truth.in_breaks
                                                                       : nullptr;
            const RegionTargets targets =
                part.region == Region::Break ? cell.breaks.value_or(cell.program) : cell.program;
            const auto first_segment = segments.size();
            lay_segments(p.media_id, part, cell_index, targets, segments, region_truth);
            const std::span<const SpeechSegment> fresh(segments.data() + first_segment,
                                                       segments.size() - first_segment);
            lay_utterances(p.media_id, part, cell_index, cell, targets, fresh, utterances,
                           region_truth, truth);
            if (cell.medium == Medium::TV)
                lay_faces(p.media_id, part, cell_index, targets, bundle.faces[p.media_id],
                          region_truth);
        }

        make_reports(bundle, p.program_id, cell_index, cell, truth);
        bundle.programs.emplace(p.program_id, std::move(p));
    }

    void lay_segments(const std::string& media, const Layout& part, std::size_t cell,
                      const RegionTargets& targets, std::vector<SpeechSegment>& out,
                      RegionTruth* truth) {
        enum class Kind { Speech, Music, Noise, Gap };
        struct Chunk {
            TimeInterval span;
            Kind kind;
        };
        std::vector<Chunk> chunks;
        Millis t = part.span.start_ms();
        while (t < part.span.end_ms()) {
            Millis len = rng_.uniform(4'000, 25'000);
            if (part.span.end_ms() - (t + len) < 2'000) len = part.span.end_ms() - t;
            const double r = rng_.unit();
            const Kind kind = r < 0.08 ? Kind::Music : r < 0.12 ? Kind::Noise : r < 0.16 ? Kind::Gap
                                                                                       : Kind::Speech;
            chunks.push_back({TimeInterval{t, t + len}, kind});
            t += len;
        }

        Millis gendered = 0;
        for (const auto& c : chunks)
            if (c.kind == Kind::Speech) gendered += c.span.duration();
        Millis female_left = 0;
        if (truth != nullptr) {
            const Region region = part.region;
            female_left = count_quota({cell, region, 0, 0}, targets.wsr).take(gendered);
            truth->female_speech_ms += female_left;
            truth->male_speech_ms += gendered - female_left;
        } else {
            female_left = static_cast<Millis>(static_cast<double>(gendered) * 0.5);
        }

        // Hand out female time over the speech chunks in random order; at most
        // one chunk is split into a female and a male piece.
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < chunks.size(); ++i)
            if (chunks[i].kind == Kind::Speech) order.push_back(i);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng_.uniform(0, static_cast<std::int64_t>(i) - 1))]);
        std::vector<std::vector<SpeechSegment>> pieces(chunks.size());
        for (std::size_t idx : order) {
            const TimeInterval& span = chunks[idx].span;
            if (span.duration() <= female_left) {
                pieces[idx].push_back({media, span, SpeechLabel::FemaleSpeech});
                female_left -= span.duration();
            } else if (female_left > 0) {
                const Millis cut = span.start_ms() + female_left;
                pieces[idx].push_back({media, TimeInterval{span.start_ms(), cut}, SpeechLabel::FemaleSpeech});
                pieces[idx].push_back({media, TimeInterval{cut, span.end_ms()}, SpeechLabel::MaleSpeech});
                female_left = 0;
            } else {
                pieces[idx].push_back({media, span, SpeechLabel::MaleSpeech});
            }
        }
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            switch (chunks[i].kind) {
                case Kind::Speech:
                    out.insert(out.end(), pieces[i].begin(), pieces[i].end());
                    break;
                case Kind::Music: out.push_back({media, chunks[i].span, SpeechLabel::Music}); break;
                case Kind::Noise: out.push_back({media, chunks[i].span, SpeechLabel::Noise}); break;
                case Kind::Gap: break;
            }
        }
    }

    /// Builds a transcript line whose counted first names are exactly `names`.
    std::string compose(const std::vector<std::string>& names) {
        std::string text = pick(rng_, kOpenings);
        for (const auto& name : names) {
            text += ' ';
            text += pick(rng_, kConnectors);
            text += ' ';
            text += name;
            if (rng_.chance(0.2)) {
                // A whitespace-separated run: only its first name counts.
                text += ' ';
                text += pick(rng_, pools_.all);
            }
            if (rng_.chance(0.4)) text += ',';
        }
        if (rng_.chance(0.3)) {
            // Names that must not count: an acronym and a common noun.
            std::string other = pick(rng_, pools_.all);
            if (is_ascii(other) && other.size() > 1)
                text += fmt::format(" et {} ou {}", ascii_upper(other), ascii_lower(other));
        }
        text += ' ';
        text += pick(rng_, kClosings);
        text += rng_.chance(0.2) ? " !" : ".";
        return text;
    }

    std::string draw_name(NameQuota& quota, double& mass) {
        std::optional<double> mixed;
        std::string mixed_name;
        if (rng_.chance(0.15) && !pools_.mixed.empty()) {
            const auto& m = pick(rng_, pools_.mixed);
            mixed = m.second;
            mixed_name = m.first;
        }
        const double p = quota.next(mixed);
        mass += p;
        if (mixed && p == *mixed) return mixed_name;
        return p == 1.0 ? pick(rng_, pools_.female) : pick(rng_, pools_.male);
    }

    void lay_utterances(const std::string& media, const Layout& part, std::size_t cell_index,
                        const CellSpec& cell, const RegionTargets& targets,
                        std::span<const SpeechSegment> segments, std::vector<Utterance>& out,
                        RegionTruth* truth, CellTruth& cell_truth) {
        for (const auto& seg : segments) {
            const Millis len_max = std::min<Millis>(8'000, seg.span.duration());
            if (len_max < 3'000 || seg.label == SpeechLabel::Noise) continue;
            const bool singing = seg.label == SpeechLabel::Music;
            if (!rng_.chance(singing ? 0.3 : 0.75)) continue;
            const Millis len = rng_.uniform(2'000, len_max);
            const Millis offset = rng_.uniform(0, seg.span.duration() - len);
            const TimeInterval span{seg.span.start_ms() + offset, seg.span.start_ms() + offset + len};

            if (truth != nullptr && part.region == Region::Program && !singing && rng_.chance(0.03)) {
                out.push_back({media, span, pick(rng_, kHallucinations)});
                continue;
            }

            const double r = rng_.unit();
            const int hits = r < 0.2 ? 0 : r < 0.65 ? 1 : r < 0.9 ? 2 : 3;
            std::vector<std::string> names;
            double mass = 0.0;
            if (truth == nullptr) {
                for (int h = 0; h < hits; ++h) names.push_back(pick(rng_, pools_.all));
            } else {
                int speaker = 0;
                double share = targets.wqr;
                if (part.region == Region::Program && cell.wqr_by_speaker && !singing) {
                    const bool female = seg.label == SpeechLabel::FemaleSpeech;
                    speaker = female ? 1 : 2;
                    share = female ? cell.wqr_by_speaker->female : cell.wqr_by_speaker->male;
                }
                NameQuota& quota = name_quota({cell_index, part.region, 2, speaker}, share);
                for (int h = 0; h < hits; ++h) names.push_back(draw_name(quota, mass));
                truth->name_hits += hits;
                truth->name_female_mass += mass;
                if (part.region == Region::Program && !singing && hits > 0) {
                    NameTruth& by_speaker = seg.label == SpeechLabel::FemaleSpeech
                                                ? cell_truth.female_speaker
                                                : cell_truth.male_speaker;
                    by_speaker.hits += hits;
                    by_speaker.female_mass += mass;
                }
            }
            out.push_back({media, span, compose(names)});
        }
    }

    void lay_faces(const std::string& media, const Layout& part, std::size_t cell,
                   const RegionTargets& targets, std::vector<FaceObservation>& out,
                   RegionTruth* truth) {
        const Millis duration = part.span.duration();
        const auto count = static_cast<std::int64_t>(
            std::llround(static_cast<double>(duration) / 60'000.0 * spec_.faces_per_minute));
        if (count == 0) return;
        const Millis step = duration / count;
        if (step == 0) return;
        std::vector<bool> tall(static_cast<std::size_t>(count));
        std::int64_t qualifying = 0;
        for (std::size_t i = 0; i < tall.size(); ++i) {
            tall[i] = rng_.chance(0.85);
            qualifying += tall[i] ? 1 : 0;
        }
        std::int64_t female_left = qualifying / 2;
        if (truth != nullptr) {
            female_left = count_quota({cell, part.region, 1, 0}, targets.wfr).take(qualifying);
            truth->female_faces += female_left;
            truth->faces += qualifying;
        }
        // Spread the female faces uniformly over the qualifying ones.
        std::int64_t seen = 0, assigned = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            FaceObservation f;
            f.media_id = media;
            f.frame_ms = part.span.start_ms() + i * step + rng_.uniform(0, step - 1);
            if (tall[static_cast<std::size_t>(i)]) {
                f.height_ratio = rng_.uniform_real(0.12, 0.8);
                ++seen;
                const auto want = qualifying == 0 ? 0 : (seen * female_left + qualifying - 1) / qualifying;
                const bool female = assigned < want;
                if (female) ++assigned;
                f.female_score = female ? rng_.uniform_real(0.55, 0.99) : rng_.uniform_real(0.01, 0.45);
            } else {
                f.height_ratio = rng_.uniform_real(0.02, 0.095);
                f.female_score = rng_.unit();
            }
            out.push_back(f);
        }
    }

    void make_reports(CorpusBundle& bundle, const std::string& program_id, std::size_t cell_index,
                      const CellSpec& cell, CellTruth& truth) {
        const std::int64_t persons = cell.persons_per_program;
        std::int64_t female = count_quota({cell_index, Region::Program, 3, 0}, cell.wpr).take(persons);
        truth.persons_female += female;
        truth.persons_total += persons;
        std::map<Role, std::pair<std::int64_t, std::int64_t>> by_role;  // (male, female)
        for (std::int64_t i = 0; i < persons; ++i) {
            const Role role = i == 0 ? Role::Presenter : static_cast<Role>(rng_.uniform(1, 4));
            const bool is_female = female > 0 && rng_.chance(static_cast<double>(female) /
                                                              static_cast<double>(persons - i));
            if (is_female || female == persons - i) {
                ++by_role[role].second;
                --female;
            } else {
                ++by_role[role].first;
            }
        }
        for (const auto& [role, counts] : by_role)
            bundle.reports.push_back({program_id, role, counts.first, counts.second});
    }

    const SynthSpec& spec_;
    Rng rng_;
    NameLexicon lexicon_;
    NamePools pools_;
    std::map<Stream, CountQuota> count_quotas_;
    std::map<Stream, NameQuota> name_quotas_;
};

}  // namespace

Generated generate(const SynthSpec& spec) {
    spec.validate();
    return Generator(spec).run();
}

void write_generated(const Generated& g, const std::filesystem::path& dir) {
    save_bundle(g.bundle, dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", (dir / "manifest.json").string()));
    write_manifest(out, g.manifest);
}

// ---------------------------------------------------------------------------
// Populations

std::vector<align::AnalysisRow> generate_population(const PopulationSpec& spec) {
    using align::Factor;
    if (spec.tv_channels < 1 || spec.radio_channels < 1)
        throw InvalidSpec("population needs at least one channel per medium");
    Rng rng(spec.seed);
    struct Channel {
        std::string id;
        Medium medium;
        ChannelStatus status;
    };
    std::vector<Channel> channels;
    for (int i = 0; i < spec.tv_channels; ++i)
        channels.push_back({fmt::format("tv_{:02}", i + 1), Medium::TV,
                            i % 3 == 0 ? ChannelStatus::Public : ChannelStatus::Private});
    for (int i = 0; i < spec.radio_channels; ++i)
        channels.push_back({fmt::format("radio_{:02}", i + 1), Medium::Radio,
                            i % 2 == 0 ? ChannelStatus::Public : ChannelStatus::Private});
    const ProgramCategory categories[] = {ProgramCategory::News, ProgramCategory::Entertainment,
                                          ProgramCategory::MagazineDocumentary,
                                          ProgramCategory::Sport};

    auto shift = [&](Factor f, const std::string& level) {
        const auto it = spec.shifts.find(f);
        if (it == spec.shifts.end()) return 0.0;
        const auto lit = it->second.find(level);
        return lit == it->second.end() ? 0.0 : lit->second;
    };

    std::vector<align::AnalysisRow> rows;
    rows.reserve(spec.rows);
    std::optional<double> pending_noise[2];  // antithetic partner per speaker gender
    const double null_mean = 0.5 * (spec.female_speaker_mean + spec.male_speaker_mean);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        const Channel& ch = pick(rng, channels);
        align::AnalysisRow row;
        const bool female = rng.chance(0.5);
        row.factors = {std::string(to_string(ch.medium)),
                       ch.id,
                       std::string(to_string(ch.status)),
                       std::string(to_string(categories[rng.uniform(0, 3)])),
                       std::string(to_string(rng.chance(0.5) ? AudienceSlot::High : AudienceSlot::Low)),
                       std::string(to_string(rng.chance(0.5) ? ConflictPeriod::Before
                                                             : ConflictPeriod::After)),
                       female ? "female" : "male"};
        double mean = null_mean;
        if (!spec.null_model) {
            mean = female ? spec.female_speaker_mean : spec.male_speaker_mean;
            for (Factor f : align::kAllFactors)
                if (f != Factor::SpeakerGender) mean += shift(f, row.factor(f));
        }
        auto& pending = pending_noise[female ? 0 : 1];
        double noise;
        if (pending) {
            noise = -*pending;
            pending.reset();
        } else {
            noise = rng.uniform_real(-spec.noise_halfwidth, spec.noise_halfwidth);
            pending = noise;
        }
        row.y = std::clamp(mean + noise, 0.0, 1.0);
        row.hits = 1;
        row.female_mass = row.y;
        row.program_id = fmt::format("q{:07}", i);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace wre::synth
