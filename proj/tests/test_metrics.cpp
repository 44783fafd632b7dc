#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "builders.hpp"
#include "random_bundle.hpp"
#include "wre/metrics.hpp"

using namespace wre;
using namespace wre::testing;
using metrics::AdMode;

namespace {

constexpr auto F = SpeechLabel::FemaleSpeech;
constexpr auto M = SpeechLabel::MaleSpeech;

struct Totals {
    MetricValue wsr = MetricValue::undefined(MetricKind::WSR);
    MetricValue wqr = MetricValue::undefined(MetricKind::WQR);
    MetricValue wfr = MetricValue::undefined(MetricKind::WFR);
};

std::map<std::string, Totals> totals_by_program(const CorpusBundle& b, const metrics::NameIndex& names,
                                                AdMode mode) {
    metrics::AggregateOptions options;
    options.mode = mode;
    std::map<std::string, Totals> out;
    for (const auto& pm : metrics::per_program_metrics(b, names, options, false)) {
        auto& t = out[pm.program->program_id];
        t.wsr += *pm.wsr;
        t.wqr += *pm.wqr;
        if (pm.wfr) t.wfr += *pm.wfr;
    }
    return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("speech time is clipped to the spans and ignores non-speech") {
    const std::vector<SpeechSegment> segs{seg("m", 0, 10'000, F), seg("m", 10'000, 20'000, M),
                                          seg("m", 20'000, 30'000, SpeechLabel::Music)};
    const std::vector<TimeInterval> spans{{5'000, 12'000}, {18'000, 25'000}};
    const auto v = metrics::compute_wsr(segs, spans);
    CHECK(v.female_mass() == 5'000);
    CHECK(v.weight() == 9'000);
    CHECK_FALSE(metrics::compute_wsr(segs, std::vector<TimeInterval>{{20'000, 40'000}}).defined());
}

TEST_CASE("face counts apply the height floor and strict score threshold") {
    const std::vector<FaceObservation> faces{
        face("m", 0, 0.10, 0.51),      // counted, female
        face("m", 1'000, 0.0999, 0.9), // too small
        face("m", 2'000, 0.5, 0.5),    // counted, male at the threshold
        face("m", 3'000, 0.5, 0.9),    // outside the span
        face("m", 500, 0.5, 0.7),      // counted, female
    };
    const std::vector<TimeInterval> spans{{0, 3'000}};
    const auto v = metrics::compute_wfr(faces, spans);
    CHECK(v.female_mass() == 2);
    CHECK(v.weight() == 3);
    metrics::FaceRules loose;
    loose.min_height = 0.05;
    CHECK(metrics::compute_wfr(faces, spans, loose).weight() == 4);
}

TEST_CASE("names are located by utterance midpoint") {
    const std::vector<metrics::NamedUtterance> named{{999, 1, 1.0}, {1'000, 2, 0.5}, {1'999, 1, 0.12},
                                                     {2'000, 3, 3.0}};
    const auto v = metrics::compute_wqr(named, std::vector<TimeInterval>{{1'000, 2'000}});
    CHECK(v.weight() == 3);
    CHECK(v.female_mass() == doctest::Approx(0.62));
}

TEST_CASE("manual counts pool across roles") {
    const std::vector<ChannelReport> reports{{"p", Role::Presenter, 2, 1}, {"p", Role::Expert, 1, 0}};
    const auto v = metrics::compute_wpr(reports);
    CHECK(v.female_mass() == 1);
    CHECK(v.weight() == 4);
    CHECK(*v.female_pct() == doctest::Approx(25.0));
}

TEST_CASE("excluding and isolating breaks partitions the raw measure") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        CAPTURE(seed);
        const CorpusBundle b = random_bundle(seed);
        const namex::NameExtractor extractor(b.lexicon);
        const auto names = metrics::index_names(b, extractor);
        const auto raw = totals_by_program(b, names, AdMode::Raw);
        const auto excl = totals_by_program(b, names, AdMode::ExcludeBreaks);
        const auto only = totals_by_program(b, names, AdMode::OnlyBreaks);
        for (const auto& [id, r] : raw) {
            Totals sum;
            for (const auto* part : {&excl, &only}) {
                if (auto it = part->find(id); it != part->end()) {
                    sum.wsr += it->second.wsr;
                    sum.wqr += it->second.wqr;
                    sum.wfr += it->second.wfr;
                }
            }
            CHECK(sum.wsr == r.wsr);
            CHECK(sum.wfr == r.wfr);
            CHECK(sum.wqr.weight() == r.wqr.weight());
            CHECK(sum.wqr.female_mass() == doctest::Approx(r.wqr.female_mass()).epsilon(1e-9));
        }
    }
}

TEST_CASE("group keys describe themselves") {
    metrics::GroupKey key;
    CHECK(metrics::describe(key) == "all");
    key.medium = Medium::TV;
    key.audience = AudienceSlot::High;
    CHECK(metrics::describe(key) == "medium=tv,audience=high");
    for (auto d : {metrics::Dimension::Medium, metrics::Dimension::AdContext})
        CHECK(metrics::parse_dimension(metrics::to_string(d)) == d);
    CHECK(metrics::parse_ad_mode("only") == AdMode::OnlyBreaks);
    CHECK_FALSE(metrics::parse_ad_mode("ads"));
}

TEST_CASE("weighted merge pools durations; program mean counts programs once") {
    CorpusBundle b;
    b.programs.emplace("a", make_program("a", "ma", Medium::Radio, "2023-05-10T12:00", 10'000));
    b.programs.emplace("b", make_program("b", "mb", Medium::Radio, "2023-05-10T13:00", 40'000));
    b.programs.emplace("c", make_program("c", "mc", Medium::Radio, "2023-05-10T14:00", 10'000));
    b.segments["ma"] = {seg("ma", 0, 10'000, F)};
    b.segments["mb"] = {seg("mb", 0, 40'000, M)};
    b.segments["mc"] = {seg("mc", 0, 10'000, SpeechLabel::Noise)};
    const metrics::NameIndex names;
    const std::vector<metrics::Dimension> dims{metrics::Dimension::Medium};

    const auto weighted = metrics::aggregate(b, names, dims);
    REQUIRE(weighted.size() == 1);
    CHECK(*weighted[0].wsr->female_pct() == doctest::Approx(20.0));
    CHECK_FALSE(weighted[0].wfr);  // radio has no faces
    CHECK_FALSE(weighted[0].wpr->defined());

    metrics::AggregateOptions mean;
    mean.merge = metrics::MergeMode::ProgramMean;
    const auto by_program = metrics::aggregate(b, names, dims, mean);
    CHECK(*by_program[0].wsr->female_pct() == doctest::Approx(50.0));
    CHECK(by_program[0].wsr->weight() == 2.0);
}

TEST_CASE("splitting by ad context yields program and break groups") {
    CorpusBundle b;
    b.programs.emplace("a", make_program("a", "m", Medium::TV, "2023-05-10T20:00", 60'000));
    b.breaks["m"] = {TimeInterval{20'000, 30'000}};
    b.segments["m"] = {seg("m", 0, 25'000, F), seg("m", 25'000, 60'000, M)};
    b.reports.push_back({"a", Role::Presenter, 1, 1});
    const std::vector<metrics::Dimension> dims{metrics::Dimension::AdContext};
    const auto groups = metrics::aggregate(b, {}, dims);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].key.ad_context == metrics::AdContext::InProgram);
    CHECK(groups[0].wsr->female_mass() == 20'000);
    CHECK(groups[0].wsr->weight() == 50'000);
    CHECK(groups[0].wpr->defined());
    CHECK(groups[1].key.ad_context == metrics::AdContext::InBreak);
    CHECK(*groups[1].wsr->female_pct() == doctest::Approx(50.0));
    CHECK_FALSE(groups[1].wpr);
    CHECK(groups[1].wfr);
    CHECK_FALSE(groups[1].wfr->defined());
}

TEST_CASE("merging is associative and groupings partition the corpus") {
    using metrics::Dimension;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        const CorpusBundle b = random_bundle(seed, 10);
        const namex::NameExtractor extractor(b.lexicon);
        const auto names = metrics::index_names(b, extractor);
        const auto programs = metrics::per_program_metrics(b, names, {}, false);
        const std::vector<Dimension> none;
        const auto all = metrics::merge_groups(programs, none, metrics::MergeMode::Weighted);
        REQUIRE(all.size() == 1);

        auto close = [](const std::optional<MetricValue>& x, const std::optional<MetricValue>& y) {
            if (x.has_value() != y.has_value()) return false;
            if (!x) return true;
            return std::fabs(x->weight() - y->weight()) <= 1e-9 * std::max(1.0, x->weight()) &&
                   std::fabs(x->female_mass() - y->female_mass()) <= 1e-9 * std::max(1.0, x->female_mass());
        };
        auto pool = [&](std::span<const metrics::GroupResult> groups) {
            metrics::GroupResult total;
            for (const auto& g : groups)
                for (auto field : {&metrics::GroupResult::wpr, &metrics::GroupResult::wsr,
                                   &metrics::GroupResult::wqr, &metrics::GroupResult::wfr})
                    if (g.*field) total.*field = (total.*field).value_or(MetricValue::undefined(
                                                      (g.*field)->kind())) + *(g.*field);
            return total;
        };
        auto same = [&](const metrics::GroupResult& x, const metrics::GroupResult& y) {
            return close(x.wpr, y.wpr) && close(x.wsr, y.wsr) && close(x.wqr, y.wqr) && close(x.wfr, y.wfr);
        };

        // One by one, pairwise, and all at once.
        std::vector<metrics::GroupResult> singles;
        for (const auto& pm : programs)
            singles.push_back(metrics::merge_groups(std::span(&pm, 1), none, metrics::MergeMode::Weighted).front());
        CHECK(same(pool(singles), all.front()));
        std::vector<metrics::GroupResult> pairs;
        for (std::size_t i = 0; i < programs.size(); i += 2)
            pairs.push_back(metrics::merge_groups(std::span(programs).subspan(i, std::min<std::size_t>(2, programs.size() - i)),
                                                  none, metrics::MergeMode::Weighted).front());
        CHECK(same(pool(pairs), all.front()));

        for (const auto& dims : std::vector<std::vector<Dimension>>{
                 {Dimension::Medium}, {Dimension::Channel, Dimension::Status}, {Dimension::Audience, Dimension::Conflict, Dimension::Category}}) {
            const auto groups = metrics::merge_groups(programs, dims, metrics::MergeMode::Weighted);
            CHECK(same(pool(groups), all.front()));
            for (const auto& g : groups)
                if (g.key.medium == Medium::Radio) CHECK_FALSE(g.wfr);
        }
        for (const auto& pm : programs)
            if (pm.program->medium == Medium::Radio) CHECK_FALSE(pm.wfr);
    }
}

}  // TEST_SUITE
