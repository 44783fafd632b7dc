#include <doctest.h>

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "oracles.hpp"
#include "wre/stats.hpp"
#include "wre/synthgen.hpp"

using namespace wre;

namespace {

struct Dataset {
    std::vector<double> y;
    std::vector<std::string> labels;
};

Dataset random_dataset(synth::Rng& rng) {
    Dataset d;
    const auto k = rng.uniform(2, 5);
    const auto n = rng.uniform(k + 2, 200);
    for (std::int64_t i = 0; i < n; ++i) {
        // Every level appears at least once.
        const auto level = i < k ? i : rng.uniform(0, k - 1);
        d.labels.push_back(fmt::format("L{}", level));
        d.y.push_back(rng.chance(0.3) ? static_cast<double>(rng.uniform(0, 1))
                                      : rng.unit() * (0.5 + 0.1 * static_cast<double>(level)));
    }
    return d;
}

align::AnalysisRow row(double y, std::string medium, std::string gender, std::size_t hits = 1) {
    align::AnalysisRow r;
    r.y = y;
    r.factors = {medium, "ch", "public", "news", "high", "before", gender};
    r.hits = hits;
    r.female_mass = y * static_cast<double>(hits);
    r.program_id = "p";
    return r;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("incomplete beta matches closed forms") {
    CHECK(stats::regularized_incomplete_beta(0.3, 1.0, 1.0) == doctest::Approx(0.3));
    CHECK(stats::regularized_incomplete_beta(0.25, 0.5, 1.0) == doctest::Approx(0.5));
    CHECK(stats::regularized_incomplete_beta(0.4, 2.0, 3.0) ==
          doctest::Approx(1.0 - std::pow(0.6, 4) - 4 * 0.4 * std::pow(0.6, 3)));
    CHECK(stats::regularized_incomplete_beta(0.0, 2.0, 3.0) == 0.0);
    CHECK(stats::regularized_incomplete_beta(1.0, 2.0, 3.0) == 1.0);
}

TEST_CASE("F upper tail agrees with quadrature") {
    CHECK(stats::f_upper_tail(1.0, 1.0, 2.0) == doctest::Approx(1.0 - std::sqrt(1.0 / 3.0)).epsilon(1e-12));
    CHECK(std::fabs(stats::f_upper_tail(1.0, 1.0, 2.0) - 0.4226) < 1e-4);
    CHECK(stats::f_upper_tail(0.0, 3.0, 10.0) == 1.0);
    for (double d1 : {1.0, 2.0, 3.0, 7.0})
        for (double d2 : {2.0, 5.0, 40.0, 900.0})
            for (double f : {0.1, 0.9, 2.5, 6.0}) {
                CAPTURE(d1);
                CAPTURE(d2);
                CAPTURE(f);
                CHECK(std::fabs(stats::f_upper_tail(f, d1, d2) - oracle::f_upper_tail(f, d1, d2)) < 1e-7);
            }
}

TEST_CASE("ANOVA sums match the pairwise oracle") {
    synth::Rng rng(41);
    for (int i = 0; i < 100; ++i) {
        const Dataset d = random_dataset(rng);
        const auto got = stats::one_way_anova(d.y, d.labels);
        const auto want = oracle::anova(d.y, d.labels);
        CAPTURE(i);
        CHECK(oracle::relative_error(got.ss_effect, want.ss_between) < 1e-8);
        CHECK(oracle::relative_error(got.ss_residual, want.ss_within) < 1e-8);
        CHECK(oracle::relative_error(got.ss_total, want.ss_total) < 1e-8);
        CHECK(oracle::relative_error(got.f_stat, want.f) < 1e-8);
        CHECK(oracle::relative_error(got.eta_squared, want.eta_squared) < 1e-8);
        CHECK(std::fabs(got.p_value - oracle::f_upper_tail(got.f_stat, got.df_effect, got.df_residual)) < 1e-6);
    }
}

TEST_CASE("least-squares residuals are orthogonal to the design") {
    synth::Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const Dataset d = random_dataset(rng);
        std::vector<align::AnalysisRow> rows;
        for (std::size_t j = 0; j < d.y.size(); ++j) rows.push_back(row(d.y[j], "tv", d.labels[j]));
        const auto design = stats::build_design(rows, align::Factor::SpeakerGender);
        CHECK(design.columns.front() == "intercept");
        CHECK(design.levels.front() == "L0");
        const auto fit = stats::ols_fit(design.x, design.y);
        const Eigen::VectorXd g = design.x.transpose() * fit.residuals;
        CHECK(g.cwiseAbs().maxCoeff() < 1e-10);
        // Treatment coding: the intercept is the reference-level mean.
        const auto anova = stats::one_way_anova(d.y, d.labels);
        CHECK(fit.coefficients[0] == doctest::Approx(anova.levels.front().mean).epsilon(1e-10));
        CHECK(fit.rss == doctest::Approx(anova.ss_residual).epsilon(1e-9));
    }
}

TEST_CASE("degenerate inputs raise typed errors") {
    auto kind_of = [](auto call) {
        try {
            call();
        } catch (const stats::StatsError& e) {
            return e.kind();
        }
        FAIL("expected a StatsError");
        return stats::StatsErrorKind::InsufficientData;
    };
    const std::vector<double> y{0.5, 0.5, 0.5, 0.5};
    const std::vector<std::string> two{"a", "a", "b", "b"};
    const std::vector<std::string> one{"a", "a", "a", "a"};
    CHECK(kind_of([&] { stats::one_way_anova(y, two); }) == stats::StatsErrorKind::ZeroVariance);
    CHECK(kind_of([&] { stats::one_way_anova(std::vector<double>{0, 1, 0, 1}, one); }) ==
          stats::StatsErrorKind::SingleLevelFactor);
    CHECK(kind_of([&] {
              stats::one_way_anova(std::vector<double>{0, 1},
                                   std::vector<std::string>{"a", "b"});
          }) == stats::StatsErrorKind::InsufficientData);
    Eigen::MatrixXd x(3, 2);
    x << 1, 2, 1, 2, 1, 2;
    CHECK(kind_of([&] { stats::ols_fit(x, Eigen::VectorXd::Ones(3)); }) ==
          stats::StatsErrorKind::RankDeficient);
}

TEST_CASE("frequency weights equal duplicated rows") {
    const std::vector<double> y{0.1, 0.9, 0.4, 1.0, 0.0};
    const std::vector<std::string> labels{"a", "a", "b", "b", "c"};
    const std::vector<double> w{2, 1, 3, 1, 2};
    std::vector<double> yy;
    std::vector<std::string> ll;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (int k = 0; k < static_cast<int>(w[i]); ++k) {
            yy.push_back(y[i]);
            ll.push_back(labels[i]);
        }
    const auto weighted = stats::one_way_anova(y, labels, w);
    const auto expanded = stats::one_way_anova(yy, ll);
    CHECK(weighted.df_residual == expanded.df_residual);
    CHECK(weighted.f_stat == doctest::Approx(expanded.f_stat).epsilon(1e-12));
    CHECK(weighted.p_value == doctest::Approx(expanded.p_value).epsilon(1e-12));
}

TEST_CASE("effect tiers use conventional cut points") {
    CHECK(stats::effect_tier(0.0099) == stats::EffectTier::None);
    CHECK(stats::effect_tier(0.01) == stats::EffectTier::Small);
    CHECK(stats::effect_tier(0.06) == stats::EffectTier::Medium);
    CHECK(stats::effect_tier(0.14) == stats::EffectTier::Large);
}

TEST_CASE("effect report skips single-level factors and flags aliased columns") {
    std::vector<align::AnalysisRow> rows;
    synth::Rng rng(5);
    for (int i = 0; i < 400; ++i) {
        const bool female = i % 2 == 0;
        const bool tv = i % 3 == 0;
        rows.push_back(row(std::clamp((female ? 0.45 : 0.30) + 0.2 * (rng.unit() - 0.5), 0.0, 1.0),
                           tv ? "tv" : "radio", female ? "female" : "male"));
    }
    const auto report = stats::effect_report(rows);
    CHECK(report.n == 400);
    REQUIRE(report.factors.size() == align::kAllFactors.size());
    for (const auto& f : report.factors) {
        if (f.factor == align::Factor::SpeakerGender) {
            REQUIRE(f.anova);
            CHECK(f.significant);
            CHECK(f.tier == stats::EffectTier::Large);
        } else if (f.factor == align::Factor::Medium) {
            CHECK(f.anova);
        } else {
            CHECK_FALSE(f.anova);
            CHECK_FALSE(f.skipped.empty());
        }
    }
    REQUIRE(report.joint);
    CHECK(report.joint->n == 400);
    CHECK(report.joint->r_squared > 0.5);
}

TEST_CASE("rows round-trip through text") {
    std::vector<align::AnalysisRow> rows{row(0.12, "tv", "male"), row(1.0, "radio", "female"),
                                         row(1.0 / 3.0, "tv", "female")};
    std::stringstream s;
    stats::write_rows(s, rows);
    const auto back = stats::read_rows(s);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].y == rows[i].y);
        CHECK(back[i].factors == rows[i].factors);
        CHECK(back[i].hits == 1);
    }
    std::istringstream bad("y,medium\n0.5,tv\n");
    CHECK_THROWS(stats::read_rows(bad));
}

TEST_CASE("ANOVA identities hold on random data") {
    synth::Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        const Dataset d = random_dataset(rng);
        const auto r = stats::one_way_anova(d.y, d.labels);
        CHECK(r.eta_squared >= 0.0);
        CHECK(r.eta_squared <= 1.0);
        CHECK(std::fabs(r.eta_squared - (1.0 - r.ss_residual / r.ss_total)) < 1e-9);
        std::vector<double> scaled = d.y;
        const double c = rng.uniform_real(0.01, 100.0);
        for (double& v : scaled) v *= c;
        const auto s = stats::one_way_anova(scaled, d.labels);
        CHECK(std::fabs(s.eta_squared - r.eta_squared) < 1e-9);
        CHECK(std::fabs(s.p_value - r.p_value) < 1e-9);
    }
}

TEST_CASE("F tail decreases in F") {
    for (double d1 : {1.0, 3.0, 10.0})
        for (double d2 : {2.0, 30.0, 5000.0}) {
            double previous = 1.0;
            for (double f = 0.05; f < 20.0; f *= 1.3) {
                const double p = stats::f_upper_tail(f, d1, d2);
                CHECK(p <= previous);
                previous = p;
            }
        }
}

TEST_CASE("incomplete beta reflection symmetry") {
    for (double x = 0.0; x <= 1.0; x += 0.05)
        for (double a : {0.5, 1.0, 2.5, 10.0, 150.0})
            for (double b : {0.5, 1.0, 3.0, 40.0}) {
                CAPTURE(x);
                CAPTURE(a);
                CAPTURE(b);
                CHECK(std::fabs(stats::regularized_incomplete_beta(x, a, b) -
                                (1.0 - stats::regularized_incomplete_beta(1.0 - x, b, a))) < 1e-10);
            }
}

}  // TEST_SUITE
