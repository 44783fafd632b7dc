#include "wre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "wre/ingest.hpp"

namespace wre::stats {

std::string_view to_string(StatsErrorKind k) {
    switch (k) {
        case StatsErrorKind::SingleLevelFactor: return "SingleLevelFactor";
        case StatsErrorKind::ZeroVariance: return "ZeroVariance";
        case StatsErrorKind::RankDeficient: return "RankDeficient";
        case StatsErrorKind::InsufficientData: return "InsufficientData";
    }
    return "?";
}

StatsError::StatsError(StatsErrorKind kind, const std::string& detail)
    : Error(fmt::format("{}: {}", to_string(kind), detail)), kind_(kind) {}

// ---------------------------------------------------------------------------

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b); converges
// quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIterations = 10'000;
    constexpr double kEpsilon = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) return h;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0))
        throw std::domain_error(
            fmt::format("incomplete beta undefined for x={}, a={}, b={}", x, a, b));
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_upper_tail(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::domain_error("F degrees of freedom must be > 0");
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0);
}

void CompensatedSum::add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
        compensation_ += (sum_ - t) + v;
    else
        compensation_ += (v - t) + sum_;
    sum_ = t;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> sorted_levels(std::span<const AnalysisRow> rows, Factor factor) {
    std::vector<std::string> levels;
    for (const auto& r : rows) levels.push_back(r.factor(factor));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

}  // namespace

Design build_design(std::span<const AnalysisRow> rows, Factor factor) {
    Design d;
    d.levels = sorted_levels(rows, factor);
    if (d.levels.size() < 2)
        throw StatsError(StatsErrorKind::SingleLevelFactor,
                         fmt::format("factor '{}' has {} level(s)", align::to_string(factor),
                                     d.levels.size()));
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(d.levels.size());
    d.x = Eigen::MatrixXd::Zero(n, p);
    d.y.resize(n);
    d.columns.push_back("intercept");
    for (std::size_t l = 1; l < d.levels.size(); ++l)
        d.columns.push_back(fmt::format("{}[{}]", align::to_string(factor), d.levels[l]));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        d.x(i, 0) = 1.0;
        const auto it = std::lower_bound(d.levels.begin(), d.levels.end(), row.factor(factor));
        const auto level = it - d.levels.begin();
        if (level > 0) d.x(i, level) = 1.0;
        d.y(i) = row.y;
    }
    return d;
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("design and response sizes differ");
    if (x.rows() < x.cols())
        throw StatsError(StatsErrorKind::InsufficientData,
                         fmt::format("{} rows for {} columns", x.rows(), x.cols()));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols())
        throw StatsError(StatsErrorKind::RankDeficient,
                         fmt::format("design rank {} < {} columns", qr.rank(), x.cols()));
    OlsFit fit;
    fit.coefficients = qr.solve(y);
    fit.residuals = y - x * fit.coefficients;
    fit.rss = fit.residuals.squaredNorm();
    return fit;
}

// ---------------------------------------------------------------------------

AnovaResult one_way_anova(std::span<const double> y, std::span<const std::string> labels,
                          std::span<const double> weights) {
    if (y.size() != labels.size() || (!weights.empty() && weights.size() != y.size()))
        throw std::invalid_argument("one_way_anova: input sizes differ");
    auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

    struct Group {
        CompensatedSum n, sum;
        double mean = 0.0;
    };
    std::map<std::string, Group> groups;
    CompensatedSum total_n, total_sum;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& g = groups[labels[i]];
        g.n.add(weight(i));
        g.sum.add(weight(i) * y[i]);
        total_n.add(weight(i));
        total_sum.add(weight(i) * y[i]);
    }
    if (groups.size() < 2)
        throw StatsError(StatsErrorKind::SingleLevelFactor,
                         fmt::format("{} level(s) observed", groups.size()));
    const double n = total_n.value();
    const double k = static_cast<double>(groups.size());
    if (!(n > k))
        throw StatsError(StatsErrorKind::InsufficientData,
                         fmt::format("{} observations for {} levels", n, groups.size()));

    const double grand_mean = total_sum.value() / n;
    for (auto& [level, g] : groups) g.mean = g.sum.value() / g.n.value();

    CompensatedSum ss_effect, ss_residual, ss_total;
    for (const auto& [level, g] : groups) {
        const double d = g.mean - grand_mean;
        ss_effect.add(g.n.value() * d * d);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double within = y[i] - groups[labels[i]].mean;
        const double about_grand = y[i] - grand_mean;
        ss_residual.add(weight(i) * within * within);
        ss_total.add(weight(i) * about_grand * about_grand);
    }

    AnovaResult r;
    r.ss_effect = ss_effect.value();
    r.ss_residual = ss_residual.value();
    r.ss_total = ss_total.value();
    r.df_effect = k - 1.0;
    r.df_residual = n - k;
    for (const auto& [level, g] : groups) r.levels.push_back({level, g.n.value(), g.mean});
    if (r.ss_total <= 0.0)
        throw StatsError(StatsErrorKind::ZeroVariance, "response is constant; F is undefined");

    r.eta_squared = std::clamp(r.ss_effect / r.ss_total, 0.0, 1.0);
    if (r.ss_residual <= 0.0) {
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    } else {
        r.f_stat = (r.ss_effect / r.df_effect) / (r.ss_residual / r.df_residual);
        r.p_value = f_upper_tail(r.f_stat, r.df_effect, r.df_residual);
    }
    return r;
}

AnovaResult one_way_anova(std::span<const AnalysisRow> rows, Factor factor,
                          RowWeighting weighting) {
    std::vector<double> y, w;
    std::vector<std::string> labels;
    y.reserve(rows.size());
    labels.reserve(rows.size());
    for (const auto& r : rows) {
        y.push_back(r.y);
        labels.push_back(r.factor(factor));
        if (weighting == RowWeighting::HitCount) w.push_back(static_cast<double>(r.hits));
    }
    AnovaResult result = one_way_anova(y, labels, w);
    result.factor = std::string(align::to_string(factor));
    return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EffectTier t) {
    switch (t) {
        case EffectTier::None: return "none";
        case EffectTier::Small: return "small";
        case EffectTier::Medium: return "medium";
        case EffectTier::Large: return "large";
    }
    return "?";
}

EffectTier effect_tier(double eta_squared) {
    if (eta_squared >= 0.14) return EffectTier::Large;
    if (eta_squared >= 0.06) return EffectTier::Medium;
    if (eta_squared >= 0.01) return EffectTier::Small;
    return EffectTier::None;
}

namespace {

// Treatment-coded additive design over every factor with two or more levels,
// keeping only columns that are linearly independent of those already kept.
JointFit joint_fit(std::span<const AnalysisRow> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    std::vector<Eigen::VectorXd> candidates;
    std::vector<std::string> names;
    candidates.push_back(Eigen::VectorXd::Ones(n));
    names.push_back("intercept");
    for (Factor f : align::kAllFactors) {
        const auto levels = sorted_levels(rows, f);
        for (std::size_t l = 1; l < levels.size(); ++l) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i)
                if (rows[static_cast<std::size_t>(i)].factor(f) == levels[l]) col(i) = 1.0;
            candidates.push_back(std::move(col));
            names.push_back(fmt::format("{}[{}]", align::to_string(f), levels[l]));
        }
    }

    JointFit fit;
    fit.n = rows.size();
    std::vector<Eigen::VectorXd> basis;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        Eigen::VectorXd r = candidates[c];
        const double norm = r.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) r -= q.dot(r) * q;
        if (norm > 0.0 && r.norm() > 1e-9 * norm) {
            basis.push_back(r / r.norm());
            kept.push_back(c);
            fit.columns.push_back(names[c]);
        } else {
            fit.aliased.push_back(names[c]);
        }
    }
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = candidates[kept[j]];
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rows[static_cast<std::size_t>(i)].y;

    const OlsFit ols = ols_fit(x, y);
    fit.coefficients = ols.coefficients;
    fit.rss = ols.rss;
    const double tss = (y.array() - y.mean()).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - ols.rss / tss : 0.0;
    return fit;
}

}  // namespace

EffectReport effect_report(std::span<const AnalysisRow> rows, const EffectOptions& options) {
    EffectReport report;
    report.n = rows.size();
    for (Factor f : align::kAllFactors) {
        FactorEffect effect{f, std::nullopt, {}, false, EffectTier::None};
        try {
            effect.anova = one_way_anova(rows, f, options.weighting);
            effect.significant = effect.anova->p_value < options.alpha;
            effect.tier = effect_tier(effect.anova->eta_squared);
        } catch (const StatsError& e) {
            effect.skipped = e.what();
        }
        report.factors.push_back(std::move(effect));
    }
    if (!rows.empty()) {
        try {
            report.joint = joint_fit(rows);
        } catch (const StatsError&) {
            report.joint.reset();
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

void write_rows(std::ostream& out, std::span<const AnalysisRow> rows) {
    std::vector<std::string> header{"y"};
    for (Factor f : align::kAllFactors) header.emplace_back(align::to_string(f));
    out << csv::join(header, ',') << '\n';
    for (const auto& r : rows) {
        std::vector<std::string> fields{fmt::format("{:.17g}", r.y)};
        fields.insert(fields.end(), r.factors.begin(), r.factors.end());
        out << csv::join(fields, ',') << '\n';
    }
}

std::vector<AnalysisRow> read_rows(std::istream& in, std::string_view source) {
    std::vector<AnalysisRow> rows;
    std::string line;
    std::size_t number = 0;
    std::vector<std::string> header{"y"};
    for (Factor f : align::kAllFactors) header.emplace_back(align::to_string(f));
    auto fail = [&](const std::string& detail) {
        return IngestError(IngestErrorKind::SchemaViolation, std::string(source), number, detail);
    };
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (number == 1) {
            if (csv::split(line, ',') != header) throw fail("unexpected header");
            continue;
        }
        if (line.empty()) continue;
        const auto fields = csv::split(line, ',');
        if (fields.size() != 8) throw fail("expected 8 fields");
        AnalysisRow r;
        std::size_t used = 0;
        try {
            r.y = std::stod(fields[0], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != fields[0].size() || !(r.y >= 0.0 && r.y <= 1.0))
            throw fail(fmt::format("y must be a number in [0, 1], got '{}'", fields[0]));
        std::copy(fields.begin() + 1, fields.end(), r.factors.begin());
        r.hits = 1;
        r.female_mass = r.y;
        rows.push_back(std::move(r));
    }
    if (number == 0) throw fail("missing header row");
    return rows;
}

}  // namespace wre::stats
